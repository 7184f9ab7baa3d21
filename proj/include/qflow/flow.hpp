#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qflow/field.hpp"

// Explicit time integration of du/dt = log(S_k/S_l)(chi_u) - log Psi with
// Psi = (C(n,k)/C(n,l)) psi: Heun stepping under a parabolic CFL bound,
// cone enforcement with dt-halving retries, and per-step monitors for the
// structural claims (extrema of du/dt, J_l, elliptic residual).

namespace qflow {

struct FlowConfig {
  int k = 2;
  int l = 0;
  ScalarField psi;            // positive
  double cfl = 0.2;           // in (0, 1]
  double stop_osc = 1e-8;     // convergence threshold on osc(du/dt)
  double t_max = 100.0;
  long max_steps = 1000000;
  int snapshot_every = 1;     // observer / CSV thinning

  void validate(const TorusGeometry& geom) const;
};

struct FlowState {
  ScalarField u;
  double t = 0.0;
  ScalarField dtu;        // right-hand side at u
  long step_index = 0;
  // cached derived data and step statistics
  ScalarField density_l;  // S_l(chi_u)/C(n,l) pointwise
  double sum_F_max = 0.0; // max over the grid of sum_i F^{ii}
  double last_dt = 0.0;
  int last_retries = 0;
};

struct SeriesRecord {
  double t = 0.0;
  double dt = 0.0;
  double min_dtu = 0.0;
  double max_dtu = 0.0;
  double osc_dtu = 0.0;
  double J_l = 0.0;
  double residual_inf = 0.0;
  double b_est = 0.0;
};

enum class FlowStatus { converged, max_steps, cone_exit };

const char* to_string(FlowStatus s);

struct FlowReport {
  std::vector<SeriesRecord> series;   // one record per step, t strictly increasing
  ScalarField final_u_hat;
  double final_b = std::numeric_limits<double>::quiet_NaN();
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  FlowStatus status = FlowStatus::max_steps;
  std::string status_detail;

  // Monitor summaries accumulated over the whole run.
  int max_principle_violations = 0;
  double max_principle_worst = 0.0;   // largest slack overshoot seen
  long cone_retries = 0;              // dt halvings that were needed
  double osc_u_max = 0.0;             // sup over time of osc(u)
  ScalarField final_u;
  double final_t = 0.0;
};

/// Initial state u = 0 with the right-hand side evaluated.
FlowState initial_state(const FlowConfig& config, const GeomPtr& geom);

/// Right-hand side at the state's u; throws ConeViolation (with the grid
/// point attached) when chi_u leaves Gamma^k anywhere.
ScalarField rhs(const FlowState& state, const FlowConfig& config);

/// Parabolic bound cfl * h^2 / (4 max sum_i F^{ii}) for the frozen
/// linearization.
double stable_dt(const FlowState& state, const FlowConfig& config);

/// One Heun (explicit trapezoid) step; halves dt and retries up to 20
/// times if a provisional state exits the cone, then rethrows.
FlowState step(const FlowState& state, const FlowConfig& config);

using StateObserver = std::function<void(const FlowState&)>;

/// Runs the flow from u = 0 until osc(du/dt) < stop_osc, t exceeds t_max,
/// or max_steps; records monitors every step; on convergence computes
/// u_hat, b, and the decay rate.  The observer, when given, is called on
/// the initial state, every snapshot_every-th step, and the final state.
FlowReport run(const FlowConfig& config, const GeomPtr& geom,
               const StateObserver& observer = {});

struct DecayFit {
  double rate = 0.0;       // -slope of log osc(du/dt) against t
  double r_squared = 1.0;  // over the fitted window
  int n_used = 0;
};

/// Least-squares fit of log osc(du/dt) over the trailing half of the
/// usable records (osc > 1e-13); requires >= 10 usable records past t = 1.
DecayFit fit_decay(const FlowReport& report);
double estimate_decay_rate(const FlowReport& report);

/// Per-step slack allowed on the monotonicity of the du/dt extrema:
/// (1e-6 + 10 h^2) per unit time.
double max_principle_slack_rate(const TorusGeometry& geom);

/// CSV series with header "t,dt,min_dtu,max_dtu,osc_dtu,J_l,residual_inf,b_est";
/// rows are thinned to every `every`-th record, always keeping the first
/// and last.
void write_series_csv(std::ostream& os, const FlowReport& report, int every = 1);
std::string series_csv(const FlowReport& report, int every = 1);

}  // namespace qflow
