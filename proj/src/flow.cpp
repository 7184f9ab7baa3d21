#include "qflow/flow.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qflow/errors.hpp"
#include "qflow/functionals.hpp"

namespace qflow {

namespace {

struct EvalResult {
  ScalarField dtu;
  ScalarField density_l;
  double sum_F_max = 0.0;
};

// Pointwise F(lambda(chi_u)) - log Psi plus the cached data the stepper
// and the monitors need.  ConeViolation carries the offending point.
EvalResult evaluate(const GeomPtr& geom, const ScalarField& u,
                    const FlowConfig& config) {
  const int n = geom->n();
  const int k = config.k, l = config.l;
  const double log_binom_ratio = std::log(binom(n, k) / binom(n, l));
  const HermMatrix id = HermMatrix::Identity(n, n);

  EvalResult out{ScalarField::zeros(geom), ScalarField::zeros(geom), 0.0};
  const FormField x = chi_u(geom, u);
  for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
    EigenTuple lam = eigen_wrt_metric(x.matrix(p), id);
    const EigenTuple e = detail::sym_prefix(lam, k);
    const double linf = lam.cwiseAbs().maxCoeff();
    for (int j = 1; j <= k; ++j)
      if (!(e[j] > detail::cone_eps(linf, j))) throw ConeViolation(j, e[j], p);

    out.dtu.values[p] = std::log(e[k]) - std::log(e[l]) - log_binom_ratio -
                        std::log(config.psi.values[p]);
    out.density_l.values[p] = e[l] / binom(n, l);

    const double sk = static_cast<double>(n - k + 1) * e[k - 1] / e[k];
    const double sl = l >= 1 ? static_cast<double>(n - l + 1) * e[l - 1] / e[l] : 0.0;
    out.sum_F_max = std::max(out.sum_F_max, sk - sl);
  }
  if (!out.dtu.values.allFinite())
    throw NumericalBlowup("flow rhs produced non-finite values");
  return out;
}

SeriesRecord make_record(const FlowState& state, const FlowConfig& config,
                         double j_value) {
  SeriesRecord r;
  r.t = state.t;
  r.dt = 0.0;  // filled once the next step size is known
  r.min_dtu = state.dtu.values.minCoeff();
  r.max_dtu = state.dtu.values.maxCoeff();
  r.osc_dtu = r.max_dtu - r.min_dtu;
  r.J_l = j_value;
  r.b_est = grid_mean(state.dtu);
  // density_k = e^{dtu} psi density_l pointwise, so the elliptic residual
  // |density_k - e^b psi density_l| needs no second eigenvalue pass.
  const double eb = std::exp(r.b_est);
  double worst = 0.0;
  for (Eigen::Index p = 0; p < state.u.geom->num_points(); ++p) {
    const double w = config.psi.values[p] * state.density_l.values[p];
    worst = std::max(worst, std::abs(w * (std::exp(state.dtu.values[p]) - eb)));
  }
  r.residual_inf = worst;
  return r;
}

}  // namespace

void FlowConfig::validate(const TorusGeometry& geom) const {
  if (!(0 <= l && l < k && k <= geom.n()))
    throw std::domain_error("FlowConfig: need 0 <= l < k <= n");
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw std::domain_error("FlowConfig: cfl must lie in (0, 1]");
  if (!(stop_osc > 0.0)) throw std::domain_error("FlowConfig: stop_osc must be positive");
  if (!(t_max > 0.0)) throw std::domain_error("FlowConfig: t_max must be positive");
  if (max_steps < 1) throw std::domain_error("FlowConfig: max_steps must be >= 1");
  if (snapshot_every < 1) throw std::domain_error("FlowConfig: snapshot_every must be >= 1");
  if (!psi.geom || !psi.geom->same_grid(geom))
    throw std::domain_error("FlowConfig: psi grid mismatch");
  if (!(psi.values.minCoeff() > 0.0))
    throw std::domain_error("FlowConfig: psi must be positive everywhere");
}

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::max_steps: return "max_steps";
    case FlowStatus::cone_exit: return "cone_exit";
  }
  return "unknown";
}

FlowState initial_state(const FlowConfig& config, const GeomPtr& geom) {
  config.validate(*geom);
  FlowState state;
  state.u = ScalarField::zeros(geom);
  state.t = 0.0;
  state.step_index = 0;
  EvalResult ev = evaluate(geom, state.u, config);
  state.dtu = std::move(ev.dtu);
  state.density_l = std::move(ev.density_l);
  state.sum_F_max = ev.sum_F_max;
  return state;
}

ScalarField rhs(const FlowState& state, const FlowConfig& config) {
  return evaluate(state.u.geom, state.u, config).dtu;
}

double stable_dt(const FlowState& state, const FlowConfig& config) {
  const double h = state.u.geom->h();
  return config.cfl * h * h / (4.0 * state.sum_F_max);
}

FlowState step(const FlowState& state, const FlowConfig& config) {
  const GeomPtr& geom = state.u.geom;
  double dt = stable_dt(state, config);
  const int max_halvings = 20;
  int retries = 0;
  for (;; ++retries) {
    try {
      ScalarField provisional{geom, state.u.values + dt * state.dtu.values};
      EvalResult mid = evaluate(geom, provisional, config);

      ScalarField next{geom,
                       state.u.values + 0.5 * dt * (state.dtu.values + mid.dtu.values)};
      if (!next.values.allFinite())
        throw NumericalBlowup("flow step produced non-finite values");
      EvalResult ev = evaluate(geom, next, config);

      FlowState out;
      out.u = std::move(next);
      out.t = state.t + dt;
      out.step_index = state.step_index + 1;
      out.dtu = std::move(ev.dtu);
      out.density_l = std::move(ev.density_l);
      out.sum_F_max = ev.sum_F_max;
      out.last_dt = dt;
      out.last_retries = retries;
      return out;
    } catch (const ConeViolation&) {
      if (retries >= max_halvings) throw;
      dt *= 0.5;
    }
  }
}

double max_principle_slack_rate(const TorusGeometry& geom) {
  return 1e-6 + 10.0 * geom.h() * geom.h();
}

FlowReport run(const FlowConfig& config, const GeomPtr& geom,
               const StateObserver& observer) {
  config.validate(*geom);
  FlowReport report;
  FlowState state = initial_state(config, geom);
  const double slack_rate = max_principle_slack_rate(*geom);

  // For l <= 1 the closed-form J_l reduces to integrals against the static
  // chi density and the S_l density already cached by the evaluation pass
  // (the same arithmetic as J_functional); the interpolation route is only
  // needed for l >= 2.
  auto j_monitor = [&](const FlowState& s) {
    if (config.l == 0) return integrate(s.u, ScalarField::constant(geom, 1.0));
    if (config.l == 1)
      return 0.5 * (integrate(s.u, ScalarField{geom, geom->chi_density(1)}) +
                    integrate(s.u, s.density_l));
    return J_functional(s.u, config.l).value;
  };

  if (observer) observer(state);

  for (;;) {
    SeriesRecord rec = make_record(state, config, j_monitor(state));
    report.osc_u_max = std::max(report.osc_u_max, oscillation(state.u));

    if (!report.series.empty()) {
      // Parabolic maximum principle: extrema of du/dt must move
      // monotonically inward, up to the declared per-unit-time slack.
      const SeriesRecord& prev = report.series.back();
      const double slack = slack_rate * prev.dt;
      const double over = std::max(rec.max_dtu - prev.max_dtu - slack,
                                   prev.min_dtu - rec.min_dtu - slack);
      if (over > 0.0) {
        ++report.max_principle_violations;
        report.max_principle_worst = std::max(report.max_principle_worst, over);
      }
    }

    if (rec.osc_dtu < config.stop_osc) {
      report.series.push_back(rec);
      report.status = FlowStatus::converged;
      break;
    }
    if (state.t > config.t_max || state.step_index >= config.max_steps) {
      report.series.push_back(rec);
      report.status = FlowStatus::max_steps;
      report.status_detail = state.t > config.t_max ? "t_max reached" : "step budget exhausted";
      break;
    }

    try {
      FlowState next = step(state, config);
      rec.dt = next.last_dt;
      report.cone_retries += next.last_retries;
      report.series.push_back(rec);
      state = std::move(next);
    } catch (const ConeViolation& cv) {
      report.series.push_back(rec);
      report.status = FlowStatus::cone_exit;
      report.status_detail = cv.what();
      break;
    }

    if (observer && state.step_index % config.snapshot_every == 0) observer(state);
  }

  report.final_u = state.u;
  report.final_t = state.t;
  report.final_u_hat = normalize(state.u, config.l);
  if (report.status == FlowStatus::converged) {
    report.final_b = estimate_b(report.final_u_hat, config.psi, config.k, config.l);
    try {
      report.decay_rate = fit_decay(report).rate;
    } catch (const EstimationError&) {
      // instant convergence leaves nothing to fit
    }
  }
  if (observer) observer(state);
  return report;
}

DecayFit fit_decay(const FlowReport& report) {
  std::vector<double> ts, logs;
  int past_one = 0;
  for (const SeriesRecord& r : report.series) {
    if (r.osc_dtu > 1e-13) {
      ts.push_back(r.t);
      logs.push_back(std::log(r.osc_dtu));
      if (r.t > 1.0) ++past_one;
    }
  }
  if (past_one < 10)
    throw EstimationError("fit_decay: need >= 10 usable records past t = 1, have " +
                          std::to_string(past_one));

  const size_t m = ts.size();
  const size_t begin = m / 2;  // trailing half
  const size_t count = m - begin;
  double st = 0, sl = 0;
  for (size_t i = begin; i < m; ++i) {
    st += ts[i];
    sl += logs[i];
  }
  const double mean_t = st / count, mean_l = sl / count;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = begin; i < m; ++i) {
    const double dx = ts[i] - mean_t, dy = logs[i] - mean_l;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw EstimationError("fit_decay: degenerate time window");

  DecayFit fit;
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.n_used = static_cast<int>(count);
  const double ss_res = syy - slope * sxy;
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double estimate_decay_rate(const FlowReport& report) { return fit_decay(report).rate; }

void write_series_csv(std::ostream& os, const FlowReport& report, int every) {
  if (every < 1) every = 1;
  os << "t,dt,min_dtu,max_dtu,osc_dtu,J_l,residual_inf,b_est\n";
  char line[256];
  const size_t m = report.series.size();
  for (size_t i = 0; i < m; ++i) {
    if (i % every != 0 && i + 1 != m) continue;
    const SeriesRecord& r = report.series[i];
    std::snprintf(line, sizeof(line),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.dt,
                  r.min_dtu, r.max_dtu, r.osc_dtu, r.J_l, r.residual_inf, r.b_est);
    os << line;
  }
}

std::string series_csv(const FlowReport& report, int every) {
  std::ostringstream os;
  write_series_csv(os, report, every);
  return os.str();
}

}  // namespace qflow
