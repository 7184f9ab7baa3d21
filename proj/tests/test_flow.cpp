#include <doctest.h>

#include <cmath>

#include "qflow/config.hpp"
#include "qflow/errors.hpp"
#include "qflow/flow.hpp"
#include "qflow/functionals.hpp"

using namespace qflow;

namespace {

RunConfig parse(const std::string& text) { return parse_config_text(text); }

const char* kFixedPoint =
    "n = 2\nN = 16\nk = 2\nl = 1\na = 2.0\ntoy = 1\n"
    "psi = manufactured\n"
    "rho = cos 1 0 0 0 0.05\n"
    "stop_osc = 1e-8\nt_max = 10\n";

const char* kShift =
    "n = 2\nN = 8\nk = 2\nl = 1\na = 2.0\ntoy = 1\n"
    "psi = shift 0.1\n"
    "rho = cos 1 0 0 0 1e-9\n"
    "stop_osc = 1e-12\nt_max = 50\n";

}  // namespace

TEST_CASE("rhs vanishes at a manufactured fixed point") {
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  const FlowState state = initial_state(fc, geom);
  CHECK(state.dtu.values.abs().maxCoeff() <= 1e-14);
}

TEST_CASE("rhs is zero for the constant quotient geometry") {
  // chi = 2 omega, psi = 2: lambda = (2,2), S2/S1 = 1, Psi = 1
  const RunConfig cfg = parse(
      "n = 2\nN = 8\nk = 2\nl = 1\na = 2.0\ntoy = 1\npsi = constant 2.0\n");
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  const FlowState state = initial_state(fc, geom);
  CHECK(state.dtu.values.abs().maxCoeff() <= 1e-15);
}

TEST_CASE("scaling psi shifts the rhs uniformly") {
  const RunConfig base = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(base);
  FlowConfig fc = build_flow_config(base, geom);
  const FlowState s0 = initial_state(fc, geom);

  const double delta = 0.3;
  FlowConfig shifted = fc;
  shifted.psi.values *= std::exp(delta);
  const FlowState s1 = initial_state(shifted, geom);
  CHECK((s1.dtu.values - (s0.dtu.values - delta)).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("stable_dt matches the frozen-coefficient bound") {
  // chi = omega, k = n, l = 0: sum F^{ii} = n, dt = cfl h^2 / (4n)
  for (int n : {2, 3}) {
    const RunConfig cfg = parse("n = " + std::to_string(n) +
                                "\nN = 8\nk = " + std::to_string(n) +
                                "\nl = 0\na = 1.0\ntoy = 1\npsi = constant 1.0\n");
    const GeomPtr geom = build_geometry(cfg);
    const FlowConfig fc = build_flow_config(cfg, geom);
    const FlowState state = initial_state(fc, geom);
    const double h2 = geom->h() * geom->h();
    CHECK(stable_dt(state, fc) == doctest::Approx(fc.cfl * h2 / (4.0 * n)).epsilon(1e-12));
  }
}

TEST_CASE("doubling the eigenvalues doubles dt in the top-level case") {
  auto dt_for = [&](double a) {
    const RunConfig cfg = parse("n = 2\nN = 8\nk = 2\nl = 0\na = " + std::to_string(a) +
                                "\ntoy = 1\npsi = constant 1.0\n");
    const GeomPtr geom = build_geometry(cfg);
    const FlowConfig fc = build_flow_config(cfg, geom);
    return stable_dt(initial_state(fc, geom), fc);
  };
  CHECK(dt_for(2.0) == doctest::Approx(2.0 * dt_for(1.0)).epsilon(1e-12));
}

TEST_CASE("step leaves a fixed point unchanged") {
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  FlowState state = initial_state(fc, geom);
  for (int i = 0; i < 100; ++i) state = step(state, fc);
  CHECK(state.u.values.abs().maxCoeff() <= 1e-14);
  CHECK(state.step_index == 100);
}

TEST_CASE("spatially constant rhs integrates exactly") {
  // psi = (manufactured quotient) * e^delta: u(t) = -delta t uniformly
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  FlowConfig fc = build_flow_config(cfg, geom);
  const double delta = 0.2;
  fc.psi.values *= std::exp(delta);
  FlowState state = initial_state(fc, geom);
  for (int i = 0; i < 50; ++i) state = step(state, fc);
  CHECK((state.u.values + delta * state.t).abs().maxCoeff() <= 1e-13);
  // u_hat is unaffected by the uniform drift
  CHECK(normalize(state.u, fc.l).values.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("one step obeys the scheme bound") {
  const RunConfig cfg = parse(kShift);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  FlowState state = initial_state(fc, geom);
  const double rhs_max = state.dtu.values.abs().maxCoeff();
  const FlowState next = step(state, fc);
  CHECK(next.u.values.abs().maxCoeff() <=
        next.last_dt * rhs_max + 10.0 * next.last_dt * next.last_dt);
}

TEST_CASE("run converges instantly on a manufactured fixed point") {
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  const FlowReport rep = run(build_flow_config(cfg, geom), geom);
  CHECK(rep.status == FlowStatus::converged);
  CHECK(rep.series.size() == 1);
  CHECK(rep.final_u.values.abs().maxCoeff() == 0.0);
  CHECK(std::abs(rep.final_b) <= 1e-12);
  CHECK(rep.series.back().residual_inf <= 1e-12);
  CHECK(std::isnan(rep.decay_rate));  // nothing to fit
}

TEST_CASE("constant-shift run recovers the elliptic pair") {
  const RunConfig cfg = parse(kShift);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  const FlowReport rep = run(fc, geom);
  REQUIRE(rep.status == FlowStatus::converged);
  CHECK(rep.final_b == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(oscillation(rep.final_u_hat) <= 1e-8);
  CHECK(rep.max_principle_violations == 0);
  CHECK(rep.cone_retries == 0);
  for (size_t i = 1; i < rep.series.size(); ++i)
    CHECK(rep.series[i].t > rep.series[i - 1].t);

  SUBCASE("J_l series is monotone (psi >= c)") {
    for (size_t i = 1; i < rep.series.size(); ++i)
      CHECK(rep.series[i].J_l <= rep.series[i - 1].J_l + 1e-8);
  }
  SUBCASE("decay fit is clean") {
    const DecayFit fit = fit_decay(rep);
    CHECK(fit.rate > 0.0);
    CHECK(fit.r_squared >= 0.95);
  }
  SUBCASE("elliptic residual against recomputed densities") {
    // recompute both densities from the stored u_hat
    const FormField x = chi_u(geom, rep.final_u_hat);
    const HermMatrix id = HermMatrix::Identity(2, 2);
    double worst = 0.0;
    for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
      const double dk = wedge_ratio(x.matrix(p), id, fc.k);
      const double dl = wedge_ratio(x.matrix(p), id, fc.l);
      worst = std::max(worst,
                       std::abs(dk - std::exp(rep.final_b) * fc.psi.values[p] * dl));
    }
    CHECK(worst <= 10.0 * fc.stop_osc + geom->h() * geom->h());
  }
}

TEST_CASE("normalization leaves the monitor series invariant under psi scaling") {
  const RunConfig cfg = parse(kShift);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  FlowConfig scaled = fc;
  const double delta = 0.05;
  scaled.psi.values *= std::exp(delta);

  const FlowReport a = run(fc, geom);
  const FlowReport b = run(scaled, geom);
  REQUIRE(a.series.size() == b.series.size());
  for (size_t i = 0; i < a.series.size(); i += 97) {
    CHECK(std::abs(b.series[i].max_dtu - (a.series[i].max_dtu - delta)) <= 1e-12);
    CHECK(std::abs(b.series[i].min_dtu - (a.series[i].min_dtu - delta)) <= 1e-12);
    CHECK(std::abs(b.series[i].osc_dtu - a.series[i].osc_dtu) <= 1e-12);
  }
  CHECK((a.final_u_hat.values - b.final_u_hat.values).abs().maxCoeff() <= 1e-12);
  CHECK(b.final_b == doctest::Approx(a.final_b - delta).epsilon(1e-10));
}

TEST_CASE("run stops on budgets") {
  RunConfig cfg = parse(kShift);
  const GeomPtr geom = build_geometry(cfg);
  FlowConfig fc = build_flow_config(cfg, geom);
  SUBCASE("step budget") {
    fc.max_steps = 5;
    const FlowReport rep = run(fc, geom);
    CHECK(rep.status == FlowStatus::max_steps);
    CHECK(rep.series.size() == 6);
  }
  SUBCASE("time budget") {
    fc.t_max = 1e-4;
    const FlowReport rep = run(fc, geom);
    CHECK(rep.status == FlowStatus::max_steps);
  }
}

TEST_CASE("cone exit surfaces as a status with the partial report") {
  // chi margin sits just above the strict-positivity floor and psi is
  // nearly zero there, so the flow pushes outward at that point
  const RunConfig cfg = parse(
      "n = 2\nN = 8\nk = 2\nl = 1\na = 2.0\ntoy = 1\n"
      "psi = modes 1.0\n"
      "psi_mode = cos 1 0 0 0 -0.999999999999\n"
      "rho = cos 1 0 0 0 0.20264236728163593\n"
      "stop_osc = 1e-10\nt_max = 10\nmax_steps = 100000\n");
  const GeomPtr geom = build_geometry(cfg);
  const FlowReport rep = run(build_flow_config(cfg, geom), geom);
  CHECK(rep.status == FlowStatus::cone_exit);
  CHECK(!rep.status_detail.empty());
  CHECK(rep.series.size() < 1000);
}

TEST_CASE("decay fit on synthetic series") {
  FlowReport rep;
  SUBCASE("exact exponential") {
    for (int i = 0; i <= 400; ++i) {
      SeriesRecord r;
      r.t = i * 0.01;
      r.osc_dtu = 3.0 * std::exp(-2.0 * r.t);
      rep.series.push_back(r);
    }
    const DecayFit fit = fit_decay(rep);
    CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant series gives rate zero") {
    for (int i = 0; i <= 400; ++i) {
      SeriesRecord r;
      r.t = i * 0.01;
      r.osc_dtu = 0.5;
      rep.series.push_back(r);
    }
    CHECK(std::abs(estimate_decay_rate(rep)) <= 1e-12);
  }
  SUBCASE("too few usable records") {
    for (int i = 0; i < 5; ++i) {
      SeriesRecord r;
      r.t = 2.0 + i;
      r.osc_dtu = 1e-3;
      rep.series.push_back(r);
    }
    CHECK_THROWS_AS(fit_decay(rep), EstimationError);
  }
}

TEST_CASE("series CSV header and determinism") {
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig fc = build_flow_config(cfg, geom);
  const std::string a = series_csv(run(fc, geom));
  const std::string b = series_csv(run(fc, geom));
  CHECK(a == b);
  CHECK(a.rfind("t,dt,min_dtu,max_dtu,osc_dtu,J_l,residual_inf,b_est\n", 0) == 0);
}

TEST_CASE("config validation") {
  const RunConfig cfg = parse(kFixedPoint);
  const GeomPtr geom = build_geometry(cfg);
  FlowConfig fc = build_flow_config(cfg, geom);
  SUBCASE("cfl range") {
    fc.cfl = 0.0;
    CHECK_THROWS_AS(fc.validate(*geom), std::domain_error);
    fc.cfl = 1.5;
    CHECK_THROWS_AS(fc.validate(*geom), std::domain_error);
  }
  SUBCASE("psi positivity") {
    fc.psi.values[0] = 0.0;
    CHECK_THROWS_AS(fc.validate(*geom), std::domain_error);
  }
  SUBCASE("level ordering") {
    fc.l = 2;
    CHECK_THROWS_AS(fc.validate(*geom), std::domain_error);
  }
}
