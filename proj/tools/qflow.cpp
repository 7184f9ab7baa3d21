#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qflow/config.hpp"
#include "qflow/errors.hpp"
#include "qflow/functionals.hpp"
#include "qflow/selftest.hpp"
#include "qflow/subsolution.hpp"

namespace fs = std::filesystem;
using namespace qflow;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void apply_toy_override(RunConfig& cfg) {
  cfg.toy = true;
  for (const TrigPoly* poly : {&cfg.rho, &cfg.u_star, &cfg.psi_table})
    if (!poly->toy_compatible())
      throw ConfigError("--toy: configured modes use coordinates beyond (x^1, y^1)");
  if (cfg.u_bar && !cfg.u_bar->toy_compatible())
    throw ConfigError("--toy: u_bar uses coordinates beyond (x^1, y^1)");
}

int cmd_flow(const RunConfig& cfg) {
  const GeomPtr geom = build_geometry(cfg);
  const FlowConfig flow_cfg = build_flow_config(cfg, geom);

  // Dichotomy diagnostic sampled along the run when a subsolution is given.
  double theta_min = std::numeric_limits<double>::quiet_NaN();
  StateObserver observer;
  ScalarField u_bar;
  if (cfg.u_bar) {
    u_bar = build_u_bar(cfg, geom);
    theta_min = std::numeric_limits<double>::infinity();
    observer = [&](const FlowState& state) {
      theta_min = std::min(theta_min, dichotomy_theta_min(state, u_bar, flow_cfg));
    };
  }

  const FlowReport report = run(flow_cfg, geom, observer);

  fs::create_directories(cfg.out);
  {
    std::ofstream csv(fs::path(cfg.out) / "series.csv", std::ios::binary);
    write_series_csv(csv, report, cfg.snapshot_every);
  }
  save_field((fs::path(cfg.out) / "u_hat.qf1").string(), report.final_u_hat, "u_hat");

  const double c = constant_c(geom, cfg.k, cfg.l);
  const bool j_armed = flow_cfg.psi.values.minCoeff() >= c * (1.0 - 1e-12);
  bool j_ok = true;
  for (size_t i = 1; i < report.series.size(); ++i)
    if (report.series[i].J_l > report.series[i - 1].J_l + 1e-8) j_ok = false;

  const bool mp_ok = report.max_principle_violations == 0;
  const SeriesRecord& last = report.series.back();

  std::ofstream summary(fs::path(cfg.out) / "summary.txt");
  summary << "status = " << to_string(report.status) << "\n"
          << "n = " << cfg.n << "\n"
          << "N = " << cfg.N << "\n"
          << "toy = " << (geom->toy() ? 1 : 0) << "\n"
          << "k = " << cfg.k << "\n"
          << "l = " << cfg.l << "\n"
          << "steps = " << report.series.size() - 1 << "\n"
          << "t_final = " << fmt(report.final_t) << "\n"
          << "c = " << fmt(c) << "\n"
          << "b = " << fmt(report.final_b) << "\n"
          << "decay_rate = " << fmt(report.decay_rate) << "\n"
          << "residual_inf = " << fmt(last.residual_inf) << "\n"
          << "osc_u_hat = " << fmt(oscillation(report.final_u_hat)) << "\n"
          << "osc_u_max = " << fmt(report.osc_u_max) << "\n"
          << "max_principle = " << (mp_ok ? "ok" : "violated") << "\n"
          << "j_monotone = " << (!j_armed ? "not-armed" : j_ok ? "ok" : "violated") << "\n"
          << "cone_retries = " << report.cone_retries << "\n";
  if (cfg.u_bar) summary << "theta_min = " << fmt(theta_min) << "\n";
  if (!report.status_detail.empty())
    summary << "detail = " << report.status_detail << "\n";

  std::cout << "status " << to_string(report.status) << ", steps "
            << report.series.size() - 1 << ", t " << report.final_t << ", b "
            << report.final_b << ", residual " << last.residual_inf << "\n";
  if (report.status != FlowStatus::converged) {
    std::cerr << "flow did not converge: " << to_string(report.status);
    if (!report.status_detail.empty()) std::cerr << " (" << report.status_detail << ")";
    std::cerr << "\n";
    return 1;
  }
  if (!mp_ok) {
    std::cerr << "maximum-principle monitor violated ("
              << report.max_principle_violations << " steps, worst "
              << report.max_principle_worst << ")\n";
    return 1;
  }
  if (j_armed && !j_ok) {
    std::cerr << "J_l monotonicity violated on a psi >= c run\n";
    return 1;
  }
  return 0;
}

int cmd_check_sub(const RunConfig& cfg) {
  if (!cfg.u_bar && cfg.l >= 1)
    throw ConfigError("check-sub: l >= 1 requires a configured u_bar");
  const GeomPtr geom = build_geometry(cfg);
  const ScalarField psi = build_psi(cfg, geom);
  const ScalarField u_bar =
      cfg.u_bar ? build_u_bar(cfg, geom) : ScalarField::zeros(geom);

  const SubsolutionReport rep = check_subsolution(u_bar, cfg.k, cfg.l, psi);
  std::cout << "{\n"
            << "  \"min_margin\": " << fmt(rep.min_margin) << ",\n"
            << "  \"lambda_gap\": " << fmt(rep.lambda_gap) << ",\n"
            << "  \"theta_min\": "
            << (std::isnan(rep.theta_min) ? "null" : fmt(rep.theta_min)) << ",\n"
            << "  \"failure_count\": " << rep.failure_count << ",\n"
            << "  \"points\": " << rep.pointwise_ok.size() << ",\n"
            << "  \"ok\": " << (rep.ok() && rep.min_margin > 0.0 ? "true" : "false")
            << "\n}\n";
  return rep.ok() && rep.min_margin > 0.0 ? 0 : 1;
}

const char* method_name(OracleMethod m) {
  switch (m) {
    case OracleMethod::subset_enum: return "subset_enum";
    case OracleMethod::mixed_determinant: return "mixed_determinant";
    case OracleMethod::path_integral: return "path_integral";
    case OracleMethod::finite_difference: return "finite_difference";
  }
  return "?";
}

int cmd_selftest(const SelftestOptions& options) {
  const std::vector<CheckOutcome> outcomes = run_selftest(options);
  for (const CheckOutcome& c : outcomes) {
    std::printf("%-30s max dev %.3e  bound %.3e  [%s]  (%.2fs)%s%s\n", c.name.c_str(),
                c.max_deviation, c.bound, c.pass ? "ok" : "FAIL", c.seconds,
                c.oracle ? "  oracle=" : "",
                c.oracle ? method_name(c.oracle->method) : "");
  }
  return all_passed(outcomes) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parabolic Hessian-quotient flow simulator on flat Kahler tori"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  bool toy_override = false;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "config file path");
    if (config_required) opt->required();
    sub->add_option("--out", out_override, "output directory override");
    sub->add_option("--seed", seed_override, "seed override")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_flag("--toy", toy_override, "force toy mode");
  };

  CLI::App* flow_cmd = app.add_subcommand("flow", "integrate the flow and write artifacts");
  add_common(flow_cmd, true);

  CLI::App* sub_cmd = app.add_subcommand("check-sub", "verify the configured subsolution");
  add_common(sub_cmd, true);

  CLI::App* self_cmd = app.add_subcommand("selftest", "run the oracle battery");
  add_common(self_cmd, false);
  SelftestOptions self_opts;
  self_cmd->add_option("--n-max", self_opts.n_max, "largest tuple length (<= 6)");
  self_cmd->add_option("--samples", self_opts.sym_samples, "samples for the S_k suite");
  self_cmd->add_flag("--inject-fault", self_opts.inject_fault,
                     "perturb the fast path to prove the battery detects tampering");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config(config_path);
    if (toy_override) apply_toy_override(cfg);
    if (!out_override.empty()) cfg.out = out_override;
    if (seed_given) cfg.seed = seed_override;

    if (flow_cmd->parsed()) return cmd_flow(cfg);
    if (sub_cmd->parsed()) return cmd_check_sub(cfg);
    self_opts.seed = seed_given ? seed_override : (config_path.empty() ? 42 : cfg.seed);
    return cmd_selftest(self_opts);
  } catch (const ConfigError& e) {
    std::cerr << (config_path.empty() ? "config" : config_path) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
