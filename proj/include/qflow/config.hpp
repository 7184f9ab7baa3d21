#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qflow/field.hpp"
#include "qflow/flow.hpp"

// Run configuration: a flat "key = value" text format with repeatable
// mode rows for the trigonometric coefficient tables.  Unknown keys and
// duplicated scalar keys are hard errors; every cross-field invariant is
// checked before any grid is allocated.
//
//   n = 2
//   N = 16
//   k = 2
//   l = 1
//   a = 2.0
//   toy = 1
//   psi = constant 2.0          # constant | shift <d> | manufactured | modes <base>
//   rho = cos 1 0 0 0 0.05      # [cos|sin] f_{x1} f_{y1} ... amplitude
//   u_star = sin 1 1 0 0 0.025
//   u_bar = zero

namespace qflow {

enum class PsiKind { constant, shift, manufactured, modes };

struct PsiSpec {
  PsiKind kind = PsiKind::constant;
  double parameter = 1.0;  // value, shift, or base depending on kind
};

struct RunConfig {
  int n = 2;
  int N = 16;
  int k = 2;
  int l = 0;
  double a = 1.0;
  bool toy = false;

  double cfl = 0.2;
  double stop_osc = 1e-8;
  double t_max = 100.0;
  long max_steps = 1000000;
  int snapshot_every = 1;
  std::uint64_t seed = 0;
  std::string out = ".";

  PsiSpec psi;
  TrigPoly psi_table;  // additive modes when psi.kind == modes
  TrigPoly rho;
  TrigPoly u_star;
  std::optional<TrigPoly> u_bar;  // engaged iff configured; empty poly = zero
};

/// Parses and fully validates a config file; every violation is reported
/// with its line number.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "config");

/// Geometry with chi = a*omega + ddbar(rho), validated in Gamma^k.
GeomPtr build_geometry(const RunConfig& config);

/// The psi field on the grid, validated positive.  For the manufactured
/// kind, psi is the pointwise density quotient of chi + ddbar(u_star)
/// with the analytic Hessian of u_star, so u_star solves the elliptic
/// problem with b = 0 up to discretization error.
ScalarField build_psi(const RunConfig& config, const GeomPtr& geom);

ScalarField build_u_bar(const RunConfig& config, const GeomPtr& geom);

FlowConfig build_flow_config(const RunConfig& config, const GeomPtr& geom);

}  // namespace qflow
