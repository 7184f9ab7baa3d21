#pragma once

#include "qflow/field.hpp"

// The J_l energy, the cohomological constant c, the normalization
// u_hat = u - J_l(u)/int(chi^l wedge omega^{n-l}), and the limit
// constant b of the converged flow.

namespace qflow {

struct FunctionalValue {
  double value = 0.0;
  int l = 0;
  double normalization_volume = 0.0;  // int chi^l wedge omega^{n-l}
};

/// c = int(chi^k wedge omega^{n-k}) / int(chi^l wedge omega^{n-l}).
double constant_c(const GeomPtr& geom, int k, int l);

/// Closed-form line-path evaluation
/// J_l(u) = 1/(l+1) sum_{i=0..l} int u chi_u^i wedge chi^{l-i} wedge omega^{n-l}.
FunctionalValue J_functional(const ScalarField& u, int l);

/// u minus the scalar J_l(u) / int(chi^l wedge omega^{n-l}).
ScalarField normalize(const ScalarField& u, int l);

/// Grid mean of F(chi_uhat) - log Psi for a near-stationary u_hat, with a
/// cross-check against log(int chi^k... / int psi chi^l...).  Throws
/// EstimationError if u_hat is not stationary enough or the two routes
/// disagree beyond 5*osc + h^2.
double estimate_b(const ScalarField& u_hat, const ScalarField& psi, int k, int l);

}  // namespace qflow
