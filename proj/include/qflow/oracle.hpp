#pragma once

#include "qflow/field.hpp"

// Brute-force reference implementations, definitionally independent of
// the fast paths they check: subset enumeration for S_k, Leibniz
// expansion for mixed wedge densities, centered differences for the
// gradient of F, and Simpson path integration for J_l.  Test-suite and
// selftest use only; none of these run in the flow loop.

namespace qflow {

enum class OracleMethod { subset_enum, mixed_determinant, path_integral, finite_difference };

struct OracleResult {
  double value = 0.0;
  OracleMethod method = OracleMethod::subset_enum;
};

/// S_k straight from the defining sum over index subsets (n <= 8).
double sym_enum(const EigenTuple& lambda, int k);

/// Density of A^i wedge B^j wedge omega^{n-i-j} against omega^n by direct
/// Leibniz expansion of det(xA + yB + zI) over row sources (n <= 3).
double mixed_determinant(const HermMatrix& a, const HermMatrix& b, int i, int j);

/// Sum of principal minors of order l over C(n,l): the wedge density of a
/// single Hermitian matrix without any eigenvalue computation (n <= 3).
double minor_density(const HermMatrix& a, int l);

/// Worst absolute deviation between F_gradient_diag and centered
/// differences of F_value.  On a cone exit while probing, the step is
/// reduced once by 10x; a second exit is an error.
double fd_check_gradient(const EigenTuple& lambda, int k, int l, double step);

/// Composite Simpson over s in [0,1] of int u * density(chi_{su}^l wedge
/// omega^{n-l}); nodes must be odd and >= 3.  Densities come from
/// minor_density, independent of the interpolation fast path.
double path_integral_J(const ScalarField& u, int l, int nodes);

}  // namespace qflow
