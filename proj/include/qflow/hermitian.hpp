#pragma once

#include <Eigen/Core>
#include <complex>

#include "qflow/symfun.hpp"

// Pointwise Hermitian linear algebra: generalized eigenvalues of a (1,1)
// form against the metric, and wedge-product densities read off the
// eigenvalues.  Matrices are small (n <= 6) and stack-allocated.

namespace qflow {

using HermMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

struct EigenSystem {
  EigenTuple values;   // descending
  HermMatrix vectors;  // unitary, columns matched to values
};

/// Hermitian symmetry check, relative tolerance against the Frobenius norm.
bool is_hermitian(const HermMatrix& a, double rel_tol = 1e-13);

/// Eigenvalues of a Hermitian matrix, sorted descending.  n = 2 uses the
/// trace/determinant closed form; n >= 3 runs cyclic Jacobi rotations to
/// off-diagonal norm <= 1e-13 * |A|_F.
EigenTuple hermitian_eigenvalues(const HermMatrix& a);

/// Eigenvalues plus the accumulated unitary (cyclic Jacobi for every n).
EigenSystem hermitian_eigensystem(const HermMatrix& a);

/// Generalized eigenvalues of the pencil (X, g), g positive definite,
/// via the Cholesky reduction L^{-1} X L^{-*}.  Sorted descending.
EigenTuple eigen_wrt_metric(const HermMatrix& x, const HermMatrix& g);

/// log(S_k/S_l) of the eigenvalues of (X, g); throws ConeViolation when
/// they leave Gamma^k.
double quotient_log(const HermMatrix& x, const HermMatrix& g, int k, int l);

/// Pointwise density of X^k wedge omega^{n-k} against omega^n:
/// S_k(lambda(X,g)) / C(n,k).  Defined for every Hermitian X.
double wedge_ratio(const HermMatrix& x, const HermMatrix& g, int k);

/// Binomial coefficient as a double, n <= 6.
double binom(int n, int k);

}  // namespace qflow
