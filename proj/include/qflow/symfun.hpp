#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <stdexcept>

#include "qflow/errors.hpp"

// Elementary symmetric polynomials S_k on eigenvalue tuples and the
// quotient operator F = log(S_k/S_l) with its first and mixed second
// derivatives in the eigenframe.  All functions are pure; eigenvalue
// tuples have length n with 2 <= n <= 6.
//
// Conventions: S_0 = 1 (empty product), S_k = 0 for k > n, and the
// excluded-index polynomials satisfy S_{-1;I} = S_{-2;I} = 0.

namespace qflow {

using EigenTuple = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;

namespace detail {

inline void check_tuple_size(Eigen::Index n) {
  if (n < 2 || n > 6)
    throw std::domain_error("eigenvalue tuple length must be in [2,6], got " +
                            std::to_string(n));
}

// One-pass recurrence over the degree-truncated product prod(1 + lambda_i x):
// no subtractive cancellation for mixed-sign input.
template <class Derived>
EigenTuple sym_prefix(const Eigen::MatrixBase<Derived>& lambda, int k) {
  const Eigen::Index n = lambda.size();
  EigenTuple e = EigenTuple::Zero(k + 1);
  e[0] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = lambda[i];
    const int top = static_cast<int>(std::min<Eigen::Index>(k, i + 1));
    for (int j = top; j >= 1; --j) e[j] += li * e[j - 1];
  }
  return e;  // e[j] = S_j(lambda), j = 0..k
}

// Strict-positivity tolerance for cone membership of floating data,
// scaled with the degree so boundary decisions do not flap.
inline double cone_eps(const double lam_inf, int j) {
  return 1e-12 * std::pow(1.0 + lam_inf, j);
}

}  // namespace detail

/// S_k(lambda), the k-th elementary symmetric polynomial.  S_0 = 1.
template <class Derived>
double elementary_sym(const Eigen::MatrixBase<Derived>& lambda, int k) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (k < 0 || k > n)
    throw std::domain_error("elementary_sym: level k = " + std::to_string(k) +
                            " outside [0, n]");
  return detail::sym_prefix(lambda, k)[k];
}

/// S_{k;i_1...i_s}(lambda): S_k with the excluded entries set to zero.
/// Indices are 0-based and must be distinct.  Returns 0 for k = -1, -2
/// and for k beyond the tuple length; returns 1 for k = 0.
template <class Derived>
double elementary_sym_excl(const Eigen::MatrixBase<Derived>& lambda, int k,
                           std::span<const int> excluded) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (k < -2)
    throw std::domain_error("elementary_sym_excl: level k = " +
                            std::to_string(k) + " below -2");
  if (k == -1 || k == -2) return 0.0;
  if (k == 0) return 1.0;
  if (k > n) return 0.0;

  bool seen[6] = {};
  for (int idx : excluded) {
    if (idx < 0 || idx >= n)
      throw std::domain_error("elementary_sym_excl: index " +
                              std::to_string(idx) + " out of range");
    if (seen[idx])
      throw std::domain_error("elementary_sym_excl: duplicate index " +
                              std::to_string(idx));
    seen[idx] = true;
  }

  EigenTuple masked = lambda;
  for (int idx : excluded) masked[idx] = 0.0;
  return detail::sym_prefix(masked, k)[k];
}

template <class Derived>
double elementary_sym_excl(const Eigen::MatrixBase<Derived>& lambda, int k,
                           std::initializer_list<int> excluded) {
  return elementary_sym_excl(lambda, k,
                             std::span<const int>(excluded.begin(), excluded.size()));
}

/// Membership in the Garding cone Gamma^k = {S_j > 0, j = 1..k}, with the
/// scaled strict-positivity tolerance.
template <class Derived>
bool in_gamma_k(const Eigen::MatrixBase<Derived>& lambda, int k) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (k < 1 || k > n)
    throw std::domain_error("in_gamma_k: level k = " + std::to_string(k) +
                            " outside [1, n]");
  const EigenTuple e = detail::sym_prefix(lambda, k);
  const double linf = lambda.cwiseAbs().maxCoeff();
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > detail::cone_eps(linf, j))) return false;
  return true;
}

/// Signed distance proxy to the cone boundary: min_j (S_j - eps_j) over
/// j = 1..k.  Positive iff in_gamma_k; units mix across degrees, only
/// the sign and rough scale are meaningful.
template <class Derived>
double gamma_k_margin(const Eigen::MatrixBase<Derived>& lambda, int k) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (k < 1 || k > n) throw std::domain_error("gamma_k_margin: bad level");
  const EigenTuple e = detail::sym_prefix(lambda, k);
  const double linf = lambda.cwiseAbs().maxCoeff();
  double m = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= k; ++j) m = std::min(m, e[j] - detail::cone_eps(linf, j));
  return m;
}

namespace detail {

// Throws ConeViolation carrying the first failing level.
template <class Derived>
EigenTuple require_gamma_k(const Eigen::MatrixBase<Derived>& lambda, int k) {
  const EigenTuple e = sym_prefix(lambda, k);
  const double linf = lambda.cwiseAbs().maxCoeff();
  for (int j = 1; j <= k; ++j)
    if (!(e[j] > cone_eps(linf, j))) throw ConeViolation(j, e[j]);
  return e;
}

}  // namespace detail

/// F(lambda) = log S_k - log S_l for lambda in Gamma^k, k > l >= 0.
template <class Derived>
double F_value(const Eigen::MatrixBase<Derived>& lambda, int k, int l) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("F_value: need 0 <= l < k <= n");
  const EigenTuple e = detail::require_gamma_k(lambda, k);
  return std::log(e[k]) - std::log(e[l]);
}

/// Diagonal of the linearization in the eigenframe:
/// F^{ii} = S_{k-1;i}/S_k - S_{l-1;i}/S_l.  Strictly positive on Gamma^k.
template <class Derived>
EigenTuple F_gradient_diag(const Eigen::MatrixBase<Derived>& lambda, int k,
                           int l) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("F_gradient_diag: need 0 <= l < k <= n");
  const EigenTuple e = detail::require_gamma_k(lambda, k);
  EigenTuple g(n);
  for (int i = 0; i < n; ++i) {
    const int idx[1] = {i};
    const double num_k = elementary_sym_excl(lambda, k - 1, std::span<const int>(idx, 1));
    const double num_l = elementary_sym_excl(lambda, l - 1, std::span<const int>(idx, 1));
    g[i] = num_k / e[k] - num_l / e[l];
  }
  return g;
}

/// Sum of the diagonal linearization entries, via the identity
/// sum_i S_{k-1;i} = (n-k+1) S_{k-1}.  Used by the time-step bound.
template <class Derived>
double F_gradient_sum(const Eigen::MatrixBase<Derived>& lambda, int k, int l) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("F_gradient_sum: need 0 <= l < k <= n");
  const EigenTuple e = detail::require_gamma_k(lambda, k);
  const double nk = static_cast<double>(n - k + 1) * e[k - 1] / e[k];
  const double nl = l >= 1 ? static_cast<double>(n - l + 1) * e[l - 1] / e[l] : 0.0;
  return nk - nl;
}

/// Off-diagonal curvature coefficient of F in the eigenframe:
/// S_{k-2;ij}/S_k - S_{l-2;ij}/S_l for i != j (0-based indices).
template <class Derived>
double F_pair_coefficient(const Eigen::MatrixBase<Derived>& lambda, int k,
                          int l, int i, int j) {
  const Eigen::Index n = lambda.size();
  detail::check_tuple_size(n);
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("F_pair_coefficient: need 0 <= l < k <= n");
  if (i == j) throw std::domain_error("F_pair_coefficient: indices must differ");
  const EigenTuple e = detail::require_gamma_k(lambda, k);
  const int idx[2] = {i, j};
  const std::span<const int> pair(idx, 2);
  const double num_k = elementary_sym_excl(lambda, k - 2, pair);
  const double num_l = elementary_sym_excl(lambda, l - 2, pair);
  return num_k / e[k] - num_l / e[l];
}

}  // namespace qflow
