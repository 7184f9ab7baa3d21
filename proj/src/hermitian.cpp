#include "qflow/hermitian.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "qflow/errors.hpp"

namespace qflow {

namespace {

using Complex = std::complex<double>;

void check_square(const HermMatrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 2 || a.rows() > 6)
    throw std::domain_error(std::string(who) + ": need a square matrix with n in [2,6]");
}

double off_diagonal_sq(const HermMatrix& a) {
  double s = 0.0;
  for (Eigen::Index p = 0; p < a.rows(); ++p)
    for (Eigen::Index q = 0; q < a.cols(); ++q)
      if (p != q) s += std::norm(a(p, q));
  return s;
}

void sort_descending(EigenTuple& values, HermMatrix* vectors) {
  const Eigen::Index n = values.size();
  std::array<int, 6> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int i, int j) { return values[i] > values[j]; });
  EigenTuple sorted(n);
  HermMatrix v;
  if (vectors) v.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted[i] = values[order[i]];
    if (vectors) v.col(i) = vectors->col(order[i]);
  }
  values = sorted;
  if (vectors) *vectors = v;
}

// Cyclic Jacobi on a Hermitian matrix.  Each pivot is phase-rotated to a
// real symmetric 2x2 block and annihilated with the classic zeroing
// rotation; A stays Hermitian, off-diagonal mass drops monotonically.
void jacobi_inplace(HermMatrix& a, HermMatrix* vectors) {
  const Eigen::Index n = a.rows();
  if (vectors) *vectors = HermMatrix::Identity(n, n);
  const double target = 1e-13 * a.norm();
  const double target_sq = target * target;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_sq(a) <= target_sq) return;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const Complex phase = apq / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        // U = I except U(p,p)=c, U(p,q)=s, U(q,p)=-s*conj(phase),
        // U(q,q)=c*conj(phase); apply A <- U^H A U.
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Complex arp = a(r, p);
          const Complex arq = a(r, q);
          a(r, p) = c * arp - s * std::conj(phase) * arq;
          a(r, q) = s * arp + c * std::conj(phase) * arq;
          a(p, r) = std::conj(a(r, p));
          a(q, r) = std::conj(a(r, q));
        }
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (vectors) {
          for (Eigen::Index r = 0; r < n; ++r) {
            const Complex vrp = (*vectors)(r, p);
            const Complex vrq = (*vectors)(r, q);
            (*vectors)(r, p) = c * vrp - s * std::conj(phase) * vrq;
            (*vectors)(r, q) = s * vrp + c * std::conj(phase) * vrq;
          }
        }
      }
    }
  }
  throw std::runtime_error("jacobi: no convergence within sweep budget");
}

}  // namespace

bool is_hermitian(const HermMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(a(i, i).imag()) > rel_tol * scale) return false;
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > rel_tol * scale) return false;
  }
  return true;
}

EigenTuple hermitian_eigenvalues(const HermMatrix& a) {
  check_square(a, "hermitian_eigenvalues");
  const Eigen::Index n = a.rows();
  if (n == 2) {
    const double tr = a(0, 0).real() + a(1, 1).real();
    const double det = a(0, 0).real() * a(1, 1).real() - std::norm(a(0, 1));
    const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
    EigenTuple lam(2);
    lam[0] = 0.5 * tr + disc;
    lam[1] = 0.5 * tr - disc;
    return lam;
  }
  HermMatrix work = a;
  jacobi_inplace(work, nullptr);
  EigenTuple lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = work(i, i).real();
  sort_descending(lam, nullptr);
  return lam;
}

EigenSystem hermitian_eigensystem(const HermMatrix& a) {
  check_square(a, "hermitian_eigensystem");
  HermMatrix work = a;
  EigenSystem sys;
  jacobi_inplace(work, &sys.vectors);
  const Eigen::Index n = a.rows();
  sys.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) sys.values[i] = work(i, i).real();
  sort_descending(sys.values, &sys.vectors);
  return sys;
}

EigenTuple eigen_wrt_metric(const HermMatrix& x, const HermMatrix& g) {
  check_square(x, "eigen_wrt_metric");
  if (g.rows() != x.rows() || g.cols() != x.cols())
    throw std::domain_error("eigen_wrt_metric: size mismatch");
  if (!is_hermitian(g, 1e-12)) throw MetricError("metric is not Hermitian");

  if (g.isIdentity(1e-15)) return hermitian_eigenvalues(x);

  Eigen::LLT<Eigen::MatrixXcd> llt{Eigen::MatrixXcd(g)};
  if (llt.info() != Eigen::Success)
    throw MetricError("metric is not positive definite");
  const Eigen::MatrixXcd l = llt.matrixL();
  // A = L^{-1} X L^{-*}, Hermitian; symmetrize away the roundoff.
  Eigen::MatrixXcd y = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd(x));
  Eigen::MatrixXcd reduced =
      l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd(y.adjoint()));
  HermMatrix sym = 0.5 * (reduced + reduced.adjoint());
  return hermitian_eigenvalues(sym);
}

double quotient_log(const HermMatrix& x, const HermMatrix& g, int k, int l) {
  return F_value(eigen_wrt_metric(x, g), k, l);
}

double wedge_ratio(const HermMatrix& x, const HermMatrix& g, int k) {
  const int n = static_cast<int>(x.rows());
  if (k == 0) return 1.0;
  const EigenTuple lam = eigen_wrt_metric(x, g);
  return elementary_sym(lam, k) / binom(n, k);
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace qflow
