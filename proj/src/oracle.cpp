#include "qflow/oracle.hpp"

#include <bit>
#include <cmath>

#include "qflow/errors.hpp"
#include "qflow/symfun.hpp"

namespace qflow {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// det of the matrix whose row r is taken from source[r] (0 = A, 1 = B,
// 2 = I), summed over all permutations.
double source_det(const HermMatrix& a, const HermMatrix& b, const int* source, int n) {
  static const int perms3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                   {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  static const int signs3[6] = {1, -1, -1, 1, 1, -1};
  static const int perms2[2][2] = {{0, 1}, {1, 0}};
  static const int signs2[2] = {1, -1};

  auto entry = [&](int r, int c) -> std::complex<double> {
    switch (source[r]) {
      case 0: return a(r, c);
      case 1: return b(r, c);
      default: return r == c ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, 0.0);
    }
  };

  std::complex<double> det = 0.0;
  if (n == 2) {
    for (int p = 0; p < 2; ++p) {
      std::complex<double> prod = 1.0;
      for (int r = 0; r < 2; ++r) prod *= entry(r, perms2[p][r]);
      det += static_cast<double>(signs2[p]) * prod;
    }
  } else {
    for (int p = 0; p < 6; ++p) {
      std::complex<double> prod = 1.0;
      for (int r = 0; r < 3; ++r) prod *= entry(r, perms3[p][r]);
      det += static_cast<double>(signs3[p]) * prod;
    }
  }
  return det.real();
}

}  // namespace

double sym_enum(const EigenTuple& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (n < 1 || n > 8) throw std::domain_error("sym_enum: n must be in [1, 8]");
  if (k < 0 || k > n) throw std::domain_error("sym_enum: level outside [0, n]");
  if (k == 0) return 1.0;
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    double prod = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= lambda[i];
    total += prod;
  }
  return total;
}

double mixed_determinant(const HermMatrix& a, const HermMatrix& b, int i, int j) {
  const int n = static_cast<int>(a.rows());
  if (n < 2 || n > 3) throw std::domain_error("mixed_determinant: n must be 2 or 3");
  if (i < 0 || j < 0 || i + j > n)
    throw std::domain_error("mixed_determinant: need i, j >= 0, i + j <= n");

  // Coefficient of x^i y^j z^{n-i-j} in det(xA + yB + zI), normalized by
  // i! j! (n-i-j)! / n!.
  int source[3] = {2, 2, 2};
  double coeff = 0.0;
  int counts[3];
  const int total = static_cast<int>(std::pow(3, n) + 0.5);
  for (int code = 0; code < total; ++code) {
    int c = code;
    counts[0] = counts[1] = counts[2] = 0;
    for (int r = 0; r < n; ++r) {
      source[r] = c % 3;
      ++counts[source[r]];
      c /= 3;
    }
    if (counts[0] != i || counts[1] != j) continue;
    coeff += source_det(a, b, source, n);
  }
  return coeff * factorial(i) * factorial(j) * factorial(n - i - j) / factorial(n);
}

double minor_density(const HermMatrix& a, int l) {
  const int n = static_cast<int>(a.rows());
  if (n < 2 || n > 3) throw std::domain_error("minor_density: n must be 2 or 3");
  if (l < 0 || l > n) throw std::domain_error("minor_density: level outside [0, n]");
  if (l == 0) return 1.0;

  // Sum of principal l x l minors over C(n, l).
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != l) continue;
    int rows[3], m = 0;
    for (int r = 0; r < n; ++r)
      if (mask & (1u << r)) rows[m++] = r;
    if (l == 1) {
      sum += a(rows[0], rows[0]).real();
    } else if (l == 2) {
      sum += (a(rows[0], rows[0]) * a(rows[1], rows[1]) -
              a(rows[0], rows[1]) * a(rows[1], rows[0]))
                 .real();
    } else {
      std::complex<double> det = 0.0;
      static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      static const int signs[6] = {1, -1, -1, 1, 1, -1};
      for (int p = 0; p < 6; ++p) {
        std::complex<double> prod = 1.0;
        for (int r = 0; r < 3; ++r) prod *= a(rows[r], rows[perms[p][r]]);
        det += static_cast<double>(signs[p]) * prod;
      }
      sum += det.real();
    }
  }
  double cnl = 1.0;
  for (int q = 1; q <= l; ++q) cnl = cnl * (n - l + q) / q;
  return sum / cnl;
}

double fd_check_gradient(const EigenTuple& lambda, int k, int l, double step) {
  if (!(step > 0.0)) throw std::domain_error("fd_check_gradient: step must be positive");
  const int n = static_cast<int>(lambda.size());
  const EigenTuple grad = F_gradient_diag(lambda, k, l);

  auto probe = [&](double h) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      EigenTuple up = lambda, dn = lambda;
      up[i] += h;
      dn[i] -= h;
      const double fd = (F_value(up, k, l) - F_value(dn, k, l)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - grad[i]));
    }
    return worst;
  };

  try {
    return probe(step);
  } catch (const ConeViolation&) {
    return probe(step / 10.0);  // one retry closer to the point
  }
}

double path_integral_J(const ScalarField& u, int l, int nodes) {
  if (nodes < 3 || nodes % 2 == 0)
    throw std::domain_error("path_integral_J: nodes must be odd and >= 3");
  const GeomPtr& geom = u.geom;
  const int n = geom->n();
  if (l < 0 || l > n) throw std::domain_error("path_integral_J: level outside [0, n]");

  const FormField hess = complex_hessian(u);
  const Eigen::Index npts = geom->num_points();

  auto integrand = [&](double s) {
    ScalarField dens = ScalarField::zeros(geom);
    for (Eigen::Index p = 0; p < npts; ++p) {
      HermMatrix m = geom->chi_at(p) + s * hess.matrix(p);
      dens.values[p] = minor_density(m, l);
    }
    return integrate(u, dens);
  };

  // Composite Simpson on [0, 1].
  const int intervals = nodes - 1;
  const double hs = 1.0 / intervals;
  double total = integrand(0.0) + integrand(1.0);
  for (int q = 1; q < intervals; ++q)
    total += (q % 2 == 1 ? 4.0 : 2.0) * integrand(q * hs);
  return total * hs / 3.0;
}

}  // namespace qflow
