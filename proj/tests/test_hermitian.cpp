#include <doctest.h>

#include <Eigen/LU>
#include <random>

#include "qflow/errors.hpp"
#include "qflow/hermitian.hpp"
#include "qflow/oracle.hpp"

using namespace qflow;
using Complex = std::complex<double>;

namespace {

HermMatrix random_hermitian(std::mt19937_64& rng, int n, double s = 2.0) {
  std::uniform_real_distribution<double> dist(-s, s);
  HermMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = dist(rng);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = Complex(dist(rng), dist(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

HermMatrix random_posdef(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  HermMatrix l = HermMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    l(i, i) = 1.0 + std::abs(dist(rng));
    for (int j = 0; j < i; ++j) l(i, j) = Complex(dist(rng), dist(rng));
  }
  return l * l.adjoint();
}

}  // namespace

TEST_CASE("eigenvalues of diagonal and closed-form cases") {
  HermMatrix d(2, 2);
  d << 2.0, 0.0, 0.0, 3.0;
  const EigenTuple lam = eigen_wrt_metric(d, HermMatrix::Identity(2, 2));
  CHECK(lam[0] == doctest::Approx(3.0));
  CHECK(lam[1] == doctest::Approx(2.0));

  HermMatrix x(2, 2);
  x << Complex(2, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
  const EigenTuple lx = eigen_wrt_metric(x, HermMatrix::Identity(2, 2));
  CHECK(lx[0] == doctest::Approx(3.0));
  CHECK(lx[1] == doctest::Approx(1.0));
}

TEST_CASE("identity pencil gives all ones") {
  std::mt19937_64 rng(21);
  for (int n : {2, 3, 4}) {
    const HermMatrix g = random_posdef(rng, n);
    const EigenTuple lam = eigen_wrt_metric(g, g);
    for (int i = 0; i < n; ++i) CHECK(lam[i] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("trace and determinant reconstruction") {
  std::mt19937_64 rng(22);
  for (int n : {2, 3, 4}) {
    for (int s = 0; s < 50; ++s) {
      const HermMatrix m = random_hermitian(rng, n);
      const EigenTuple lam = hermitian_eigenvalues(m);
      CHECK(lam.sum() ==
            doctest::Approx(m.trace().real()).epsilon(1e-10).scale(std::max(1.0, m.norm())));
      CHECK(lam.prod() ==
            doctest::Approx(Eigen::MatrixXcd(m).determinant().real())
                .epsilon(1e-10)
                .scale(std::max(1.0, std::pow(m.norm(), n))));
    }
  }
}

TEST_CASE("pencil scaling invariance") {
  std::mt19937_64 rng(23);
  for (int s = 0; s < 30; ++s) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const HermMatrix x = random_hermitian(rng, n);
    const HermMatrix g = random_posdef(rng, n);
    const double c = 0.25 + (rng() % 100) / 25.0;
    const EigenTuple a = eigen_wrt_metric(x, g);
    const EigenTuple b = eigen_wrt_metric(HermMatrix(c * x), g);
    for (int i = 0; i < n; ++i)
      CHECK(b[i] == doctest::Approx(c * a[i]).epsilon(1e-12).scale(std::max(1.0, c * std::abs(a[i]))));
  }
}

TEST_CASE("eigensystem reproduces the matrix") {
  std::mt19937_64 rng(24);
  for (int n : {2, 3, 5, 6}) {
    const HermMatrix m = random_hermitian(rng, n);
    const EigenSystem sys = hermitian_eigensystem(m);
    for (int i = 0; i + 1 < n; ++i) CHECK(sys.values[i] >= sys.values[i + 1]);
    const Eigen::MatrixXcd recon =
        sys.vectors * sys.values.asDiagonal() * sys.vectors.adjoint();
    CHECK((recon - m).norm() <= 1e-11 * std::max(1.0, m.norm()));
    CHECK((sys.vectors.adjoint() * sys.vectors - Eigen::MatrixXcd::Identity(n, n)).norm() <=
          1e-12);
  }
}

TEST_CASE("jacobi agrees with the n = 2 closed form") {
  std::mt19937_64 rng(25);
  for (int s = 0; s < 100; ++s) {
    const HermMatrix m = random_hermitian(rng, 2);
    const EigenTuple closed = hermitian_eigenvalues(m);
    const EigenSystem sys = hermitian_eigensystem(m);
    CHECK(closed[0] == doctest::Approx(sys.values[0]).epsilon(1e-12));
    CHECK(closed[1] == doctest::Approx(sys.values[1]).epsilon(1e-12));
  }
}

TEST_CASE("metric errors") {
  HermMatrix x = HermMatrix::Identity(2, 2);
  HermMatrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;  // indefinite
  CHECK_THROWS_AS(eigen_wrt_metric(x, bad), MetricError);
  HermMatrix nonherm(2, 2);
  nonherm << 1.0, Complex(0, 1), Complex(0, 1), 1.0;
  CHECK_THROWS_AS(eigen_wrt_metric(x, nonherm), MetricError);
}

TEST_CASE("quotient_log composition") {
  const HermMatrix id2 = HermMatrix::Identity(2, 2);
  CHECK(quotient_log(HermMatrix(2.0 * id2), id2, 2, 1) == doctest::Approx(0.0));
  CHECK(quotient_log(id2, id2, 2, 1) == doctest::Approx(std::log(0.5)));
  HermMatrix d3(3, 3);
  d3.setZero();
  d3(0, 0) = 1.0;
  d3(1, 1) = 2.0;
  d3(2, 2) = 3.0;
  CHECK(quotient_log(d3, HermMatrix::Identity(3, 3), 3, 0) == doctest::Approx(std::log(6.0)));
}

TEST_CASE("wedge_ratio diagonal cases") {
  HermMatrix d(2, 2);
  d.setZero();
  d(0, 0) = 3.0;
  d(1, 1) = 5.0;
  const HermMatrix id = HermMatrix::Identity(2, 2);
  CHECK(wedge_ratio(d, id, 2) == doctest::Approx(15.0));
  CHECK(wedge_ratio(d, id, 1) == doctest::Approx(4.0));
  CHECK(wedge_ratio(d, id, 0) == 1.0);
}

TEST_CASE("wedge_ratio against the minor-expansion oracle") {
  std::mt19937_64 rng(26);
  for (int s = 0; s < 200; ++s) {
    const int n = 2 + static_cast<int>(rng() % 2);
    const HermMatrix m = random_hermitian(rng, n);
    const HermMatrix id = HermMatrix::Identity(n, n);
    for (int k = 0; k <= n; ++k) {
      const double fast = wedge_ratio(m, id, k);
      const double ref = minor_density(m, k);
      CHECK(std::abs(fast - ref) <= 1e-10 * std::max({1.0, std::abs(fast), std::abs(ref)}));
    }
  }
}

TEST_CASE("is_hermitian tolerance") {
  HermMatrix m = HermMatrix::Identity(3, 3);
  CHECK(is_hermitian(m));
  m(0, 1) = Complex(0.0, 1e-10);
  CHECK(!is_hermitian(m));  // (1,0) stayed zero
}
