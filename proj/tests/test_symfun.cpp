#include <doctest.h>

#include <random>

#include "qflow/errors.hpp"
#include "qflow/oracle.hpp"
#include "qflow/symfun.hpp"

using namespace qflow;

namespace {

EigenTuple tuple(std::initializer_list<double> v) {
  EigenTuple t(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) t[i++] = x;
  return t;
}

EigenTuple random_tuple(std::mt19937_64& rng, int n, double lo = -5.0, double hi = 5.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  EigenTuple t(n);
  for (int i = 0; i < n; ++i) t[i] = dist(rng);
  return t;
}

// Positive-scale majorant: both evaluation routes carry these magnitudes,
// so deviations are measured against S_k(|lambda|) rather than S_k itself
// (which can cancel to zero for mixed signs).
double scale(const EigenTuple& lam, int k) {
  return std::max(1.0, sym_enum(lam.cwiseAbs(), k));
}

}  // namespace

TEST_CASE("elementary_sym basic values") {
  CHECK(elementary_sym(tuple({1, 1, 1}), 2) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(elementary_sym(tuple({1, 2, 3}), 2) == doctest::Approx(11.0).epsilon(1e-14));
  CHECK(elementary_sym(tuple({1, 2, 3}), 0) == 1.0);
  CHECK(elementary_sym(tuple({1, 2, 3}), 3) == doctest::Approx(6.0));
}

TEST_CASE("elementary_sym domain errors") {
  CHECK_THROWS_AS(elementary_sym(tuple({1, 2, 3}), 4), std::domain_error);
  CHECK_THROWS_AS(elementary_sym(tuple({1, 2, 3}), -1), std::domain_error);
  CHECK_THROWS_AS(elementary_sym(tuple({1}), 1), std::domain_error);       // n too small
  CHECK_THROWS_AS(elementary_sym(EigenTuple::Ones(7), 1), std::domain_error);  // n too large
}

TEST_CASE("elementary_sym_excl values and conventions") {
  CHECK(elementary_sym_excl(tuple({1, 2, 3}), 1, {0}) == doctest::Approx(5.0));
  CHECK(elementary_sym_excl(tuple({1, 2, 3}), -1, {1}) == 0.0);
  CHECK(elementary_sym_excl(tuple({1, 2, 3}), -2, {1}) == 0.0);
  CHECK(elementary_sym_excl(tuple({4, 5}), 0, {0}) == 1.0);
  // zeroed entries drop every subset that touches them
  CHECK(elementary_sym_excl(tuple({1, 2, 3}), 2, {0, 2}) == 0.0);
  CHECK(elementary_sym_excl(tuple({1, 2, 3}), 3, {0}) == 0.0);
}

TEST_CASE("elementary_sym_excl index validation") {
  CHECK_THROWS_AS(elementary_sym_excl(tuple({1, 2, 3}), 1, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(elementary_sym_excl(tuple({1, 2, 3}), 1, {3}), std::domain_error);
  CHECK_THROWS_AS(elementary_sym_excl(tuple({1, 2, 3}), 1, {-1}), std::domain_error);
  CHECK_THROWS_AS(elementary_sym_excl(tuple({1, 2, 3}), -3, {0}), std::domain_error);
}

TEST_CASE("in_gamma_k membership") {
  CHECK(in_gamma_k(tuple({1, 1, 1}), 3));
  CHECK(in_gamma_k(tuple({-1, 2, 3}), 2));   // S1 = 4, S2 = 1
  CHECK(!in_gamma_k(tuple({-1, 2, 3}), 3));  // S3 = -6
  CHECK(!in_gamma_k(tuple({0, 0}), 1));      // boundary is excluded
  CHECK_THROWS_AS(in_gamma_k(tuple({1, 1}), 0), std::domain_error);
}

TEST_CASE("F_value quotient logs") {
  CHECK(F_value(tuple({1, 1, 1}), 2, 1) == doctest::Approx(0.0));
  CHECK(F_value(tuple({2, 2}), 2, 1) == doctest::Approx(0.0));
  CHECK(F_value(tuple({1, 2, 3}), 3, 0) == doctest::Approx(std::log(6.0)));
}

TEST_CASE("F_value cone violation carries the failing level") {
  try {
    F_value(tuple({-1, 2, 3}), 3, 0);
    FAIL("expected ConeViolation");
  } catch (const ConeViolation& cv) {
    CHECK(cv.level() == 3);
    CHECK(cv.value() == doctest::Approx(-6.0));
  }
}

TEST_CASE("F_gradient_diag values") {
  const EigenTuple g = F_gradient_diag(tuple({1, 1, 1}), 2, 1);
  for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(1.0 / 3.0));
  const EigenTuple g2 = F_gradient_diag(tuple({1, 1}), 2, 0);
  CHECK(g2[0] == doctest::Approx(1.0));
  CHECK(g2[1] == doctest::Approx(1.0));
}

TEST_CASE("F_pair_coefficient values") {
  CHECK(F_pair_coefficient(tuple({1, 1, 1}), 2, 1, 0, 1) == doctest::Approx(1.0 / 3.0));
  // k = 1, l = 0 hits the S_{-1} = S_{-2} = 0 conventions
  CHECK(F_pair_coefficient(tuple({2, 3}), 1, 0, 0, 1) == 0.0);
  CHECK(F_pair_coefficient(tuple({1, 2, 3}), 3, 1, 1, 2) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(F_pair_coefficient(tuple({1, 1, 1}), 2, 1, 1, 1), std::domain_error);
}

TEST_CASE("oracle equivalence on random tuples") {
  std::mt19937_64 rng(11);
  for (int s = 0; s < 2000; ++s) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const EigenTuple lam = random_tuple(rng, n);
    for (int k = 0; k <= n; ++k) {
      const double dev = std::abs(elementary_sym(lam, k) - sym_enum(lam, k));
      CHECK(dev <= 1e-12 * scale(lam, k));
    }
  }
}

TEST_CASE("exclusion and Euler identities") {
  std::mt19937_64 rng(12);
  for (int s = 0; s < 2000; ++s) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const EigenTuple lam = random_tuple(rng, n);
    for (int k = 1; k <= n; ++k) {
      double euler = 0.0;
      for (int i = 0; i < n; ++i) {
        const int idx[1] = {i};
        const std::span<const int> one(idx, 1);
        const double excl_k = elementary_sym_excl(lam, k, one);
        const double excl_km1 = elementary_sym_excl(lam, k - 1, one);
        CHECK(std::abs(elementary_sym(lam, k) - (excl_k + lam[i] * excl_km1)) <=
              1e-12 * scale(lam, k));
        euler += lam[i] * excl_km1;
      }
      CHECK(std::abs(euler - k * elementary_sym(lam, k)) <= 1e-12 * k * scale(lam, k));
    }
  }
}

TEST_CASE("ellipticity and concavity on cone samples") {
  std::mt19937_64 rng(13);
  auto sample_cone = [&](int n, int k) {
    for (;;) {
      const EigenTuple lam = random_tuple(rng, n);
      if (in_gamma_k(lam, k)) return lam;
    }
  };
  for (int s = 0; s < 1000; ++s) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const int k = 1 + static_cast<int>(rng() % n);
    const int l = static_cast<int>(rng() % k);
    const EigenTuple lam = sample_cone(n, k);
    CHECK(F_gradient_diag(lam, k, l).minCoeff() > 0.0);

    const EigenTuple mu = sample_cone(n, k);
    const EigenTuple mid = 0.5 * (lam + mu);
    CHECK(F_value(mid, k, l) >=
          0.5 * (F_value(lam, k, l) + F_value(mu, k, l)) - 1e-10);
  }
}

TEST_CASE("gradient matches centered differences") {
  CHECK(fd_check_gradient(tuple({1, 1, 1}), 2, 1, 1e-6) <= 1e-6);
  CHECK(fd_check_gradient(tuple({3, 2, 1}), 3, 0, 1e-6) <= 1e-6);
  CHECK_THROWS_AS(fd_check_gradient(tuple({1, 1, 1}), 2, 1, 0.0), std::domain_error);
}

TEST_CASE("cone tolerance scales with magnitude") {
  // S_1 = 1e-13 is under the strict-positivity floor even though positive
  EigenTuple near = tuple({1e-13, -1e-30});
  CHECK(!in_gamma_k(near, 1));
  // a comfortably positive tuple of large magnitude still passes
  CHECK(in_gamma_k(tuple({1e6, 1e6}), 2));
}
