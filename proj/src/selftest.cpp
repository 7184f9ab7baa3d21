#include "qflow/selftest.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "qflow/errors.hpp"
#include "qflow/functionals.hpp"
#include "qflow/oracle.hpp"
#include "qflow/symfun.hpp"

namespace qflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EigenTuple random_tuple(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  EigenTuple lam(n);
  for (int i = 0; i < n; ++i) lam[i] = dist(rng);
  return lam;
}

// Rejection sampling from the box; Gamma^k always contains the positive
// orthant so the acceptance rate stays usable for every (n, k).
EigenTuple random_cone_tuple(std::mt19937_64& rng, int n, int k, double margin = 0.0) {
  for (;;) {
    EigenTuple lam = random_tuple(rng, n, -5.0, 5.0);
    if (!in_gamma_k(lam, k)) continue;
    if (margin > 0.0 && gamma_k_margin(lam, k) < margin) continue;
    return lam;
  }
}

HermMatrix random_hermitian(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  HermMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = dist(rng);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = std::complex<double>(dist(rng), dist(rng));
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

// Positive-scale majorant S_k(|lambda|): "relative" deviations for
// mixed-sign tuples are measured against it, since S_k itself can cancel
// to zero while both computation routes carry the full term magnitudes.
double sym_scale(const EigenTuple& lambda, int k) {
  return std::max(1.0, sym_enum(lambda.cwiseAbs(), k));
}

}  // namespace

std::vector<CheckOutcome> run_selftest(const SelftestOptions& options) {
  if (options.n_max < 2 || options.n_max > 6)
    throw std::domain_error("selftest: n_max must be in [2, 6] (oracle limit)");

  std::vector<CheckOutcome> outcomes;
  const double fault = options.inject_fault ? 1e-6 : 0.0;
  std::mt19937_64 rng(options.seed);

  // --- elementary symmetric polynomials vs subset enumeration ------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"sym_vs_enumeration", 0.0, 1e-12, false, 0.0, {}};
    c.oracle = OracleResult{0.0, OracleMethod::subset_enum};
    std::uniform_int_distribution<int> pick_n(2, options.n_max);
    for (int s = 0; s < options.sym_samples; ++s) {
      const int n = pick_n(rng);
      const EigenTuple lam = random_tuple(rng, n, -5.0, 5.0);
      for (int k = 0; k <= n; ++k) {
        const double fast = elementary_sym(lam, k) * (1.0 + fault);
        const double ref = sym_enum(lam, k);
        const double dev = std::abs(fast - ref) / sym_scale(lam, k);
        if (dev > c.max_deviation) {
          c.max_deviation = dev;
          c.oracle->value = ref;
        }
      }
      // excluded-index variant against enumeration on the masked tuple
      std::uniform_int_distribution<int> pick_i(0, n - 1);
      const int i0 = pick_i(rng);
      int i1 = pick_i(rng);
      if (i1 == i0) i1 = (i0 + 1) % n;
      const int idx[2] = {i0, i1};
      EigenTuple masked = lam;
      masked[i0] = 0.0;
      masked[i1] = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double fast =
            elementary_sym_excl(lam, k, std::span<const int>(idx, 2)) * (1.0 + fault);
        const double ref = sym_enum(masked, k);
        c.max_deviation =
            std::max(c.max_deviation, std::abs(fast - ref) / sym_scale(lam, k));
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- exclusion identity S_k = S_{k;i} + lambda_i S_{k-1;i} -------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"exclusion_identity", 0.0, 1e-12, false, 0.0, {}};
    std::uniform_int_distribution<int> pick_n(2, options.n_max);
    for (int s = 0; s < options.sym_samples; ++s) {
      const int n = pick_n(rng);
      const EigenTuple lam = random_tuple(rng, n, -5.0, 5.0);
      for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < n; ++i) {
          const int idx[1] = {i};
          const std::span<const int> one(idx, 1);
          const double lhs = elementary_sym(lam, k) * (1.0 + fault);
          const double rhs = elementary_sym_excl(lam, k, one) +
                             lam[i] * elementary_sym_excl(lam, k - 1, one);
          c.max_deviation =
              std::max(c.max_deviation, std::abs(lhs - rhs) / sym_scale(lam, k));
        }
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- Euler identity sum_i lambda_i S_{k-1;i} = k S_k --------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"euler_identity", 0.0, 1e-12, false, 0.0, {}};
    std::uniform_int_distribution<int> pick_n(2, options.n_max);
    for (int s = 0; s < options.sym_samples; ++s) {
      const int n = pick_n(rng);
      const EigenTuple lam = random_tuple(rng, n, -5.0, 5.0);
      for (int k = 1; k <= n; ++k) {
        double lhs = 0.0;
        for (int i = 0; i < n; ++i) {
          const int idx[1] = {i};
          lhs += lam[i] * elementary_sym_excl(lam, k - 1, std::span<const int>(idx, 1));
        }
        const double rhs = k * elementary_sym(lam, k) * (1.0 + fault);
        c.max_deviation = std::max(c.max_deviation,
                                   std::abs(lhs - rhs) / (k * sym_scale(lam, k)));
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- ellipticity: F^{ii} > 0 on Gamma^k ---------------------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"ellipticity", 0.0, 0.0, false, 0.0, {}};
    std::uniform_int_distribution<int> pick_n(2, options.n_max);
    double min_entry = std::numeric_limits<double>::infinity();
    for (int s = 0; s < options.cone_samples; ++s) {
      const int n = pick_n(rng);
      std::uniform_int_distribution<int> pick_k(1, n);
      const int k = pick_k(rng);
      std::uniform_int_distribution<int> pick_l(0, k - 1);
      const int l = pick_l(rng);
      const EigenTuple lam = random_cone_tuple(rng, n, k);
      min_entry = std::min(min_entry, F_gradient_diag(lam, k, l).minCoeff());
    }
    c.max_deviation = -min_entry;  // negative iff every entry was positive
    c.pass = min_entry > 0.0;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- concavity of F on Gamma^k ------------------------------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"concavity", 0.0, 1e-10, false, 0.0, {}};
    std::uniform_int_distribution<int> pick_n(2, options.n_max);
    for (int s = 0; s < options.concavity_samples; ++s) {
      const int n = pick_n(rng);
      std::uniform_int_distribution<int> pick_k(1, n);
      const int k = pick_k(rng);
      std::uniform_int_distribution<int> pick_l(0, k - 1);
      const int l = pick_l(rng);
      const EigenTuple lam = random_cone_tuple(rng, n, k);
      const EigenTuple mu = random_cone_tuple(rng, n, k);
      const EigenTuple mid = 0.5 * (lam + mu);
      const double gap =
          0.5 * (F_value(lam, k, l) + F_value(mu, k, l)) - F_value(mid, k, l);
      c.max_deviation = std::max(c.max_deviation, gap + fault);
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- gradient vs centered differences ------------------------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"gradient_fd", 0.0, 1e-6, false, 0.0, {}};
    c.oracle = OracleResult{0.0, OracleMethod::finite_difference};
    const int pairs[5][2] = {{2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
    const double step = 1e-6;
    for (const auto& kl : pairs) {
      const int k = kl[0], l = kl[1];
      const int n = k + 1;
      for (int s = 0; s < options.gradient_samples; ++s) {
        // Interior points: margin well above the probing step, and a cap
        // on the gradient scale so the truncation term of the centered
        // difference stays below the bound (derivatives of log S_k grow
        // without bound towards the cone boundary).
        EigenTuple lam;
        for (;;) {
          lam = random_cone_tuple(rng, n, k, 100.0 * step);
          if (F_gradient_diag(lam, k, l).maxCoeff() <= 50.0) break;
        }
        const double dev = fd_check_gradient(lam, k, l, step) + fault;
        if (dev > c.max_deviation) {
          c.max_deviation = dev;
          c.oracle->value = dev;
        }
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- mixed densities vs Leibniz expansion --------------------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"mixed_density_vs_determinant", 0.0, 1e-10, false, 0.0, {}};
    c.oracle = OracleResult{0.0, OracleMethod::mixed_determinant};
    std::uniform_int_distribution<int> pick_n(2, 3);
    for (int s = 0; s < options.mixed_samples; ++s) {
      const int n = pick_n(rng);
      const HermMatrix a = random_hermitian(rng, n, 2.0);
      const HermMatrix b = random_hermitian(rng, n, 2.0);
      const HermMatrix id = HermMatrix::Identity(n, n);
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; i + j <= n; ++j) {
          const double fast = mixed_density(a, b, id, i, j) * (1.0 + fault);
          const double ref = mixed_determinant(a, b, i, j);
          const double scale = std::max({1.0, std::abs(fast), std::abs(ref)});
          const double dev = std::abs(fast - ref) / scale;
          if (dev > c.max_deviation) {
            c.max_deviation = dev;
            c.oracle->value = ref;
          }
        }
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  // --- J_l closed form vs Simpson path integral ----------------------------
  {
    const auto start = Clock::now();
    CheckOutcome c{"j_path_independence", 0.0, 1e-6, false, 0.0, {}};
    c.oracle = OracleResult{0.0, OracleMethod::path_integral};
    std::uniform_real_distribution<double> amp(-0.05, 0.05);
    std::uniform_int_distribution<int> pick_freq(-2, 2);
    std::uniform_int_distribution<int> pick_trig(0, 1);

    GeomPtr geos[2];
    {
      TorusGeometry::Params p2{2, 16, true, 2.0, TrigPoly{}, 1};
      geos[0] = TorusGeometry::create(p2);
      TorusGeometry::Params p3{3, 16, true, 2.0, TrigPoly{}, 1};
      geos[1] = TorusGeometry::create(p3);
    }
    for (int s = 0; s < options.path_fields; ++s) {
      const int l = s % 3;  // exercises l = 0, 1, 2
      const GeomPtr& geom = l == 2 ? geos[1] : geos[0];
      std::vector<TrigMode> modes;
      for (int m = 0; m < 3; ++m) {
        TrigMode mode;
        mode.is_sin = pick_trig(rng) == 1;
        mode.freq = Eigen::Matrix<int, Eigen::Dynamic, 1, 0, 12, 1>::Zero(2 * geom->n());
        mode.freq[0] = pick_freq(rng);
        mode.freq[1] = pick_freq(rng);
        mode.amp = amp(rng);
        modes.push_back(mode);
      }
      const ScalarField u = ScalarField::sample(geom, TrigPoly(modes));
      const double closed = J_functional(u, l).value * (1.0 + fault);
      const double path = path_integral_J(u, l, 21);
      const double dev = std::abs(closed - path);
      if (dev > c.max_deviation) {
        c.max_deviation = dev;
        c.oracle->value = path;
      }
    }
    c.pass = c.max_deviation <= c.bound;
    c.seconds = seconds_since(start);
    outcomes.push_back(c);
  }

  return outcomes;
}

bool all_passed(const std::vector<CheckOutcome>& outcomes) {
  for (const CheckOutcome& c : outcomes)
    if (!c.pass) return false;
  return true;
}

}  // namespace qflow
