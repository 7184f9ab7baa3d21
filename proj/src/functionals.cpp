#include "qflow/functionals.hpp"

#include <cmath>

#include "qflow/errors.hpp"

namespace qflow {

namespace {

double level_volume(const GeomPtr& geom, int level) {
  const ScalarField ones = ScalarField::constant(geom, 1.0);
  const ScalarField dens{geom, geom->chi_density(level)};
  return integrate(ones, dens);
}

}  // namespace

double constant_c(const GeomPtr& geom, int k, int l) {
  if (!(0 <= l && l < k && k <= geom->n()))
    throw std::domain_error("constant_c: need 0 <= l < k <= n");
  return level_volume(geom, k) / level_volume(geom, l);
}

FunctionalValue J_functional(const ScalarField& u, int l) {
  const GeomPtr& geom = u.geom;
  const int n = geom->n();
  if (l < 0 || l > n) throw std::domain_error("J_functional: level outside [0, n]");

  FunctionalValue out;
  out.l = l;
  out.normalization_volume = level_volume(geom, l);

  if (l == 0) {
    out.value = integrate(u, ScalarField::constant(geom, 1.0));
    return out;
  }

  const FormField x = chi_u(geom, u);
  const HermMatrix id = HermMatrix::Identity(n, n);
  double total = 0.0;
  for (int i = 0; i <= l; ++i) {
    ScalarField dens = ScalarField::zeros(geom);
    if (i == 0) {
      dens.values = geom->chi_density(l);
    } else if (i == l) {
      for (Eigen::Index p = 0; p < geom->num_points(); ++p)
        dens.values[p] = wedge_ratio(x.matrix(p), id, l);
    } else {
      for (Eigen::Index p = 0; p < geom->num_points(); ++p)
        dens.values[p] = mixed_density(x.matrix(p), geom->chi_at(p), id, i, l - i);
    }
    total += integrate(u, dens);
  }
  out.value = total / (l + 1);
  return out;
}

ScalarField normalize(const ScalarField& u, int l) {
  const FunctionalValue j = J_functional(u, l);
  ScalarField out = u;
  out.values -= j.value / j.normalization_volume;
  return out;
}

double estimate_b(const ScalarField& u_hat, const ScalarField& psi, int k, int l) {
  const GeomPtr& geom = u_hat.geom;
  const int n = geom->n();
  if (!geom->same_grid(*psi.geom)) throw std::domain_error("estimate_b: grid mismatch");

  const double log_binom_ratio = std::log(binom(n, k) / binom(n, l));
  const FormField x = chi_u(geom, u_hat);
  const HermMatrix id = HermMatrix::Identity(n, n);

  ScalarField rhs = ScalarField::zeros(geom);
  ScalarField dens_k = ScalarField::zeros(geom);
  ScalarField dens_l = ScalarField::zeros(geom);
  for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
    EigenTuple lam;
    try {
      lam = eigen_wrt_metric(x.matrix(p), id);
      rhs.values[p] =
          F_value(lam, k, l) - log_binom_ratio - std::log(psi.values[p]);
    } catch (const ConeViolation& cv) {
      throw ConeViolation(cv.level(), cv.value(), p);
    }
    const EigenTuple e = detail::sym_prefix(lam, n);
    dens_k.values[p] = e[k] / binom(n, k);
    dens_l.values[p] = e[l] / binom(n, l);
  }

  const double osc = oscillation(rhs);
  if (osc > 1e-4)
    throw EstimationError("estimate_b: state is not stationary (osc(rhs) = " +
                          std::to_string(osc) + ")");

  const double b_mean = grid_mean(rhs);
  const double vol_k = integrate(ScalarField::constant(geom, 1.0), dens_k);
  const double weighted_l = integrate(psi, dens_l);
  const double b_integral = std::log(vol_k / weighted_l);

  const double tol = 5.0 * osc + geom->h() * geom->h();
  if (std::abs(b_mean - b_integral) > tol)
    throw EstimationError("estimate_b: pointwise and integral estimates disagree (" +
                          std::to_string(b_mean) + " vs " +
                          std::to_string(b_integral) + ")");
  return b_mean;
}

}  // namespace qflow
