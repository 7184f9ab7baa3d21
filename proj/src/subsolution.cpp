#include "qflow/subsolution.hpp"

#include <cmath>

#include "qflow/errors.hpp"

namespace qflow {

namespace {

// Inequality margin at one point: k S_{k-1}/C(n,k-1) - l psi S_{l-1}/C(n,l-1).
double inequality_margin(const EigenTuple& lam, int k, int l, double psi) {
  const int n = static_cast<int>(lam.size());
  const double lhs = k * elementary_sym(lam, k - 1) / binom(n, k - 1);
  const double rhs =
      l >= 1 ? l * psi * elementary_sym(lam, l - 1) / binom(n, l - 1) : 0.0;
  return lhs - rhs;
}

}  // namespace

SubsolutionReport check_subsolution(const ScalarField& u_bar, int k, int l,
                                    const ScalarField& psi) {
  const GeomPtr& geom = u_bar.geom;
  const int n = geom->n();
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("check_subsolution: need 0 <= l < k <= n");
  if (!geom->same_grid(*psi.geom))
    throw std::domain_error("check_subsolution: psi grid mismatch");

  const FormField x = chi_u(geom, u_bar);
  const HermMatrix id = HermMatrix::Identity(n, n);
  const Eigen::Index npts = geom->num_points();

  SubsolutionReport report;
  report.pointwise_ok.assign(npts, 1);
  report.min_margin = std::numeric_limits<double>::infinity();

  std::vector<EigenTuple> spectra(npts);
  for (Eigen::Index p = 0; p < npts; ++p) {
    const EigenTuple lam = eigen_wrt_metric(x.matrix(p), id);
    spectra[p] = lam;
    const double cone = gamma_k_margin(lam, k);
    const double ineq = inequality_margin(lam, k, l, psi.values[p]);
    const double margin = std::min(cone, ineq);
    report.min_margin = std::min(report.min_margin, margin);
    if (!(margin > 0.0)) {
      report.pointwise_ok[p] = 0;
      ++report.failure_count;
    }
  }

  // Robustness gap: the largest dyadic lambda such that shrinking
  // chi_ubar to chi_ubar - lambda*omega and inflating psi to e^lambda psi
  // preserves the subsolution property everywhere.
  report.lambda_gap = 0.0;
  if (report.failure_count == 0) {
    for (int j = 0; j <= 40; ++j) {
      const double lam_shift = std::ldexp(1.0, -j);
      bool survives = true;
      for (Eigen::Index p = 0; p < npts && survives; ++p) {
        const EigenTuple shifted = (spectra[p].array() - lam_shift).matrix();
        if (!in_gamma_k(shifted, k) ||
            !(inequality_margin(shifted, k, l,
                                std::exp(lam_shift) * psi.values[p]) > 0.0))
          survives = false;
      }
      if (survives) {
        report.lambda_gap = lam_shift;
        break;
      }
    }
  }
  return report;
}

double dichotomy_theta(const EigenTuple& lambda_desc,
                       const Eigen::VectorXd& hess_diff_diag, double dt_u,
                       int k, int l) {
  const int n = static_cast<int>(lambda_desc.size());
  for (int i = 0; i + 1 < n; ++i)
    if (lambda_desc[i] < lambda_desc[i + 1])
      throw std::domain_error("dichotomy_theta: eigenvalues must be sorted descending");
  if (hess_diff_diag.size() != n)
    throw std::domain_error("dichotomy_theta: diagonal length mismatch");

  const EigenTuple grad = F_gradient_diag(lambda_desc, k, l);
  const double budget = 1.0 + grad.sum();
  const double drift = grad.dot(hess_diff_diag) - dt_u;
  const double top = grad[0] * lambda_desc[0];

  for (int j = 0; j <= 40; ++j) {
    const double theta = std::ldexp(1.0, -j);
    if (drift <= -theta * budget) return theta;
    if (top >= theta * budget) return theta;
  }
  return 0.0;
}

double dichotomy_theta_min(const FlowState& state, const ScalarField& u_bar,
                           const FlowConfig& config) {
  const GeomPtr& geom = state.u.geom;
  if (!geom->same_grid(*u_bar.geom))
    throw std::domain_error("dichotomy_theta_min: grid mismatch");

  const FormField x = chi_u(geom, state.u);
  const FormField hu = complex_hessian(state.u);
  const FormField hbar = complex_hessian(u_bar);

  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
    const EigenSystem sys = hermitian_eigensystem(x.matrix(p));
    const HermMatrix diff = hu.matrix(p) - hbar.matrix(p);
    const HermMatrix rotated = sys.vectors.adjoint() * diff * sys.vectors;
    Eigen::VectorXd diag(geom->n());
    for (int i = 0; i < geom->n(); ++i) diag[i] = rotated(i, i).real();
    worst = std::min(worst, dichotomy_theta(sys.values, diag,
                                            state.dtu.values[p], config.k, config.l));
  }
  return worst;
}

}  // namespace qflow
