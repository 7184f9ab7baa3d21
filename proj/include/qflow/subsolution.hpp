#pragma once

#include <vector>

#include "qflow/field.hpp"
#include "qflow/flow.hpp"

// Pointwise verification of the subsolution inequality
//   k chi_ubar^{k-1} wedge omega^{n-k} > l psi chi_ubar^{l-1} wedge omega^{n-l}
// (traced against omega, i.e. compared as densities), and the two-branch
// dichotomy diagnostic predicting a uniform theta > 0 along the flow.

namespace qflow {

struct SubsolutionReport {
  std::vector<std::uint8_t> pointwise_ok;
  double min_margin = 0.0;  // worst of inequality margin and cone margin
  double theta_min = std::numeric_limits<double>::quiet_NaN();  // filled by flow sampling
  double lambda_gap = 0.0;  // largest dyadic shrink the subsolution survives
  long failure_count = 0;

  bool ok() const { return failure_count == 0; }
};

/// Checks chi_ubar in Gamma^k and the strict density inequality
///   k S_{k-1}(lambda)/C(n,k-1) > l psi S_{l-1}(lambda)/C(n,l-1)
/// at every grid point.  Additive constants in u_bar are irrelevant.
SubsolutionReport check_subsolution(const ScalarField& u_bar, int k, int l,
                                    const ScalarField& psi);

/// Largest theta in {2^-j : j = 0..40} such that at this point either
///   sum_i F^{ii}(u_ii - ubar_ii) - dt_u <= -theta (1 + sum_i F^{ii})
/// or
///   F^{11} lambda_1 >= theta (1 + sum_i F^{ii})
/// holds, with lambda sorted descending (index 0 = largest) and
/// hess_diff_diag the diagonal of the Hessian difference in the
/// eigenframe of chi_u.  Returns 0 when neither branch fires at 2^-40.
double dichotomy_theta(const EigenTuple& lambda_desc,
                       const Eigen::VectorXd& hess_diff_diag, double dt_u,
                       int k, int l);

/// Minimum of dichotomy_theta over all grid points of a flow state, with
/// the Hessian difference rotated into the eigenframe point by point.
double dichotomy_theta_min(const FlowState& state, const ScalarField& u_bar,
                           const FlowConfig& config);

}  // namespace qflow
