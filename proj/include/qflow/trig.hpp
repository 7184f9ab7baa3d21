#pragma once

#include <Eigen/Core>
#include <vector>

#include "qflow/hermitian.hpp"

// Real trigonometric polynomials on the unit torus in coordinates
// (x^1, y^1, ..., x^n, y^n), with analytic complex Hessians.  These carry
// the background data (the chi perturbation, psi, the subsolution, the
// manufactured solution) so that only the flow unknown u is differentiated
// numerically.

namespace qflow {

struct TrigMode {
  bool is_sin = false;                  // cos by default
  Eigen::Matrix<int, Eigen::Dynamic, 1, 0, 12, 1> freq;  // length 2n
  double amp = 0.0;
};

class TrigPoly {
public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<TrigMode> modes);

  const std::vector<TrigMode>& modes() const { return modes_; }
  bool empty() const { return modes_.empty(); }

  /// Number of complex dimensions the frequency vectors describe.
  int dim() const;

  /// True when every mode involves only the (x^1, y^1) plane.
  bool toy_compatible() const;

  double value(const Eigen::VectorXd& xi) const;

  /// Complex Hessian d_i d_jbar at the point; entry (i,j) of each mode
  /// amp*trig(2 pi f.xi) is -pi^2 amp kappa_i conj(kappa_j) trig(2 pi f.xi)
  /// with kappa_i = f_{x^i} - i f_{y^i}.
  HermMatrix hessian(const Eigen::VectorXd& xi) const;

private:
  std::vector<TrigMode> modes_;
};

}  // namespace qflow
