#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qflow/hermitian.hpp"
#include "qflow/trig.hpp"

// The discrete flat torus C^n/(Z+iZ)^n with the flat metric g = I:
// periodic scalar grids, grids of Hermitian matrices, the discrete
// complex Hessian, and integration of densities against omega^n.
//
// Storage is row-major over (x^1, y^1, ..., x^n, y^n) with N points per
// real coordinate, spacing h = 1/N.  In toy mode fields depend only on
// (x^1, y^1) and the grid collapses to N^2 points while matrices keep
// their full n x n size.

namespace qflow {

class TorusGeometry;
using GeomPtr = std::shared_ptr<const TorusGeometry>;

class TorusGeometry {
public:
  struct Params {
    int n = 2;          // complex dimension, 2 or 3
    int N = 16;         // grid points per real coordinate, even, >= 8
    bool toy = false;   // restrict fields to the (x^1, y^1) plane
    double a = 1.0;     // chi = a*omega + ddbar(rho)
    TrigPoly rho;       // analytic perturbation of chi
    int cone_k = 1;     // chi is validated to lie in Gamma^{cone_k}
  };

  /// Builds the geometry, precomputes the chi field and its wedge
  /// densities, and validates chi(x) in Gamma^{cone_k} at every point.
  static GeomPtr create(Params params);

  int n() const { return params_.n; }
  int N() const { return params_.N; }
  bool toy() const { return params_.toy; }
  double a() const { return params_.a; }
  int cone_k() const { return params_.cone_k; }
  double h() const { return 1.0 / params_.N; }
  const TrigPoly& rho() const { return params_.rho; }

  int axes() const { return params_.toy ? 2 : 2 * params_.n; }
  Eigen::Index num_points() const { return num_points_; }
  Eigen::Index stride(int axis) const { return strides_[axis]; }

  /// Real coordinates (x^1, y^1, ..., x^n, y^n) of a flattened index;
  /// coordinates beyond the toy plane are zero in toy mode.
  Eigen::VectorXd point(Eigen::Index p) const;

  /// Flattened index shifted by delta along one axis, wrapping.
  Eigen::Index shift(Eigen::Index p, int axis, int delta) const;

  /// Precomputed single-step neighbor, dir = 0 for -1, 1 for +1.
  Eigen::Index neighbor(Eigen::Index p, int axis, int dir) const {
    return neighbor_[(2 * axis + dir) * num_points_ + p];
  }

  /// chi(x) = a*I + ddbar(rho)(x) as an n x n Hermitian matrix.
  HermMatrix chi_at(Eigen::Index p) const;

  /// Cached density of chi^level wedge omega^{n-level} against omega^n.
  const Eigen::ArrayXd& chi_density(int level) const;

  bool same_grid(const TorusGeometry& other) const;

private:
  explicit TorusGeometry(Params params);
  void build();

  Params params_;
  Eigen::Index num_points_ = 0;
  std::vector<Eigen::Index> strides_;
  std::vector<std::int32_t> neighbor_;               // 2*axes blocks of num_points
  std::vector<std::complex<double>> chi_;            // n*n per point
  std::vector<Eigen::ArrayXd> chi_density_;          // levels 0..n
};

struct ScalarField {
  GeomPtr geom;
  Eigen::ArrayXd values;

  ScalarField() = default;
  ScalarField(GeomPtr g, Eigen::ArrayXd v);

  static ScalarField zeros(const GeomPtr& g);
  static ScalarField constant(const GeomPtr& g, double value);
  /// Samples an analytic trig polynomial on the grid.
  static ScalarField sample(const GeomPtr& g, const TrigPoly& poly);

  double& at(Eigen::Index p) { return values[p]; }
  double at(Eigen::Index p) const { return values[p]; }
};

/// Grid of Hermitian n x n matrices, flat storage.
struct FormField {
  GeomPtr geom;
  std::vector<std::complex<double>> data;

  FormField() = default;
  explicit FormField(GeomPtr g);

  int n() const { return geom->n(); }
  Eigen::Map<const Eigen::MatrixXcd> at(Eigen::Index p) const;
  void set(Eigen::Index p, const HermMatrix& m);
  HermMatrix matrix(Eigen::Index p) const;
};

/// Discrete complex Hessian u_{i jbar} by second-order centered
/// differences; Hermitian at every point by construction.
FormField complex_hessian(const ScalarField& u);

/// chi + ddbar(u): the analytic chi field plus the discrete Hessian of u.
FormField chi_u(const GeomPtr& geom, const ScalarField& u);

/// Pointwise density (A^i wedge B^j wedge omega^{n-i-j}) / omega^n by
/// polynomial interpolation of t -> wedge_ratio(A + tB, i+j) at the
/// integer nodes t = 0..i+j.
double mixed_density(const HermMatrix& a, const HermMatrix& b,
                     const HermMatrix& g, int i, int j);

/// Integral of f * density * omega^n over the torus with the volume
/// normalization omega^n = n! dx dy...; exact for trig polynomials of
/// grid-resolved frequency.
double integrate(const ScalarField& f, const ScalarField& density);

/// Plain arithmetic grid mean (compensated summation).
double grid_mean(const ScalarField& f);

double oscillation(const ScalarField& f);

/// Field snapshot I/O: one ASCII header line then raw little-endian
/// doubles in storage order.
void save_field(std::ostream& os, const ScalarField& f, const std::string& name);
void save_field(const std::string& path, const ScalarField& f, const std::string& name);

struct FieldSnapshot {
  int n = 0;
  int N = 0;
  bool toy = false;
  std::string name;
  Eigen::ArrayXd values;
};
FieldSnapshot load_field(std::istream& is);
FieldSnapshot load_field(const std::string& path);

}  // namespace qflow
