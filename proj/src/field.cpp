#include "qflow/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/LU>

#include "qflow/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field snapshots assume a little-endian host");

namespace qflow {

// ---------------------------------------------------------------------------
// TorusGeometry

TorusGeometry::TorusGeometry(Params params) : params_(std::move(params)) {}

GeomPtr TorusGeometry::create(Params params) {
  if (params.n < 2 || params.n > 3)
    throw std::domain_error("TorusGeometry: n must be 2 or 3");
  if (params.N < 8 || params.N % 2 != 0)
    throw std::domain_error("TorusGeometry: N must be even and >= 8");
  if (!(params.a > 0.0)) throw std::domain_error("TorusGeometry: a must be positive");
  if (params.cone_k < 1 || params.cone_k > params.n)
    throw std::domain_error("TorusGeometry: cone level outside [1, n]");
  if (!params.rho.empty() && params.rho.dim() != params.n)
    throw std::domain_error("TorusGeometry: rho frequency length mismatch");
  if (params.toy && !params.rho.toy_compatible())
    throw std::domain_error("TorusGeometry: rho uses coordinates beyond the toy plane");

  auto geom = std::shared_ptr<TorusGeometry>(new TorusGeometry(std::move(params)));
  geom->build();
  return geom;
}

void TorusGeometry::build() {
  const int ax = axes();
  const Eigen::Index npts = static_cast<Eigen::Index>(std::pow(params_.N, ax) + 0.5);
  num_points_ = npts;
  strides_.assign(ax, 1);
  for (int a = ax - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * params_.N;

  neighbor_.resize(static_cast<size_t>(2 * ax) * npts);
  for (int a = 0; a < ax; ++a)
    for (Eigen::Index p = 0; p < npts; ++p) {
      neighbor_[(2 * a + 0) * npts + p] = static_cast<std::int32_t>(shift(p, a, -1));
      neighbor_[(2 * a + 1) * npts + p] = static_cast<std::int32_t>(shift(p, a, +1));
    }

  const int n = params_.n;
  chi_.resize(static_cast<size_t>(npts) * n * n);
  chi_density_.assign(n + 1, Eigen::ArrayXd(npts));

  for (Eigen::Index p = 0; p < npts; ++p) {
    HermMatrix chi = params_.a * HermMatrix::Identity(n, n);
    if (!params_.rho.empty()) chi += params_.rho.hessian(point(p));
    std::memcpy(chi_.data() + static_cast<size_t>(p) * n * n, chi.data(),
                sizeof(std::complex<double>) * n * n);

    const EigenTuple lam = hermitian_eigenvalues(chi);
    const EigenTuple e = detail::sym_prefix(lam, n);
    const double linf = lam.cwiseAbs().maxCoeff();
    for (int j = 1; j <= params_.cone_k; ++j)
      if (!(e[j] > detail::cone_eps(linf, j))) throw ConeViolation(j, e[j], p);
    for (int level = 0; level <= n; ++level)
      chi_density_[level][p] = e[level] / binom(n, level);
  }
}

Eigen::VectorXd TorusGeometry::point(Eigen::Index p) const {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(2 * params_.n);
  const int ax = axes();
  for (int a = 0; a < ax; ++a)
    xi[a] = static_cast<double>((p / strides_[a]) % params_.N) * h();
  return xi;
}

Eigen::Index TorusGeometry::shift(Eigen::Index p, int axis, int delta) const {
  const Eigen::Index s = strides_[axis];
  const int N = params_.N;
  const int idx = static_cast<int>((p / s) % N);
  int moved = (idx + delta) % N;
  if (moved < 0) moved += N;
  return p + static_cast<Eigen::Index>(moved - idx) * s;
}

HermMatrix TorusGeometry::chi_at(Eigen::Index p) const {
  const int n = params_.n;
  HermMatrix m(n, n);
  std::memcpy(m.data(), chi_.data() + static_cast<size_t>(p) * n * n,
              sizeof(std::complex<double>) * n * n);
  return m;
}

const Eigen::ArrayXd& TorusGeometry::chi_density(int level) const {
  if (level < 0 || level > params_.n)
    throw std::domain_error("chi_density: level outside [0, n]");
  return chi_density_[level];
}

bool TorusGeometry::same_grid(const TorusGeometry& other) const {
  return params_.n == other.params_.n && params_.N == other.params_.N &&
         params_.toy == other.params_.toy;
}

// ---------------------------------------------------------------------------
// Fields

ScalarField::ScalarField(GeomPtr g, Eigen::ArrayXd v)
    : geom(std::move(g)), values(std::move(v)) {
  if (values.size() != geom->num_points())
    throw std::domain_error("ScalarField: value count does not match the grid");
}

ScalarField ScalarField::zeros(const GeomPtr& g) {
  return {g, Eigen::ArrayXd::Zero(g->num_points())};
}

ScalarField ScalarField::constant(const GeomPtr& g, double value) {
  return {g, Eigen::ArrayXd::Constant(g->num_points(), value)};
}

ScalarField ScalarField::sample(const GeomPtr& g, const TrigPoly& poly) {
  Eigen::ArrayXd v(g->num_points());
  for (Eigen::Index p = 0; p < g->num_points(); ++p) v[p] = poly.value(g->point(p));
  return {g, std::move(v)};
}

FormField::FormField(GeomPtr g) : geom(std::move(g)) {
  const int n = geom->n();
  data.assign(static_cast<size_t>(geom->num_points()) * n * n, {0.0, 0.0});
}

Eigen::Map<const Eigen::MatrixXcd> FormField::at(Eigen::Index p) const {
  const int n = geom->n();
  return {data.data() + static_cast<size_t>(p) * n * n, n, n};
}

void FormField::set(Eigen::Index p, const HermMatrix& m) {
  const int n = geom->n();
  std::memcpy(data.data() + static_cast<size_t>(p) * n * n, m.data(),
              sizeof(std::complex<double>) * n * n);
}

HermMatrix FormField::matrix(Eigen::Index p) const {
  const int n = geom->n();
  HermMatrix m(n, n);
  std::memcpy(m.data(), data.data() + static_cast<size_t>(p) * n * n,
              sizeof(std::complex<double>) * n * n);
  return m;
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* who) {
  if (!a.geom || !b.geom || !a.geom->same_grid(*b.geom))
    throw std::domain_error(std::string(who) + ": fields live on different grids");
}

}  // namespace

FormField complex_hessian(const ScalarField& u) {
  const TorusGeometry& g = *u.geom;
  const int n = g.n();
  const double inv_h2 = static_cast<double>(g.N()) * g.N();
  const Eigen::ArrayXd& v = u.values;
  FormField out(u.geom);

  const int pairs = g.toy() ? 1 : n;  // complex coordinates that can vary
  std::complex<double>* raw = out.data.data();

  for (Eigen::Index p = 0; p < g.num_points(); ++p) {
    std::complex<double>* m = raw + static_cast<size_t>(p) * n * n;
    const double up = v[p];
    for (int i = 0; i < pairs; ++i) {
      const int xi = 2 * i, yi = 2 * i + 1;
      // d^2/dz^i dzbar^i = (1/4)(d_xx + d_yy)
      const double dxx = v[g.neighbor(p, xi, 1)] - 2.0 * up + v[g.neighbor(p, xi, 0)];
      const double dyy = v[g.neighbor(p, yi, 1)] - 2.0 * up + v[g.neighbor(p, yi, 0)];
      m[i * n + i] = 0.25 * (dxx + dyy) * inv_h2;

      for (int j = i + 1; j < pairs; ++j) {
        const int xj = 2 * j, yj = 2 * j + 1;
        auto cross = [&](int a, int b) {
          const Eigen::Index pa = g.neighbor(p, a, 1), ma = g.neighbor(p, a, 0);
          return 0.25 * (v[g.neighbor(pa, b, 1)] - v[g.neighbor(pa, b, 0)] -
                         v[g.neighbor(ma, b, 1)] + v[g.neighbor(ma, b, 0)]) * inv_h2;
        };
        const double re = 0.25 * (cross(xi, xj) + cross(yi, yj));
        const double im = 0.25 * (cross(xi, yj) - cross(yi, xj));
        m[j * n + i] = {re, im};         // column-major (i,j)
        m[i * n + j] = {re, -im};        // (j,i) = conjugate
      }
    }
  }
  return out;
}

FormField chi_u(const GeomPtr& geom, const ScalarField& u) {
  if (!geom->same_grid(*u.geom)) throw std::domain_error("chi_u: grid mismatch");
  FormField x = complex_hessian(u);
  const int n = geom->n();
  const size_t block = static_cast<size_t>(n) * n;
  for (Eigen::Index p = 0; p < geom->num_points(); ++p) {
    HermMatrix sum = x.matrix(p) + geom->chi_at(p);
    std::memcpy(x.data.data() + static_cast<size_t>(p) * block, sum.data(),
                sizeof(std::complex<double>) * block);
  }
  return x;
}

double mixed_density(const HermMatrix& a, const HermMatrix& b,
                     const HermMatrix& g, int i, int j) {
  const int n = static_cast<int>(a.rows());
  if (i < 0 || j < 0 || i + j > n)
    throw std::domain_error("mixed_density: need i, j >= 0 and i + j <= n");
  const int m = i + j;
  if (m == 0) return 1.0;
  if (j == 0) return wedge_ratio(a, g, i);
  if (i == 0) return wedge_ratio(b, g, j);

  // q(t) = wedge_ratio(A + tB, m) is a degree-m polynomial whose t^j
  // coefficient is C(m, j) * density(A^i B^j).
  Eigen::VectorXd q(m + 1);
  Eigen::MatrixXd vand(m + 1, m + 1);
  for (int r = 0; r <= m; ++r) {
    const double t = static_cast<double>(r);
    q[r] = wedge_ratio(a + t * b, g, m);
    double tp = 1.0;
    for (int c = 0; c <= m; ++c) {
      vand(r, c) = tp;
      tp *= t;
    }
  }
  const Eigen::VectorXd coef = vand.fullPivLu().solve(q);
  return coef[j] / binom(m, j);
}

double integrate(const ScalarField& f, const ScalarField& density) {
  require_same_grid(f, density, "integrate");
  // Kahan summation keeps the reduction deterministic and accurate.
  double sum = 0.0, comp = 0.0;
  const Eigen::Index npts = f.values.size();
  for (Eigen::Index p = 0; p < npts; ++p) {
    const double term = f.values[p] * density.values[p] - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  double factorial = 1.0;
  for (int i = 2; i <= f.geom->n(); ++i) factorial *= i;
  return factorial * sum / static_cast<double>(npts);
}

double grid_mean(const ScalarField& f) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index p = 0; p < f.values.size(); ++p) {
    const double term = f.values[p] - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum / static_cast<double>(f.values.size());
}

double oscillation(const ScalarField& f) {
  return f.values.maxCoeff() - f.values.minCoeff();
}

// ---------------------------------------------------------------------------
// Snapshot I/O

void save_field(std::ostream& os, const ScalarField& f, const std::string& name) {
  if (name.find_first_of(" \t\n") != std::string::npos)
    throw std::domain_error("save_field: name must not contain whitespace");
  os << "QFLOW1 n=" << f.geom->n() << " N=" << f.geom->N();
  if (f.geom->toy()) os << " toy=1";
  os << " name=" << name << "\n";
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("save_field: write failed");
}

void save_field(const std::string& path, const ScalarField& f, const std::string& name) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  save_field(os, f, name);
}

FieldSnapshot load_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("load_field: missing header");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "QFLOW1") throw std::runtime_error("load_field: bad magic '" + magic + "'");

  FieldSnapshot snap;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_field: malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") snap.n = std::stoi(val);
    else if (key == "N") snap.N = std::stoi(val);
    else if (key == "toy") snap.toy = (val == "1");
    else if (key == "name") snap.name = val;
    else throw std::runtime_error("load_field: unknown header key '" + key + "'");
  }
  if (snap.n < 2 || snap.n > 3 || snap.N < 8)
    throw std::runtime_error("load_field: implausible header dimensions");

  const int ax = snap.toy ? 2 : 2 * snap.n;
  Eigen::Index count = 1;
  for (int a = 0; a < ax; ++a) count *= snap.N;
  snap.values.resize(count);
  is.read(reinterpret_cast<char*>(snap.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw std::runtime_error("load_field: truncated payload");
  return snap;
}

FieldSnapshot load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  return load_field(is);
}

}  // namespace qflow
