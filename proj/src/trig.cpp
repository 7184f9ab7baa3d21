#include "qflow/trig.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPiSq = std::numbers::pi * std::numbers::pi;
}  // namespace

TrigPoly::TrigPoly(std::vector<TrigMode> modes) : modes_(std::move(modes)) {
  for (const TrigMode& m : modes_) {
    if (m.freq.size() % 2 != 0 || m.freq.size() < 4 || m.freq.size() > 12)
      throw std::domain_error("TrigPoly: frequency vector must have 2n entries, n in [2,6]");
    if (m.freq.size() != modes_.front().freq.size())
      throw std::domain_error("TrigPoly: inconsistent frequency lengths");
  }
}

int TrigPoly::dim() const {
  return modes_.empty() ? 0 : static_cast<int>(modes_.front().freq.size()) / 2;
}

bool TrigPoly::toy_compatible() const {
  for (const TrigMode& m : modes_)
    for (Eigen::Index a = 2; a < m.freq.size(); ++a)
      if (m.freq[a] != 0) return false;
  return true;
}

double TrigPoly::value(const Eigen::VectorXd& xi) const {
  double v = 0.0;
  for (const TrigMode& m : modes_) {
    double phase = 0.0;
    for (Eigen::Index a = 0; a < m.freq.size(); ++a) phase += m.freq[a] * xi[a];
    phase *= kTwoPi;
    v += m.amp * (m.is_sin ? std::sin(phase) : std::cos(phase));
  }
  return v;
}

HermMatrix TrigPoly::hessian(const Eigen::VectorXd& xi) const {
  const int n = dim();
  const int nn = n > 0 ? n : static_cast<int>(xi.size()) / 2;
  HermMatrix h = HermMatrix::Zero(nn, nn);
  for (const TrigMode& m : modes_) {
    double phase = 0.0;
    for (Eigen::Index a = 0; a < m.freq.size(); ++a) phase += m.freq[a] * xi[a];
    phase *= kTwoPi;
    const double trig = m.is_sin ? std::sin(phase) : std::cos(phase);
    const double factor = -kPiSq * m.amp * trig;
    for (int i = 0; i < nn; ++i) {
      const std::complex<double> ki(m.freq[2 * i], -m.freq[2 * i + 1]);
      for (int j = i; j < nn; ++j) {
        const std::complex<double> kj(m.freq[2 * j], -m.freq[2 * j + 1]);
        const std::complex<double> term = factor * ki * std::conj(kj);
        h(i, j) += term;
        if (j != i) h(j, i) += std::conj(term);
      }
    }
  }
  // Diagonal is real by construction; scrub the representation.
  for (int i = 0; i < nn; ++i) h(i, i) = std::complex<double>(h(i, i).real(), 0.0);
  return h;
}

}  // namespace qflow
