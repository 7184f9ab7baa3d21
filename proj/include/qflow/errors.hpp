#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

// Thrown when an eigenvalue tuple leaves the Garding cone Gamma^k.
// Carries the first failing level j (S_j <= tolerance) and its value;
// `point` is the flattened grid index when the violation happened on a
// field, -1 for pointwise calls.
class ConeViolation : public std::runtime_error {
public:
  ConeViolation(int level, double value, long point = -1)
      : std::runtime_error(format(level, value, point)),
        level_(level), value_(value), point_(point) {}

  int level() const { return level_; }
  double value() const { return value_; }
  long point() const { return point_; }

private:
  static std::string format(int level, double value, long point) {
    std::string s = "cone violation: S_" + std::to_string(level) + " = " +
                    std::to_string(value) + " not positive";
    if (point >= 0) s += " at grid point " + std::to_string(point);
    return s;
  }
  int level_;
  double value_;
  long point_;
};

class MetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by flow stepping when values stop being finite.
class NumericalBlowup : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised by estimators (decay rate, limit constant b) when the data does
// not support an estimate.
class EstimationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Config file problems, with the offending line when known.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : msg),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

}  // namespace qflow
