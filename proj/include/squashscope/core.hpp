#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace squashscope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. Everything the library throws derives from Error so the
// CLI can map domain failures to a single exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  explicit ParseError(const std::string& what) : Error(what), line(0) {}
  std::size_t line;  // 0 when the input has no line structure
};

struct InvalidGraph : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

/// Raised when a theorem's hypotheses do not hold. The message names the
/// inequality that failed.
struct PremiseViolation : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

/// Unordered-by-convention pair of node indices.
struct NodePair {
  int v = 0;
  int u = 0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

/// A nonnegative real that may be +infinity. Over-squashing measures are
/// reciprocals of bounds that vanish under under-reaching, so infinity is a
/// first-class value here rather than a float sentinel.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  explicit ExtendedReal(double value) : value_(value) {}

  static ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  /// 1/x, mapping a zero (or non-positive) denominator to infinity.
  static ExtendedReal reciprocal(double x) {
    if (!(x > 0.0)) return infinity();
    return ExtendedReal(1.0 / x);
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw NumericalError("ExtendedReal: value() on infinity");
    return value_;
  }

  /// Finite value or +inf as a double, for arithmetic in tests and tables.
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    return a.as_double() < b.as_double();
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// splitmix64 finalizer. Used to derive independent substream seeds from
/// (seed, index) so that sampling is independent of scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace squashscope
