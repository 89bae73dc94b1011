#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnp_vamp {

// Bad dimensions, non-positive precisions, malformed prior parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Measurement matrix without full row rank.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, double ratio)
      : std::runtime_error(what), ratio_(ratio) {}

  /// smallest / largest singular value
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

// An oracle (quadrature, dense conditioning) could not produce a trustworthy value.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The instance generator could not draw a usable signal within its retry budget.
class DegenerateConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gnp_vamp
