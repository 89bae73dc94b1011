#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gnp_vamp/errors.hpp"

namespace gnp_vamp {

using Vector = Eigen::VectorXd;

/// Isotropic Gaussian belief N(mean, precision^{-1} I).
struct GaussianMessage {
  Vector mean;
  double precision = 1.0;

  Eigen::Index size() const { return mean.size(); }
  bool finite() const { return std::isfinite(precision) && mean.allFinite(); }
};

/// Numerical guard applied to every extrinsic precision.
struct PrecisionBounds {
  double gamma_min = 1e-11;
  double gamma_max = 1e11;

  bool valid() const { return 0.0 < gamma_min && gamma_min < gamma_max; }
};

inline double clamp_precision(double gamma, const PrecisionBounds& bounds) {
  return std::min(std::max(gamma, bounds.gamma_min), bounds.gamma_max);
}

/// Divides the incoming message out of a posterior belief.
///
/// The extrinsic precision is the clamped difference of precisions. When the
/// lower clamp is active the mean is normalised by the clamped value.
inline GaussianMessage ext_combine(const GaussianMessage& posterior,
                                   const GaussianMessage& incoming,
                                   const PrecisionBounds& bounds) {
  if (posterior.size() != incoming.size()) {
    throw InvalidArgument("ext_combine: posterior has length " +
                          std::to_string(posterior.size()) + ", incoming has length " +
                          std::to_string(incoming.size()));
  }
  const double diff = posterior.precision - incoming.precision;
  GaussianMessage out;
  out.precision = clamp_precision(diff, bounds);
  // Above gamma_max the exact extrinsic mean is still well defined; dividing
  // it by the capped precision would inflate it by diff / gamma_max.
  const double denom = diff > bounds.gamma_max ? diff : out.precision;
  out.mean = (posterior.precision * posterior.mean - incoming.precision * incoming.mean) / denom;
  return out;
}

}  // namespace gnp_vamp
