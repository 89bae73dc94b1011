#pragma once

#include <algorithm>

#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/lmmse.hpp"

namespace gnp_vamp {

/// Measurement-domain error ||A (x - x_hat)|| / ||A x|| of a single trial.
inline double nrmse(const Vector& x_hat, const ProblemInstance& instance) {
  if (!instance.true_x) throw InvalidArgument("nrmse: instance carries no ground truth");
  if (x_hat.size() != instance.cols()) throw InvalidArgument("nrmse: estimate has wrong length");
  const Vector ax = instance.A * *instance.true_x;
  const Vector err = ax - instance.A * x_hat;
  return err.norm() / ax.norm();
}

/// ||y - A x - w|| / ||y||
inline double relative_residual(const Matrix& a, const Vector& y, const Vector& x, const Vector& w) {
  Vector r = y - w;
  r.noalias() -= a * x;
  return r.norm() / std::max(y.norm(), 1e-300);
}

}  // namespace gnp_vamp
