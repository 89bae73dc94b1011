#pragma once

// Dense conditional-Gaussian reference for the joint LMMSE step.
//
//   x ~ N(x_e, I/gx),  w ~ N(w_e, I/gw),  y = A x + w
//   S = Cov(y) = A A^T / gx + I / gw
//   E[x|y] = x_e + A^T S^{-1} (y - A x_e - w_e) / gx
//   E[w|y] = w_e + S^{-1} (y - A x_e - w_e) / gw
//   Cov(x|y) = I/gx - A^T S^{-1} A / gx^2
//   Cov(w|y) = I/gw - S^{-1} / gw^2

#include <Eigen/Dense>

#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/lmmse.hpp"
#include "gnp_vamp/messages.hpp"

namespace gnp_vamp::oracles {

struct JointPosterior {
  Vector x_mean;
  Vector w_mean;
  double x_var_avg;
  double w_var_avg;
};

inline JointPosterior joint_oracle(const Matrix& a, const Vector& y, const GaussianMessage& x_ext,
                                   const GaussianMessage& w_ext) {
  const auto m = a.rows();
  const auto n = a.cols();
  if (m * n > 10000) throw InvalidArgument("joint_oracle: instance too large for dense oracle");
  const double gx = x_ext.precision, gw = w_ext.precision;

  const Eigen::MatrixXd ad = a;
  const Eigen::MatrixXd cov_y =
      ad * ad.transpose() / gx + Eigen::MatrixXd::Identity(m, m) / gw;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov_y);
  if (llt.info() != Eigen::Success) throw OracleFailure("joint_oracle: Cov(y) not positive definite");

  const Vector innovation = y - ad * x_ext.mean - w_ext.mean;
  const Vector solved = llt.solve(innovation);
  const Eigen::MatrixXd s_inv_a = llt.solve(ad);
  const Eigen::MatrixXd s_inv = llt.solve(Eigen::MatrixXd::Identity(m, m));

  JointPosterior out;
  out.x_mean = x_ext.mean + ad.transpose() * solved / gx;
  out.w_mean = w_ext.mean + solved / gw;
  const Eigen::MatrixXd cov_x =
      Eigen::MatrixXd::Identity(n, n) / gx - ad.transpose() * s_inv_a / (gx * gx);
  const Eigen::MatrixXd cov_w = Eigen::MatrixXd::Identity(m, m) / gw - s_inv / (gw * gw);
  out.x_var_avg = cov_x.trace() / static_cast<double>(n);
  out.w_var_avg = cov_w.trace() / static_cast<double>(m);
  if (!out.x_mean.allFinite() || !out.w_mean.allFinite()) {
    throw OracleFailure("joint_oracle: non-finite conditional moments");
  }
  return out;
}

}  // namespace gnp_vamp::oracles
