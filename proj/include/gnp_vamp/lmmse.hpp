#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/messages.hpp"

namespace gnp_vamp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// y = A x + w, with the ground truth kept alongside for scoring.
struct ProblemInstance {
  Matrix A;
  Vector y;
  std::optional<Vector> true_x;
  std::optional<Vector> true_w;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  void validate() const {
    if (A.rows() >= A.cols()) {
      throw InvalidArgument("ProblemInstance: need M < N, got M=" + std::to_string(A.rows()) +
                            ", N=" + std::to_string(A.cols()));
    }
    if (y.size() != A.rows()) throw InvalidArgument("ProblemInstance: y length != M");
    if (!A.allFinite() || !y.allFinite()) throw InvalidArgument("ProblemInstance: non-finite data");
    if (true_x && true_x->size() != A.cols()) throw InvalidArgument("ProblemInstance: x length != N");
    if (true_w && true_w->size() != A.rows()) throw InvalidArgument("ProblemInstance: w length != M");
    if (true_x && true_w) {
      const double mismatch = (y - A * *true_x - *true_w).norm();
      if (!(mismatch <= 1e-12 * std::max(y.norm(), 1e-300))) {
        throw InvalidArgument("ProblemInstance: y != A x + w for the stored ground truth");
      }
    }
  }
};

inline constexpr double rank_tolerance = 1e-10;

/// Thin SVD of A = U diag(s) V^T, computed once per instance. Immutable after
/// construction; all solves are const and allocate their own temporaries.
class OperatorCache {
 public:
  explicit OperatorCache(const Matrix& a) : a_(a) {
    if (a.rows() == 0 || a.rows() > a.cols()) {
      throw InvalidArgument("OperatorCache: need 0 < M <= N, got M=" + std::to_string(a.rows()) +
                            ", N=" + std::to_string(a.cols()));
    }
    if (!a.allFinite()) throw InvalidArgument("OperatorCache: non-finite matrix entries");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s_ = svd.singularValues();
    u_ = svd.matrixU();
    v_ = svd.matrixV();
    const double ratio = s_.maxCoeff() > 0.0 ? s_.minCoeff() / s_.maxCoeff() : 0.0;
    if (!(ratio >= rank_tolerance)) {
      throw RankDeficiencyError("OperatorCache: A is rank deficient (s_min/s_max = " +
                                    std::to_string(ratio) + ")",
                                ratio);
    }
    s2_ = s_.array().square();
  }

  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }
  const Matrix& A() const { return a_; }
  const Vector& singular_values() const { return s_; }
  const Eigen::MatrixXd& U() const { return u_; }
  const Eigen::MatrixXd& V() const { return v_; }

  Matrix reconstruct() const { return u_ * s_.asDiagonal() * v_.transpose(); }

  /// Coordinates of y - w_hat - A x_hat in the left singular basis.
  Vector rotated_residual(const Vector& y, const Vector& x_hat, const Vector& w_hat) const {
    Vector res = y - w_hat;
    res.noalias() -= a_ * x_hat;
    return u_.transpose() * res;
  }

  const Vector& squared_singular_values() const { return s2_; }

 private:
  Matrix a_;
  Vector s_;
  Vector s2_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
};

inline OperatorCache build_cache(const Matrix& a) { return OperatorCache(a); }

struct LmmseOutput {
  Vector x_mean;
  Vector w_mean;
  double alpha_x;
  double alpha_w;
  double x_precision;
  double w_precision;
};

namespace detail {

inline void check_lmmse_inputs(const OperatorCache& cache, const Vector& y,
                               const GaussianMessage& x_ext, const GaussianMessage& w_ext) {
  if (y.size() != cache.rows() || w_ext.size() != cache.rows() || x_ext.size() != cache.cols()) {
    throw InvalidArgument("lmmse: message dimensions do not match the operator");
  }
  if (!(x_ext.precision > 0.0) || !(w_ext.precision > 0.0)) {
    throw InvalidArgument("lmmse: precisions must be > 0");
  }
}

}  // namespace detail

// Joint posterior of x under N(x_ext), w under N(w_ext), and y = A x + w.
// With c = U^T (y - w_ext - A x_ext):
//   x = x_ext + V diag(gw s / (gx + gw s^2)) c
//   w = w_ext + U diag(gx / (gx + gw s^2)) c
// which is (gx I + gw A^T A)^{-1}(gx x_ext + gw A^T (y - w_ext)) and
// (gw I + gx Q)^{-1}(gw w_ext + gx Q (y - A x_ext)) with Q = (A A^T)^{-1}.

inline Vector lmmse_x(const OperatorCache& cache, const Vector& y, const GaussianMessage& x_ext,
                      const GaussianMessage& w_ext) {
  detail::check_lmmse_inputs(cache, y, x_ext, w_ext);
  const double gx = x_ext.precision, gw = w_ext.precision;
  const Vector& s = cache.singular_values();
  Vector c = cache.rotated_residual(y, x_ext.mean, w_ext.mean);
  c.array() *= gw * s.array() / (gx + gw * cache.squared_singular_values().array());
  return x_ext.mean + cache.V() * c;
}

inline Vector lmmse_w(const OperatorCache& cache, const Vector& y, const GaussianMessage& x_ext,
                      const GaussianMessage& w_ext) {
  detail::check_lmmse_inputs(cache, y, x_ext, w_ext);
  const double gx = x_ext.precision, gw = w_ext.precision;
  Vector c = cache.rotated_residual(y, x_ext.mean, w_ext.mean);
  c.array() *= gx / (gx + gw * cache.squared_singular_values().array());
  return w_ext.mean + cache.U() * c;
}

/// <f'>: normalised trace of gx (gx I + gw A^T A)^{-1}. The N - M null
/// directions of A^T A each contribute exactly 1.
inline double alpha_x(const OperatorCache& cache, double gamma_x, double gamma_w) {
  const auto& s2 = cache.squared_singular_values().array();
  const double range = (gamma_x / (gamma_x + gamma_w * s2)).sum();
  const auto null_dim = static_cast<double>(cache.cols() - cache.rows());
  return (range + null_dim) / static_cast<double>(cache.cols());
}

/// <g'>: normalised trace of gw (gw I + gx Q)^{-1}.
inline double alpha_w(const OperatorCache& cache, double gamma_x, double gamma_w) {
  const auto& s2 = cache.squared_singular_values().array();
  return (gamma_w * s2 / (gamma_w * s2 + gamma_x)).sum() / static_cast<double>(cache.rows());
}

inline LmmseOutput lmmse_joint(const OperatorCache& cache, const Vector& y,
                               const GaussianMessage& x_ext, const GaussianMessage& w_ext) {
  detail::check_lmmse_inputs(cache, y, x_ext, w_ext);
  const double gx = x_ext.precision, gw = w_ext.precision;
  const Vector& s = cache.singular_values();
  const auto denom = (gx + gw * cache.squared_singular_values().array()).eval();
  const Vector c = cache.rotated_residual(y, x_ext.mean, w_ext.mean);

  LmmseOutput out;
  out.x_mean = x_ext.mean + cache.V() * (c.array() * gw * s.array() / denom).matrix();
  out.w_mean = w_ext.mean + cache.U() * (c.array() * gx / denom).matrix();
  out.alpha_x = alpha_x(cache, gx, gw);
  out.alpha_w = alpha_w(cache, gx, gw);
  out.x_precision = gx / out.alpha_x;
  out.w_precision = gw / out.alpha_w;
  return out;
}

}  // namespace gnp_vamp
