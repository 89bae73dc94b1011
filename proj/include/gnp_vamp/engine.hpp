#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnp_vamp/denoisers.hpp"
#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/lmmse.hpp"
#include "gnp_vamp/messages.hpp"
#include "gnp_vamp/metrics.hpp"
#include "gnp_vamp/priors.hpp"

namespace gnp_vamp {

struct EngineConfig {
  int max_iters = 100;
  double tol = 1e-8;       ///< stop when the relative change of x_hat drops below this
  double damping = 1.0;    ///< 1 = undamped
  std::optional<Vector> init_mean_x;  ///< zero when unset
  double init_precision_x = 1e-6;
  std::optional<Vector> init_mean_w;
  double init_precision_w = 1e-6;
  PrecisionBounds bounds;

  void validate() const {
    if (max_iters < 1) throw InvalidArgument("EngineConfig: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw InvalidArgument("EngineConfig: tol must be >= 0");
    if (!(damping > 0.0 && damping <= 1.0)) {
      throw InvalidArgument("EngineConfig: damping must lie in (0, 1]");
    }
    if (!(init_precision_x > 0.0) || !(init_precision_w > 0.0)) {
      throw InvalidArgument("EngineConfig: initial precisions must be > 0");
    }
    if (!bounds.valid()) throw InvalidArgument("EngineConfig: invalid precision bounds");
  }
};

struct IterationRecord {
  double gamma_x_minus;  ///< extrinsic precision entering the signal denoiser
  double gamma_x_plus;   ///< extrinsic precision entering the LMMSE stage
  double gamma_w_minus;
  double gamma_w_plus;
  double nrmse;          ///< NaN without ground truth
  double residual;       ///< ||y - A x_lmmse - w_lmmse|| / ||y||
  double change;         ///< relative change of x_hat, NaN on the first iteration
  int skipped = 0;       ///< extrinsic updates skipped this iteration (see detail::extrinsic)
};

struct RunResult {
  Vector x_hat;
  Vector w_hat;
  int iterations_used = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, std::vector<IterationRecord> trace)
      : std::runtime_error("message passing diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        trace_(std::move(trace)) {}

  int iteration() const noexcept { return iteration_; }
  /// Records of every iteration that completed with finite messages.
  const std::vector<IterationRecord>& trace() const noexcept { return trace_; }

 private:
  int iteration_;
  std::vector<IterationRecord> trace_;
};

namespace detail {

inline void damp(GaussianMessage& fresh, const GaussianMessage& previous, double damping) {
  if (damping >= 1.0) return;
  fresh.precision = std::pow(fresh.precision, damping) * std::pow(previous.precision, 1.0 - damping);
  fresh.mean = damping * fresh.mean + (1.0 - damping) * previous.mean;
}

inline GaussianMessage initial_message(const std::optional<Vector>& mean, Eigen::Index n,
                                       double precision) {
  if (mean && mean->size() != n) throw InvalidArgument("EngineConfig: initial mean has wrong length");
  return {mean ? *mean : Vector::Zero(n), precision};
}

// A posterior that is no more precise than its incoming message has nothing
// to send: the clamped extrinsic precision would be gamma_min and its mean
// would blow up by 1/gamma_min. As in EP, skip the update and resend the
// previous message.
inline GaussianMessage extrinsic(const GaussianMessage& posterior, const GaussianMessage& incoming,
                                 const GaussianMessage* previous, const PrecisionBounds& bounds,
                                 int& skipped) {
  if (previous && posterior.precision - incoming.precision < bounds.gamma_min) {
    ++skipped;
    return *previous;
  }
  return ext_combine(posterior, incoming, bounds);
}

// How the noise side is handled: a denoiser under a prior, or a fixed AWGN message.
struct NoiseStage {
  const NoisePrior* prior = nullptr;
  GaussianMessage fixed;
};

inline RunResult run_message_passing(const ProblemInstance& instance, const OperatorCache& cache,
                                     const SignalPrior& signal, const NoiseStage& noise,
                                     const EngineConfig& config) {
  config.validate();
  signal.validate();
  if (cache.rows() != instance.rows() || cache.cols() != instance.cols()) {
    throw InvalidArgument("engine: operator cache does not match the instance");
  }
  const auto n = instance.cols();
  const auto m = instance.rows();
  const auto& bounds = config.bounds;
  const bool scored = instance.true_x.has_value();

  GaussianMessage x_minus = initial_message(config.init_mean_x, n, config.init_precision_x);
  GaussianMessage w_minus = noise.prior
                                ? initial_message(config.init_mean_w, m, config.init_precision_w)
                                : noise.fixed;
  std::optional<GaussianMessage> x_plus_prev, w_plus_prev;

  RunResult out;
  out.trace.reserve(static_cast<std::size_t>(config.max_iters));
  Vector x_hat_prev;

  for (int t = 0; t < config.max_iters; ++t) {
    int skipped = 0;
    auto prev = [](const std::optional<GaussianMessage>& m) { return m ? &*m : nullptr; };

    // signal denoiser and its extrinsic output
    const DenoiseResult dx = denoise_vector(signal, x_minus.mean, x_minus.precision);
    GaussianMessage x_plus = extrinsic({dx.posterior_mean, dx.posterior_precision}, x_minus,
                                       prev(x_plus_prev), bounds, skipped);

    // noise denoiser, or the pinned AWGN message
    GaussianMessage w_plus = noise.fixed;
    Vector w_hat = noise.fixed.mean;
    if (noise.prior) {
      const DenoiseResult dw = denoise_vector(*noise.prior, w_minus.mean, w_minus.precision);
      w_plus = extrinsic({dw.posterior_mean, dw.posterior_precision}, w_minus, prev(w_plus_prev),
                         bounds, skipped);
      w_hat = dw.posterior_mean;
    }

    if (x_plus_prev) detail::damp(x_plus, *x_plus_prev, config.damping);
    if (w_plus_prev && noise.prior) detail::damp(w_plus, *w_plus_prev, config.damping);

    const LmmseOutput lm = lmmse_joint(cache, instance.y, x_plus, w_plus);

    GaussianMessage x_next =
        extrinsic({lm.x_mean, lm.x_precision}, x_plus, &x_minus, bounds, skipped);
    GaussianMessage w_next =
        noise.prior ? extrinsic({lm.w_mean, lm.w_precision}, w_plus, &w_minus, bounds, skipped)
                    : noise.fixed;
    if (t > 0) {
      detail::damp(x_next, x_minus, config.damping);
      if (noise.prior) detail::damp(w_next, w_minus, config.damping);
    }

    IterationRecord rec{};
    rec.gamma_x_minus = x_minus.precision;
    rec.gamma_x_plus = x_plus.precision;
    rec.gamma_w_minus = w_minus.precision;
    rec.gamma_w_plus = w_plus.precision;
    rec.residual = relative_residual(instance.A, instance.y, lm.x_mean, lm.w_mean);
    rec.nrmse = std::numeric_limits<double>::quiet_NaN();
    rec.change = std::numeric_limits<double>::quiet_NaN();
    rec.skipped = skipped;

    const bool finite = dx.posterior_mean.allFinite() && w_hat.allFinite() && x_plus.finite() &&
                        w_plus.finite() && x_next.finite() && w_next.finite() &&
                        lm.x_mean.allFinite() && lm.w_mean.allFinite();
    if (!finite) throw DivergenceError(t, std::move(out.trace));

    if (scored) rec.nrmse = nrmse(dx.posterior_mean, instance);
    if (t > 0) {
      rec.change = (dx.posterior_mean - x_hat_prev).norm() / std::max(x_hat_prev.norm(), 1e-12);
    }
    out.trace.push_back(rec);
    out.iterations_used = t + 1;
    out.x_hat = dx.posterior_mean;
    out.w_hat = std::move(w_hat);

    if (t > 0 && rec.change < config.tol) {
      out.converged = true;
      break;
    }
    x_hat_prev = dx.posterior_mean;
    x_plus_prev = std::move(x_plus);
    w_plus_prev = std::move(w_plus);
    x_minus = std::move(x_next);
    w_minus = std::move(w_next);
  }
  return out;
}

}  // namespace detail

/// Message passing with a signal prior and an arbitrary i.i.d. noise prior.
/// Signal and noise are both denoised; a joint LMMSE stage couples them
/// through y = A x + w.
inline RunResult run_gnp_vamp(const ProblemInstance& instance, const OperatorCache& cache,
                              const SignalPrior& signal_prior, const NoisePrior& noise_prior,
                              const EngineConfig& config) {
  validate(noise_prior);
  detail::NoiseStage stage{&noise_prior, {}};
  return detail::run_message_passing(instance, cache, signal_prior, stage, config);
}

inline RunResult run_gnp_vamp(const ProblemInstance& instance, const SignalPrior& signal_prior,
                              const NoisePrior& noise_prior, const EngineConfig& config) {
  instance.validate();
  return run_gnp_vamp(instance, OperatorCache(instance.A), signal_prior, noise_prior, config);
}

/// Classical VAMP: AWGN with a fixed noise precision, no noise denoiser.
inline RunResult run_standard_vamp(const ProblemInstance& instance, const OperatorCache& cache,
                                   const SignalPrior& signal_prior, double noise_variance,
                                   const EngineConfig& config) {
  if (!(noise_variance > 0.0)) throw InvalidArgument("run_standard_vamp: noise_variance must be > 0");
  detail::NoiseStage stage{nullptr,
                           {Vector::Zero(instance.rows()),
                            clamp_precision(1.0 / noise_variance, config.bounds)}};
  return detail::run_message_passing(instance, cache, signal_prior, stage, config);
}

inline RunResult run_standard_vamp(const ProblemInstance& instance, const SignalPrior& signal_prior,
                                   double noise_variance, const EngineConfig& config) {
  instance.validate();
  return run_standard_vamp(instance, OperatorCache(instance.A), signal_prior, noise_variance,
                           config);
}

}  // namespace gnp_vamp
