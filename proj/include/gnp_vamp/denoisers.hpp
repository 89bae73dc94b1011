#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <variant>

#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/messages.hpp"
#include "gnp_vamp/numerics.hpp"
#include "gnp_vamp/priors.hpp"

namespace gnp_vamp {

/// Posterior mean of a scalar under a prior and the pseudo-observation
/// r = x + n, n ~ N(0, 1/gamma), together with its derivative in r.
struct ScalarEstimate {
  double mean;
  double derivative;
};

struct DenoiseResult {
  Vector posterior_mean;
  double alpha;                ///< average derivative, clamped to [alpha_floor, 1]
  double posterior_precision;  ///< gamma / alpha
};

inline constexpr double alpha_floor = 1e-11;

namespace detail {

inline void require_positive_precision(double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("denoiser: precision must be > 0");
}

}  // namespace detail

inline ScalarEstimate denoise_bg(double r, double gamma, const SignalPrior& prior) {
  detail::require_positive_precision(gamma);
  const double v = prior.active_variance;
  const double vg = v * gamma;
  const double k = vg / (1.0 + vg);  // slab shrinkage factor
  // log-odds of the slab against the spike; r*r keeps the mean exactly odd in r
  const double log_odds = std::log1p(-prior.rho) - std::log(prior.rho) - 0.5 * std::log1p(vg) +
                          0.5 * r * r * gamma * k;
  const double p_slab = 1.0 / (1.0 + std::exp(-log_odds));
  const double p_spike = 1.0 / (1.0 + std::exp(log_odds));
  return {p_slab * k * r, p_slab * k + p_slab * p_spike * gamma * k * k * r * r};
}

/// Laplace prior: the posterior is a two-piece mixture of truncated normals
/// on either side of mu. Weights and moments are evaluated through the
/// scaled erfc so that large |r - mu| / b and large gamma stay finite.
inline ScalarEstimate denoise_laplace(double r, double gamma, const LaplaceNoise& prior) {
  detail::require_positive_precision(gamma);
  if (!(prior.b > 0.0)) throw InvalidArgument("denoise_laplace: b must be > 0");

  const double sigma = 1.0 / std::sqrt(gamma);
  const double lam = 1.0 / prior.b;
  const double z = r - prior.mu;
  const double zs = z / sigma;
  const double ls = lam * sigma;

  // standardized centers of the upper (w > mu) and lower pieces
  const double tp = zs - ls;
  const double tm = zs + ls;
  const double log_mass_up = -lam * z + detail::log_normal_cdf(tp);
  const double log_mass_lo = lam * z + detail::log_normal_cdf(-tm);
  const double d = log_mass_lo - log_mass_up;
  const double p_up = 1.0 / (1.0 + std::exp(d));
  const double p_lo = 1.0 / (1.0 + std::exp(-d));

  const double rp = detail::inverse_mills(tp);
  const double rm = detail::inverse_mills(-tm);
  // truncated-normal means and variances in units of sigma
  const double ep = tp + rp;
  const double em = tm - rm;
  const double vp = std::clamp(1.0 - rp * ep, 0.0, 1.0);
  const double vm = std::clamp(1.0 + rm * em, 0.0, 1.0);

  const double mean = prior.mu + sigma * (p_up * ep + p_lo * em);
  // d mean / dr = gamma * Var[w | r]
  const double spread = ep - em;
  const double deriv = p_up * vp + p_lo * vm + p_up * p_lo * spread * spread;
  return {mean, deriv};
}

inline ScalarEstimate denoise_binary(double r, double gamma, const BinaryNoise& prior) {
  detail::require_positive_precision(gamma);
  if (!(prior.s > 0.0)) throw InvalidArgument("denoise_binary: s must be > 0");
  const double s = prior.s;
  const double th = std::tanh(gamma * s * r);
  return {s * th, gamma * s * s * (1.0 - th * th)};
}

inline ScalarEstimate denoise_gaussian(double r, double gamma, const GaussianNoise& prior) {
  detail::require_positive_precision(gamma);
  if (!(prior.variance > 0.0)) throw InvalidArgument("denoise_gaussian: variance must be > 0");
  const double gain = gamma / (gamma + 1.0 / prior.variance);
  return {gain * r, gain};
}

// Overload set used by denoise_vector.
inline ScalarEstimate denoise(const SignalPrior& p, double r, double g) { return denoise_bg(r, g, p); }
inline ScalarEstimate denoise(const LaplaceNoise& p, double r, double g) { return denoise_laplace(r, g, p); }
inline ScalarEstimate denoise(const BinaryNoise& p, double r, double g) { return denoise_binary(r, g, p); }
inline ScalarEstimate denoise(const GaussianNoise& p, double r, double g) { return denoise_gaussian(r, g, p); }

template <class P>
concept ScalarPrior = requires(const P& p, double r, double g) {
  { p.validate() };
  { denoise(p, r, g) } -> std::same_as<ScalarEstimate>;
};

/// Componentwise denoising plus the divergence alpha = <g'> over all entries.
template <ScalarPrior P>
DenoiseResult denoise_vector(const P& prior, const Vector& r, double gamma) {
  detail::require_positive_precision(gamma);
  prior.validate();

  DenoiseResult out;
  out.posterior_mean.resize(r.size());
  Vector deriv(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const ScalarEstimate e = denoise(prior, r[i], gamma);
    out.posterior_mean[i] = e.mean;
    deriv[i] = e.derivative;
  }
  const double avg = detail::pairwise_mean(std::span<const double>(deriv.data(), deriv.size()));
  out.alpha = std::clamp(avg, alpha_floor, 1.0);
  out.posterior_precision = gamma / out.alpha;
  return out;
}

inline DenoiseResult denoise_vector(const NoisePrior& prior, const Vector& r, double gamma) {
  return std::visit([&](const auto& p) { return denoise_vector(p, r, gamma); }, prior);
}

}  // namespace gnp_vamp
