#pragma once

// Reference posterior means for the scalar denoisers, by adaptive
// Gauss-Kronrod integration of prior x likelihood plus exact enumeration of
// point masses. Shares no algebra with denoisers.hpp.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/numerics.hpp"
#include "gnp_vamp/priors.hpp"

namespace gnp_vamp::oracles {

namespace detail {

struct LogMoment {
  double log_mass;  // log of the integral of exp(logf)
  double mean;
};

inline constexpr double kTailWidths = 12.0;  // exp(-72) of the peak is left outside
inline constexpr double kRelErr = 1e-10;

template <class F>
double golden_argmax(F f, double a, double b) {
  constexpr double inv_phi = 0.61803398874989484820;
  if (a == b) return a;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 300 && (b - a) > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Mass and mean of exp(logf) for a log-concave logf whose maximum lies in
/// [lo, hi] and whose curvature is at least `min_curvature`. `fine` is the
/// smallest feature width near the mode; `kink` an optional nondifferentiable point.
template <class F>
LogMoment log_concave_moment(F logf, double lo, double hi, double min_curvature, double fine,
                             double kink = std::numeric_limits<double>::quiet_NaN()) {
  using boost::math::quadrature::gauss_kronrod;
  const double mode = golden_argmax(logf, lo, hi);
  const double peak = logf(mode);
  const double half = kTailWidths / std::sqrt(min_curvature);

  std::vector<double> pts{mode - half, mode, mode + half};
  for (double h = fine; h < half; h *= 2.0) {
    pts.push_back(mode - h);
    pts.push_back(mode + h);
  }
  // Slivers between near-coincident breakpoints cannot be resolved below
  // rounding. The mode is only known to ~sqrt(eps), so the kink wins any tie.
  const double merge = 1e-3 * fine;
  if (std::isfinite(kink) && kink > mode - half && kink < mode + half) {
    std::erase_if(pts, [&](double p) { return std::abs(p - kink) < merge; });
    pts.push_back(kink);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [&](double a, double b) { return b - a < merge; }),
            pts.end());

  // Error budgets are global: tail pieces hold almost no mass, so only their
  // absolute error matters.
  double mass = 0.0, first = 0.0, mass_err = 0.0, mass_l1 = 0.0, first_err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    mass += gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(logf(x) - peak); }, pts[i], pts[i + 1], 12, 1e-11, &err,
        &l1);
    mass_err += err;
    mass_l1 += l1;
    first += gauss_kronrod<double, 61>::integrate(
        [&](double x) { return (x - mode) * std::exp(logf(x) - peak); }, pts[i], pts[i + 1], 12,
        1e-11, &err);
    first_err += err;
  }
  if (!(mass > 0.0) || !std::isfinite(first)) throw OracleFailure("quadrature: degenerate mass");
  if (!(mass_err <= kRelErr * mass_l1)) throw OracleFailure("quadrature: mass did not converge");
  // absolute error of the mean: first-moment error plus the mass error carried by the offset
  if (!(first_err + std::abs(first / mass) * mass_err <= kRelErr * mass)) {
    throw OracleFailure("quadrature: first moment did not converge");
  }
  return {peak + std::log(mass), mode + first / mass};
}

struct Component {
  double log_weight;
  double mean;
};

inline double mixture_mean(const std::vector<Component>& parts) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : parts) top = std::max(top, c.log_weight);
  if (!std::isfinite(top)) throw OracleFailure("quadrature: no component carries mass");
  double num = 0.0, den = 0.0;
  for (const auto& c : parts) {
    const double w = std::exp(c.log_weight - top);
    num += w * c.mean;
    den += w;
  }
  return num / den;
}

}  // namespace detail

inline double quadrature_oracle(const SignalPrior& prior, double r, double gamma) {
  using gnp_vamp::detail::log_normal_pdf;
  prior.validate();
  const double noise_var = 1.0 / gamma;
  std::vector<detail::Component> parts;
  if (prior.rho > 0.0) {
    parts.push_back({std::log(prior.rho) + log_normal_pdf(r, 0.0, noise_var), 0.0});
  }
  if (prior.rho < 1.0) {
    const double v = prior.active_variance;
    auto logf = [&](double x) {
      return std::log1p(-prior.rho) + log_normal_pdf(x, 0.0, v) + log_normal_pdf(r, x, noise_var);
    };
    const double curv = gamma + 1.0 / v;
    const auto m = detail::log_concave_moment(logf, std::min(0.0, r), std::max(0.0, r), curv,
                                              1.0 / std::sqrt(curv));
    parts.push_back({m.log_mass, m.mean});
  }
  return detail::mixture_mean(parts);
}

inline double quadrature_oracle(const GaussianNoise& prior, double r, double gamma) {
  using gnp_vamp::detail::log_normal_pdf;
  prior.validate();
  auto logf = [&](double x) {
    return log_normal_pdf(x, 0.0, prior.variance) + log_normal_pdf(r, x, 1.0 / gamma);
  };
  const double curv = gamma + 1.0 / prior.variance;
  return detail::log_concave_moment(logf, std::min(0.0, r), std::max(0.0, r), curv,
                                    1.0 / std::sqrt(curv))
      .mean;
}

inline double quadrature_oracle(const LaplaceNoise& prior, double r, double gamma) {
  using gnp_vamp::detail::log_normal_pdf;
  prior.validate();
  auto logf = [&](double x) {
    return -std::log(2.0 * prior.b) - std::abs(x - prior.mu) / prior.b +
           log_normal_pdf(r, x, 1.0 / gamma);
  };
  const double fine = std::min(prior.b, 1.0 / std::sqrt(gamma));
  return detail::log_concave_moment(logf, std::min(prior.mu, r), std::max(prior.mu, r), gamma,
                                    fine, prior.mu)
      .mean;
}

/// Two atoms: direct Bayes rule over w = +s and w = -s.
inline double quadrature_oracle(const BinaryNoise& prior, double r, double gamma) {
  using gnp_vamp::detail::log_normal_pdf;
  prior.validate();
  const double var = 1.0 / gamma;
  return detail::mixture_mean({{std::log(0.5) + log_normal_pdf(r, prior.s, var), prior.s},
                               {std::log(0.5) + log_normal_pdf(r, -prior.s, var), -prior.s}});
}

inline double quadrature_oracle(const NoisePrior& prior, double r, double gamma) {
  return std::visit([&](const auto& p) { return quadrature_oracle(p, r, gamma); }, prior);
}

}  // namespace gnp_vamp::oracles
