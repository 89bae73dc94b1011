#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace gnp_vamp::detail {

// Fixed-shape recursive summation. The association order depends only on the
// length, so the result does not depend on how a caller partitions work.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_mean(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// Scaled complementary error function exp(x^2) * erfc(x).
inline double erfcx(double x) {
  if (x < 26.0) {
    // exp(x^2) with the rounding error of x*x folded back in
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * std::exp(lo) * std::erfc(x);
  }
  // asymptotic series, terms below 1e-19 by k = 8 for x >= 26
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

// log of the standard normal CDF
inline double log_normal_cdf(double t) {
  if (t < 0.0) {
    return std::log(0.5 * erfcx(-t / std::numbers::sqrt2)) - 0.5 * t * t;
  }
  return std::log1p(-0.5 * std::erfc(t / std::numbers::sqrt2));
}

// Inverse Mills ratio phi(t) / Phi(t), finite for all t.
inline double inverse_mills(double t) {
  constexpr double k = 0.79788456080286535588;  // sqrt(2/pi)
  return k / erfcx(-t / std::numbers::sqrt2);
}

// log N(x; mean, var)
inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

}  // namespace gnp_vamp::detail
