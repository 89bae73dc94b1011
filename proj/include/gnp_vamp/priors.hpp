#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <variant>

#include "gnp_vamp/errors.hpp"

namespace gnp_vamp {

/// Bernoulli-Gaussian signal prior: mass `rho` on zero, N(0, active_variance) otherwise.
struct SignalPrior {
  double rho = 0.95;
  double active_variance = 1.0;

  void validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("SignalPrior: rho must lie in [0, 1]");
    if (!(active_variance > 0.0)) throw InvalidArgument("SignalPrior: active_variance must be > 0");
  }
};

struct GaussianNoise {
  double variance = 1.0;

  void validate() const {
    if (!(variance > 0.0)) throw InvalidArgument("GaussianNoise: variance must be > 0");
  }
};

/// p(w) = exp(-|w - mu| / b) / (2b)
struct LaplaceNoise {
  double mu = 0.0;
  double b = 1.0;

  void validate() const {
    if (!std::isfinite(mu)) throw InvalidArgument("LaplaceNoise: mu must be finite");
    if (!(b > 0.0)) throw InvalidArgument("LaplaceNoise: b must be > 0");
  }
  double variance() const { return 2.0 * b * b; }
};

/// p(w) = (delta(w - s) + delta(w + s)) / 2
struct BinaryNoise {
  double s = 1.0;

  void validate() const {
    if (!(s > 0.0)) throw InvalidArgument("BinaryNoise: s must be > 0");
  }
  double variance() const { return s * s; }
};

using NoisePrior = std::variant<GaussianNoise, LaplaceNoise, BinaryNoise>;

enum class NoiseKind { gaussian, laplace, binary };

inline NoiseKind kind_of(const NoisePrior& p) { return static_cast<NoiseKind>(p.index()); }

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::laplace: return "laplace";
    case NoiseKind::binary: return "binary";
  }
  return "unknown";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "laplace") return NoiseKind::laplace;
  if (s == "binary") return NoiseKind::binary;
  throw InvalidArgument("unknown noise model '" + std::string(s) + "'");
}

inline void validate(const NoisePrior& p) {
  std::visit([](const auto& q) { q.validate(); }, p);
}

/// Variance of the noise distribution; what a Gaussian-noise solver is told.
inline double noise_variance(const NoisePrior& p) {
  struct {
    double operator()(const GaussianNoise& q) const { return q.variance; }
    double operator()(const LaplaceNoise& q) const { return q.variance(); }
    double operator()(const BinaryNoise& q) const { return q.variance(); }
  } v;
  return std::visit(v, p);
}

}  // namespace gnp_vamp
