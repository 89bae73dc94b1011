#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gnp_vamp/engine.hpp"
#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/lmmse.hpp"
#include "gnp_vamp/priors.hpp"

namespace gnp_vamp::harness {

enum class Algorithm { gnp, standard };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::gnp ? "gnp" : "standard"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "gnp") return Algorithm::gnp;
  if (s == "standard") return Algorithm::standard;
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "'");
}

struct SweepConfig {
  int m = 250;
  int n = 500;
  double rho = 0.95;  ///< mass of the zero atom
  std::vector<double> snr_grid_db{0.0, 5.0, 10.0, 15.0, 20.0};
  int trials = 100;
  NoisePrior noise_model = LaplaceNoise{0.0, 1.0};  ///< nominal shape; the scale is set per draw
  std::vector<Algorithm> algorithms{Algorithm::gnp, Algorithm::standard};
  std::uint64_t base_seed = 42;
  EngineConfig engine;

  void validate() const {
    if (m < 1 || n < 1 || m >= n) {
      throw InvalidArgument("SweepConfig: need 0 < M < N, got M=" + std::to_string(m) +
                            ", N=" + std::to_string(n));
    }
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("SweepConfig: rho must lie in [0, 1]");
    if (trials < 1) throw InvalidArgument("SweepConfig: trials must be >= 1");
    if (snr_grid_db.empty()) throw InvalidArgument("SweepConfig: empty SNR grid");
    for (double s : snr_grid_db) {
      if (!std::isfinite(s)) throw InvalidArgument("SweepConfig: SNR values must be finite");
    }
    if (algorithms.empty()) throw InvalidArgument("SweepConfig: no algorithms selected");
    gnp_vamp::validate(noise_model);
    engine.validate();
  }
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t snr_index,
                                          std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ snr_index) ^ trial);
}

inline constexpr int max_signal_draws = 64;

struct GeneratedInstance {
  ProblemInstance instance;
  NoisePrior noise;           ///< the nominal model rescaled to the realized SNR
  double noise_variance = 0;  ///< variance handed to the Gaussian-noise baseline
  int signal_resamples = 0;   ///< all-zero signal draws rejected before this one
};

namespace detail {

inline NoisePrior scale_noise(const NoisePrior& p, double c) {
  struct {
    double c;
    NoisePrior operator()(const GaussianNoise& q) const { return GaussianNoise{q.variance * c * c}; }
    NoisePrior operator()(const LaplaceNoise& q) const { return LaplaceNoise{q.mu * c, q.b * c}; }
    NoisePrior operator()(const BinaryNoise& q) const { return BinaryNoise{q.s * c}; }
  } v{c};
  return std::visit(v, p);
}

inline double draw_noise(const NoisePrior& p, std::mt19937_64& rng) {
  struct {
    std::mt19937_64& rng;
    double operator()(const GaussianNoise& q) const {
      return std::normal_distribution<double>(0.0, std::sqrt(q.variance))(rng);
    }
    double operator()(const LaplaceNoise& q) const {
      const double mag = std::exponential_distribution<double>(1.0 / q.b)(rng);
      return std::bernoulli_distribution(0.5)(rng) ? q.mu + mag : q.mu - mag;
    }
    double operator()(const BinaryNoise& q) const {
      return std::bernoulli_distribution(0.5)(rng) ? q.s : -q.s;
    }
  } v{rng};
  return std::visit(v, p);
}

}  // namespace detail

/// Draws A with i.i.d. N(0,1) entries, a Bernoulli-Gaussian x, and noise from
/// the nominal model rescaled so that ||A x|| / ||w|| = 10^(snr_db / 20).
inline GeneratedInstance gen_instance(std::uint64_t seed, const SweepConfig& config, double snr_db) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution active(1.0 - config.rho);

  GeneratedInstance g;
  auto& inst = g.instance;
  inst.A.resize(config.m, config.n);
  for (Eigen::Index i = 0; i < inst.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < inst.A.cols(); ++j) inst.A(i, j) = normal(rng);
  }

  Vector x(config.n);
  for (;;) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = active(rng) ? normal(rng) : 0.0;
    if ((x.array() != 0.0).any()) break;
    if (++g.signal_resamples >= max_signal_draws) {
      throw DegenerateConfigError("gen_instance: signal was all zero in " +
                                  std::to_string(max_signal_draws) + " draws (rho = " +
                                  std::to_string(config.rho) + ")");
    }
  }

  Vector w(config.m);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = detail::draw_noise(config.noise_model, rng);

  const Vector ax = inst.A * x;
  const double scale = ax.norm() / (w.norm() * std::pow(10.0, snr_db / 20.0));
  w *= scale;
  inst.y = ax + w;
  inst.true_x = std::move(x);
  inst.true_w = std::move(w);

  g.noise = detail::scale_noise(config.noise_model, scale);
  g.noise_variance = noise_variance(g.noise);
  return g;
}

/// 10 log10(||A x||^2 / ||w||^2) of a generated instance.
inline double realized_snr_db(const ProblemInstance& inst) {
  const double signal = (inst.A * *inst.true_x).squaredNorm();
  return 10.0 * std::log10(signal / inst.true_w->squaredNorm());
}

}  // namespace gnp_vamp::harness
