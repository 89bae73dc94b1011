#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gnp_vamp/engine.hpp"
#include "gnp_vamp/harness/instance.hpp"
#include "gnp_vamp/metrics.hpp"

namespace gnp_vamp::harness {

struct SweepRecord {
  double snr_db = 0.0;
  Algorithm algorithm = Algorithm::gnp;
  NoiseKind noise_model = NoiseKind::gaussian;
  int trial = 0;
  std::uint64_t seed = 0;
  double nrmse = 0.0;  ///< NaN when the run diverged
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  int signal_resamples = 0;
  double max_residual = 0.0;  ///< worst ||y - A x - w|| / ||y|| over the LMMSE outputs of the run
};

struct AggregateRow {
  double snr_db = 0.0;
  Algorithm algorithm = Algorithm::gnp;
  double mean_nrmse = 0.0;
  double stderr_nrmse = 0.0;
  int n_trials = 0;  ///< rows that did not diverge
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<AggregateRow> aggregates;
};

inline constexpr const char* threads_env_var = "VAMP_GNP_THREADS";

/// Worker count from VAMP_GNP_THREADS; unset or 0 means one per hardware thread.
inline unsigned resolve_thread_count() {
  unsigned requested = 0;
  if (const char* env = std::getenv(threads_env_var); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0) {
      throw InvalidArgument(std::string(threads_env_var) + " must be a nonnegative integer, got '" +
                            env + "'");
    }
    requested = static_cast<unsigned>(v);
  }
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

/// Mean and standard error (sample sd / sqrt(n)) per (snr, algorithm), over
/// rows that did not diverge. Output follows the config's grid and algorithm order.
inline std::vector<AggregateRow> aggregate(const std::vector<SweepRecord>& records,
                                           const SweepConfig& config) {
  std::vector<AggregateRow> out;
  for (double snr : config.snr_grid_db) {
    for (Algorithm alg : config.algorithms) {
      std::vector<double> vals;
      for (const auto& r : records) {
        if (r.snr_db == snr && r.algorithm == alg && !r.diverged) vals.push_back(r.nrmse);
      }
      AggregateRow row;
      row.snr_db = snr;
      row.algorithm = alg;
      row.n_trials = static_cast<int>(vals.size());
      if (vals.empty()) {
        row.mean_nrmse = row.stderr_nrmse = std::numeric_limits<double>::quiet_NaN();
      } else {
        double sum = 0.0;
        for (double v : vals) sum += v;
        row.mean_nrmse = sum / static_cast<double>(vals.size());
        if (vals.size() > 1) {
          double ss = 0.0;
          for (double v : vals) ss += (v - row.mean_nrmse) * (v - row.mean_nrmse);
          const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
          row.stderr_nrmse = sd / std::sqrt(static_cast<double>(vals.size()));
        }
      }
      out.push_back(row);
    }
  }
  return out;
}

/// Runs every requested algorithm on one generated instance.
inline std::vector<SweepRecord> run_trial(const SweepConfig& config, std::size_t snr_index,
                                          int trial) {
  const double snr = config.snr_grid_db[snr_index];
  const std::uint64_t seed = trial_seed(config.base_seed, snr_index, static_cast<std::uint64_t>(trial));
  const GeneratedInstance g = gen_instance(seed, config, snr);
  const OperatorCache cache(g.instance.A);
  const SignalPrior signal{config.rho, 1.0};

  std::vector<SweepRecord> out;
  for (Algorithm alg : config.algorithms) {
    SweepRecord rec;
    rec.snr_db = snr;
    rec.algorithm = alg;
    rec.noise_model = kind_of(config.noise_model);
    rec.trial = trial;
    rec.seed = seed;
    rec.signal_resamples = g.signal_resamples;
    auto worst = [](const std::vector<IterationRecord>& trace) {
      double w = 0.0;
      for (const auto& it : trace) w = std::max(w, it.residual);
      return w;
    };
    try {
      const RunResult r = alg == Algorithm::gnp
                              ? run_gnp_vamp(g.instance, cache, signal, g.noise, config.engine)
                              : run_standard_vamp(g.instance, cache, signal, g.noise_variance,
                                                  config.engine);
      rec.nrmse = nrmse(r.x_hat, g.instance);
      rec.iterations = r.iterations_used;
      rec.converged = r.converged;
      rec.max_residual = worst(r.trace);
    } catch (const DivergenceError& e) {
      rec.nrmse = std::numeric_limits<double>::quiet_NaN();
      rec.iterations = e.iteration() + 1;
      rec.diverged = true;
      rec.max_residual = worst(e.trace());
    }
    out.push_back(rec);
  }
  return out;
}

/// Monte-Carlo sweep over (snr, trial). Each trial's instance is generated
/// once and shared by all algorithms. Records come back sorted by
/// (snr index, algorithm order, trial), independent of `threads`.
inline SweepResult run_sweep(const SweepConfig& config, unsigned threads = 0) {
  config.validate();
  if (threads == 0) threads = resolve_thread_count();

  const std::size_t n_snr = config.snr_grid_db.size();
  const std::size_t n_jobs = n_snr * static_cast<std::size_t>(config.trials);
  std::vector<std::vector<SweepRecord>> slots(n_jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      try {
        slots[job] = run_trial(config, job / config.trials, static_cast<int>(job % config.trials));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_jobs;
      }
    }
  };
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_jobs));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (std::size_t snr_idx = 0; snr_idx < n_snr; ++snr_idx) {
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      for (int trial = 0; trial < config.trials; ++trial) {
        result.records.push_back(slots[snr_idx * config.trials + trial][a]);
      }
    }
  }
  result.aggregates = aggregate(result.records, config);
  return result;
}

}  // namespace gnp_vamp::harness
