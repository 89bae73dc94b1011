#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnp_vamp/harness/sweep.hpp"
#include "gnp_vamp/version.hpp"

namespace gnp_vamp::harness {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << content;
  os.close();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace detail

inline constexpr const char* trials_csv_header =
    "snr_db,algorithm,noise_model,trial,seed,nrmse,iterations,converged";
inline constexpr const char* aggregate_csv_header =
    "snr_db,algorithm,mean_nrmse,stderr_nrmse,n_trials";

inline std::string trials_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << trials_csv_header << '\n';
  for (const auto& r : records) {
    os << detail::fmt_double(r.snr_db) << ',' << to_string(r.algorithm) << ','
       << to_string(r.noise_model) << ',' << r.trial << ',' << r.seed << ','
       << detail::fmt_double(r.nrmse) << ',' << r.iterations << ','
       << (r.converged ? "true" : "false") << '\n';
  }
  return os.str();
}

inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << aggregate_csv_header << '\n';
  for (const auto& r : rows) {
    os << detail::fmt_double(r.snr_db) << ',' << to_string(r.algorithm) << ','
       << detail::fmt_double(r.mean_nrmse) << ',' << detail::fmt_double(r.stderr_nrmse) << ','
       << r.n_trials << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// config <-> json

inline nlohmann::json noise_to_json(const NoisePrior& p) {
  struct {
    nlohmann::json operator()(const GaussianNoise& q) const {
      return {{"model", "gaussian"}, {"variance", q.variance}};
    }
    nlohmann::json operator()(const LaplaceNoise& q) const {
      return {{"model", "laplace"}, {"mu", q.mu}, {"b", q.b}};
    }
    nlohmann::json operator()(const BinaryNoise& q) const {
      return {{"model", "binary"}, {"s", q.s}};
    }
  } v;
  return std::visit(v, p);
}

inline NoisePrior noise_from_json(const nlohmann::json& j) {
  switch (parse_noise_kind(j.at("model").get<std::string>())) {
    case NoiseKind::gaussian: return GaussianNoise{j.value("variance", 1.0)};
    case NoiseKind::laplace: return LaplaceNoise{j.value("mu", 0.0), j.value("b", 1.0)};
    case NoiseKind::binary: return BinaryNoise{j.value("s", 1.0)};
  }
  throw InvalidArgument("unreachable noise model");
}

inline nlohmann::json config_to_json(const SweepConfig& c) {
  nlohmann::json algs = nlohmann::json::array();
  for (Algorithm a : c.algorithms) algs.push_back(std::string(to_string(a)));
  return {
      {"m", c.m},
      {"n", c.n},
      {"rho", c.rho},
      {"snr_db", c.snr_grid_db},
      {"trials", c.trials},
      {"noise", noise_to_json(c.noise_model)},
      {"algorithms", algs},
      {"base_seed", c.base_seed},
      {"engine",
       {{"max_iters", c.engine.max_iters},
        {"tol", c.engine.tol},
        {"damping", c.engine.damping},
        {"init_precision_x", c.engine.init_precision_x},
        {"init_precision_w", c.engine.init_precision_w},
        {"gamma_min", c.engine.bounds.gamma_min},
        {"gamma_max", c.engine.bounds.gamma_max}}},
  };
}

inline SweepConfig config_from_json(const nlohmann::json& j) {
  SweepConfig c;
  try {
    c.m = j.at("m").get<int>();
    c.n = j.at("n").get<int>();
    c.rho = j.at("rho").get<double>();
    c.snr_grid_db = j.at("snr_db").get<std::vector<double>>();
    c.trials = j.at("trials").get<int>();
    c.noise_model = noise_from_json(j.at("noise"));
    c.algorithms.clear();
    for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    const auto& e = j.at("engine");
    c.engine.max_iters = e.at("max_iters").get<int>();
    c.engine.tol = e.at("tol").get<double>();
    c.engine.damping = e.at("damping").get<double>();
    c.engine.init_precision_x = e.value("init_precision_x", c.engine.init_precision_x);
    c.engine.init_precision_w = e.value("init_precision_w", c.engine.init_precision_w);
    c.engine.bounds.gamma_min = e.value("gamma_min", c.engine.bounds.gamma_min);
    c.engine.bounds.gamma_max = e.value("gamma_max", c.engine.bounds.gamma_max);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("sweep config: ") + ex.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json manifest_json(const SweepConfig& c) {
  return {{"library", std::string(library_name)},
          {"version", std::string(library_version)},
          {"config", config_to_json(c)}};
}

/// Reads a manifest written by emit_outputs (or a bare config object).
inline SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw IoError("'" + path.string() + "': " + ex.what());
  }
  return config_from_json(j.contains("config") ? j.at("config") : j);
}

inline std::string plot_script() {
  return R"(#!/usr/bin/env python3
"""Mean NRMSE vs SNR per algorithm, from aggregate.csv in this directory."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "aggregate.csv"))))
labels = {"gnp": "VAMP, arbitrary i.i.d. noise prior", "standard": "standard VAMP"}
fig, ax = plt.subplots(figsize=(5, 4))
for alg in dict.fromkeys(r["algorithm"] for r in rows):
    pts = [r for r in rows if r["algorithm"] == alg]
    snr = [float(r["snr_db"]) for r in pts]
    mean = [float(r["mean_nrmse"]) for r in pts]
    err = [float(r["stderr_nrmse"]) for r in pts]
    ax.errorbar(snr, mean, yerr=err, marker="o", capsize=3, label=labels.get(alg, alg))
ax.set_yscale("log")
ax.set_xlabel("SNR [dB]")
ax.set_ylabel("NRMSE")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "nrmse_vs_snr.png")
fig.savefig(out, dpi=150)
)";
}

struct OutputPaths {
  std::filesystem::path trials_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path manifest;
  std::filesystem::path plot_script;  ///< empty unless requested
};

/// Writes trials.csv, aggregate.csv, manifest.json and optionally plot_nrmse.py into `dir`.
inline OutputPaths emit_outputs(const SweepResult& result, const SweepConfig& config,
                                const std::filesystem::path& dir, bool emit_plot = false) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  OutputPaths p{dir / "trials.csv", dir / "aggregate.csv", dir / "manifest.json", {}};
  detail::write_file(p.trials_csv, trials_csv(result.records));
  detail::write_file(p.aggregate_csv, aggregate_csv(result.aggregates));
  detail::write_file(p.manifest, manifest_json(config).dump(2) + "\n");
  if (emit_plot) {
    p.plot_script = dir / "plot_nrmse.py";
    detail::write_file(p.plot_script, plot_script());
  }
  return p;
}

// ---------------------------------------------------------------------------
// single-instance problem files: "M N", then M rows of A, then the M entries
// of y. Whitespace and commas both separate values.

inline ProblemInstance parse_problem(std::istream& is, const std::string& origin = "<stream>") {
  std::vector<double> vals;
  std::string tok;
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  for (char& ch : text) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream ss(text);
  long long m = 0, n = 0;
  if (!(ss >> m >> n) || m < 1 || n < 1) {
    throw IoError(origin + ": expected a header line 'M N' with positive integers");
  }
  while (ss >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw IoError(origin + ": not a number: '" + tok + "'");
    vals.push_back(v);
  }
  const auto expected = static_cast<std::size_t>(m * n + m);
  if (vals.size() != expected) {
    throw IoError(origin + ": expected " + std::to_string(expected) + " values after the header (M*N + M), found " +
                  std::to_string(vals.size()));
  }
  ProblemInstance inst;
  inst.A = Eigen::Map<const Matrix>(vals.data(), m, n);
  inst.y = Eigen::Map<const Vector>(vals.data() + m * n, m);
  inst.validate();
  return inst;
}

inline ProblemInstance read_problem_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return parse_problem(is, path.string());
}

inline void write_problem(std::ostream& os, const ProblemInstance& inst) {
  os << inst.rows() << ' ' << inst.cols() << '\n';
  for (Eigen::Index i = 0; i < inst.rows(); ++i) {
    for (Eigen::Index j = 0; j < inst.cols(); ++j) {
      os << (j ? " " : "") << detail::fmt_double(inst.A(i, j));
    }
    os << '\n';
  }
  for (Eigen::Index i = 0; i < inst.rows(); ++i) os << (i ? " " : "") << detail::fmt_double(inst.y[i]);
  os << '\n';
}

}  // namespace gnp_vamp::harness
