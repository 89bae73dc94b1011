// gnp-vamp: Monte-Carlo sweeps and single-instance solves.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnp_vamp/gnp_vamp.hpp"

namespace gv = gnp_vamp;
namespace gh = gnp_vamp::harness;

namespace {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, io_error = 3, numerical_error = 4 };

struct NoiseArgs {
  std::string kind = "laplace";
  double variance = 1.0;
  double mu = 0.0;
  double b = 1.0;
  double s = 1.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--noise", kind, "Noise model")
        ->check(CLI::IsMember({"gaussian", "laplace", "binary"}))
        ->capture_default_str();
    cmd.add_option("--noise-variance", variance, "Gaussian noise variance")->capture_default_str();
    cmd.add_option("--laplace-mu", mu, "Laplace location")->capture_default_str();
    cmd.add_option("--laplace-b", b, "Laplace scale")->capture_default_str();
    cmd.add_option("--binary-s", s, "Binary noise amplitude (+-s)")->capture_default_str();
  }

  gv::NoisePrior prior() const {
    switch (gv::parse_noise_kind(kind)) {
      case gv::NoiseKind::gaussian: return gv::GaussianNoise{variance};
      case gv::NoiseKind::laplace: return gv::LaplaceNoise{mu, b};
      case gv::NoiseKind::binary: return gv::BinaryNoise{s};
    }
    throw gv::InvalidArgument("unknown noise model");
  }
};

struct EngineArgs {
  int max_iters = 100;
  double tol = 1e-8;
  double damping = 1.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--max-iter", max_iters, "Iteration cap")->capture_default_str();
    cmd.add_option("--tol", tol, "Relative-change stopping tolerance")->capture_default_str();
    cmd.add_option("--damping", damping, "Damping factor in (0, 1]; 1 disables damping")
        ->capture_default_str();
  }
};

int run_sweep_cmd(CLI::App& cmd, const NoiseArgs& noise, const EngineArgs& eng,
                  const std::string& config_path, const std::vector<double>& snr, int trials, int m,
                  int n, double rho, const std::vector<std::string>& algorithms,
                  std::uint64_t seed, unsigned threads, const std::string& out_dir,
                  bool emit_plot) {
  gh::SweepConfig cfg;
  if (!config_path.empty()) cfg = gh::load_config(config_path);
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };

  // With --config, only flags given explicitly override the file.
  const bool all = config_path.empty();
  if (all || given("--noise") || given("--noise-variance") || given("--laplace-mu") ||
      given("--laplace-b") || given("--binary-s")) {
    cfg.noise_model = noise.prior();
  }
  if (all || given("--snr")) cfg.snr_grid_db = snr;
  if (all || given("--trials")) cfg.trials = trials;
  if (all || given("--m")) cfg.m = m;
  if (all || given("--n")) cfg.n = n;
  if (all || given("--rho")) cfg.rho = rho;
  if (all || given("--seed")) cfg.base_seed = seed;
  if (all || given("--algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : algorithms) cfg.algorithms.push_back(gh::parse_algorithm(a));
  }
  if (all || given("--max-iter")) cfg.engine.max_iters = eng.max_iters;
  if (all || given("--tol")) cfg.engine.tol = eng.tol;
  if (all || given("--damping")) cfg.engine.damping = eng.damping;
  cfg.validate();

  const auto t0 = std::chrono::steady_clock::now();
  const gh::SweepResult res = gh::run_sweep(cfg, threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const gh::OutputPaths paths = gh::emit_outputs(res, cfg, out_dir, emit_plot);

  int diverged = 0;
  for (const auto& r : res.records) diverged += r.diverged ? 1 : 0;

  std::printf("%-8s %-9s %-14s %-14s %s\n", "snr_db", "algorithm", "mean_nrmse", "stderr", "n");
  for (const auto& a : res.aggregates) {
    std::printf("%-8g %-9s %-14.6g %-14.6g %d\n", a.snr_db, std::string(gh::to_string(a.algorithm)).c_str(),
                a.mean_nrmse, a.stderr_nrmse, a.n_trials);
  }
  std::printf("%zu rows (%d diverged) in %.1f s -> %s\n", res.records.size(), diverged, secs,
              paths.trials_csv.parent_path().string().c_str());
  return ok;
}

int run_solve_cmd(const std::string& file, const NoiseArgs& noise, const EngineArgs& eng,
                  const std::string& algorithm, double rho, double active_variance,
                  const std::string& out_path) {
  const gv::ProblemInstance inst = gh::read_problem_file(file);
  gv::EngineConfig cfg;
  cfg.max_iters = eng.max_iters;
  cfg.tol = eng.tol;
  cfg.damping = eng.damping;
  const gv::SignalPrior signal{rho, active_variance};
  const gv::NoisePrior prior = noise.prior();

  const gv::RunResult r = gh::parse_algorithm(algorithm) == gh::Algorithm::gnp
                              ? gv::run_gnp_vamp(inst, signal, prior, cfg)
                              : gv::run_standard_vamp(inst, signal, gv::noise_variance(prior), cfg);

  std::ofstream file_out;
  if (!out_path.empty()) {
    file_out.open(out_path);
    if (!file_out) throw gh::IoError("cannot open '" + out_path + "' for writing");
  }
  std::ostream& os = out_path.empty() ? std::cout : file_out;
  for (Eigen::Index i = 0; i < r.x_hat.size(); ++i) os << gh::detail::fmt_double(r.x_hat[i]) << '\n';
  os.flush();
  if (!os) throw gh::IoError("failed writing the estimate");

  std::fprintf(stderr, "%s: %d iterations, %s, relative residual %.3g\n", algorithm.c_str(),
               r.iterations_used, r.converged ? "converged" : "not converged",
               gv::relative_residual(inst.A, inst.y, r.x_hat, r.w_hat));
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VAMP with arbitrary i.i.d. noise priors: sweeps and single solves", "gnp-vamp"};
  app.set_version_flag("--version", std::string(gv::library_version));
  app.require_subcommand(1);

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo NRMSE sweep over an SNR grid");
  NoiseArgs sweep_noise;
  EngineArgs sweep_eng;
  std::string config_path, out_dir;
  std::vector<double> snr{0, 5, 10, 15, 20};
  std::vector<std::string> algorithms{"gnp", "standard"};
  int trials = 100, m = 250, n = 500;
  double rho = 0.95;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  bool emit_plot = false;
  sweep_noise.add_to(*sweep);
  sweep_eng.add_to(*sweep);
  sweep->add_option("--config", config_path, "Start from a manifest.json or config file")
      ->check(CLI::ExistingFile);
  sweep->add_option("--snr", snr, "SNR grid in dB")->delimiter(',')->capture_default_str();
  sweep->add_option("--trials", trials, "Trials per SNR point")->capture_default_str();
  sweep->add_option("--m", m, "Measurements")->capture_default_str();
  sweep->add_option("--n", n, "Signal length")->capture_default_str();
  sweep->add_option("--rho", rho, "Probability that a signal entry is zero")->capture_default_str();
  sweep->add_option("--algorithms", algorithms, "Algorithms to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"gnp", "standard"}))
      ->capture_default_str();
  sweep->add_option("--seed", seed, "Base seed")->capture_default_str();
  sweep->add_option("--threads", threads, "Worker threads (0: $VAMP_GNP_THREADS or all cores)")
      ->capture_default_str();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_flag("--emit-plot", emit_plot, "Also write plot_nrmse.py");

  // solve
  CLI::App* solve = app.add_subcommand("solve", "Solve one instance read from a file");
  NoiseArgs solve_noise;
  EngineArgs solve_eng;
  std::string problem_file, solve_out, algorithm = "gnp";
  double solve_rho = 0.95, active_variance = 1.0;
  solve_noise.add_to(*solve);
  solve_eng.add_to(*solve);
  solve->add_option("file", problem_file, "Problem file: 'M N', then M rows of A, then y")
      ->required();
  solve->add_option("--algorithm", algorithm, "gnp or standard")
      ->check(CLI::IsMember({"gnp", "standard"}))
      ->capture_default_str();
  solve->add_option("--rho", solve_rho, "Probability that a signal entry is zero")
      ->capture_default_str();
  solve->add_option("--active-variance", active_variance, "Variance of nonzero signal entries")
      ->capture_default_str();
  solve->add_option("--out", solve_out, "Write the estimate here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*sweep) {
      return run_sweep_cmd(*sweep, sweep_noise, sweep_eng, config_path, snr, trials, m, n, rho,
                           algorithms, seed, threads, out_dir, emit_plot);
    }
    return run_solve_cmd(problem_file, solve_noise, solve_eng, algorithm, solve_rho,
                         active_variance, solve_out);
  } catch (const gh::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io_error;
  } catch (const gv::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  } catch (const gv::RankDeficiencyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return numerical_error;
  } catch (const gv::DegenerateConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
}
