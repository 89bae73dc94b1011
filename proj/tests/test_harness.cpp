#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "gnp_vamp/gnp_vamp.hpp"
#include "test_support.hpp"

using namespace gnp_vamp;
using namespace gnp_vamp::harness;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

SweepConfig small_config(NoisePrior noise = LaplaceNoise{0.0, 1.0}) {
  SweepConfig c;
  c.m = 40;
  c.n = 80;
  c.rho = 0.9;
  c.trials = 3;
  c.snr_grid_db = {0.0, 10.0, 20.0};
  c.noise_model = noise;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gnp_vamp_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("generated instances hit the requested snr exactly", "[harness]") {
  for (const NoisePrior& noise :
       {NoisePrior{GaussianNoise{1.0}}, NoisePrior{LaplaceNoise{0.0, 1.0}}, NoisePrior{BinaryNoise{1.0}}}) {
    const auto cfg = small_config(noise);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (double snr : {-5.0, 0.0, 10.0, 33.3}) {
        const auto g = gen_instance(seed, cfg, snr);
        CHECK_THAT(realized_snr_db(g.instance), WithinAbs(snr, 1e-9));
        CHECK_NOTHROW(g.instance.validate());
      }
    }
  }
}

TEST_CASE("realized noise parameters match the drawn noise", "[harness]") {
  auto cfg = small_config(BinaryNoise{1.0});
  const auto g = gen_instance(9, cfg, 7.0);
  const double s = std::get<BinaryNoise>(g.noise).s;
  CHECK((g.instance.true_w->array().abs() - s).abs().maxCoeff() < 1e-12 * s);
  CHECK_THAT(g.noise_variance, WithinRel(s * s, 1e-15));

  cfg.noise_model = LaplaceNoise{0.0, 1.0};
  const auto gl = gen_instance(9, cfg, 7.0);
  const double b = std::get<LaplaceNoise>(gl.noise).b;
  CHECK_THAT(gl.noise_variance, WithinRel(2 * b * b, 1e-15));
}

TEST_CASE("generator draws are reproducible and seed dependent", "[harness]") {
  const auto cfg = small_config();
  const auto a = gen_instance(123, cfg, 5.0);
  const auto b = gen_instance(123, cfg, 5.0);
  const auto c = gen_instance(124, cfg, 5.0);
  CHECK(a.instance.A == b.instance.A);
  CHECK(a.instance.y == b.instance.y);
  CHECK(*a.instance.true_x == *b.instance.true_x);
  CHECK(a.instance.A != c.instance.A);
}

TEST_CASE("an all-zero signal prior is a degenerate config", "[harness]") {
  auto cfg = small_config();
  cfg.rho = 1.0;
  CHECK_THROWS_AS(gen_instance(1, cfg, 10.0), DegenerateConfigError);
}

TEST_CASE("near-degenerate signals are resampled and counted", "[harness]") {
  auto cfg = small_config();
  cfg.n = 2;
  cfg.m = 1;
  cfg.rho = 0.9;  // all zero with probability 0.81
  int resampled = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = gen_instance(seed, cfg, 10.0);
    CHECK((g.instance.true_x->array() != 0.0).any());
    resampled += g.signal_resamples;
  }
  CHECK(resampled > 0);
}

TEST_CASE("trial seeds differ across the grid", "[harness]") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 5; ++s)
    for (std::uint64_t t = 0; t < 100; ++t) seen.insert(trial_seed(42, s, t));
  CHECK(seen.size() == 500);
  CHECK(trial_seed(42, 1, 0) != trial_seed(42, 0, 1));
}

TEST_CASE("nrmse examples", "[harness]") {
  ProblemInstance inst;
  inst.A = Matrix::Identity(2, 2);
  inst.y = Vector::Zero(2);
  inst.true_x = Vector::Unit(2, 0);
  CHECK(nrmse(*inst.true_x, inst) == 0.0);
  CHECK(nrmse(Vector::Zero(2), inst) == 1.0);
  CHECK_THAT(nrmse(Vector::Unit(2, 1), inst), WithinAbs(1.41421356, 1e-8));
  inst.true_x.reset();
  CHECK_THROWS_AS(nrmse(Vector::Zero(2), inst), InvalidArgument);
}

TEST_CASE("aggregate mean and standard error", "[harness]") {
  SweepConfig cfg = small_config();
  cfg.snr_grid_db = {10.0};
  cfg.algorithms = {Algorithm::gnp};
  std::vector<SweepRecord> recs(2);
  recs[0].snr_db = recs[1].snr_db = 10.0;
  recs[0].nrmse = 0.2;
  recs[1].nrmse = 0.4;
  const auto agg = aggregate(recs, cfg);
  REQUIRE(agg.size() == 1);
  CHECK_THAT(agg[0].mean_nrmse, WithinAbs(0.3, 1e-15));
  CHECK_THAT(agg[0].stderr_nrmse, WithinAbs(0.1, 1e-15));
  CHECK(agg[0].n_trials == 2);

  SweepRecord div = recs[0];
  div.diverged = true;
  div.nrmse = std::nan("");
  recs.push_back(div);
  CHECK(aggregate(recs, cfg)[0].n_trials == 2);
}

TEST_CASE("single-trial sweep yields one record and a two-line csv", "[harness]") {
  SweepConfig cfg = small_config();
  cfg.trials = 1;
  cfg.snr_grid_db = {10.0};
  cfg.algorithms = {Algorithm::gnp};
  const auto res = run_sweep(cfg, 1);
  REQUIRE(res.records.size() == 1);
  const std::string csv = trials_csv(res.records);
  CHECK(count_lines(csv) == 2);
  CHECK(csv.rfind(trials_csv_header, 0) == 0);
  CHECK(aggregate_csv(res.aggregates).rfind(aggregate_csv_header, 0) == 0);
}

TEST_CASE("sweep records are ordered and paired", "[harness]") {
  const auto cfg = small_config();
  const auto res = run_sweep(cfg, 1);
  REQUIRE(res.records.size() == 3 * 2 * 3);
  std::size_t k = 0;
  for (std::size_t s = 0; s < 3; ++s)
    for (Algorithm a : cfg.algorithms)
      for (int t = 0; t < 3; ++t) {
        const auto& r = res.records[k++];
        CHECK(r.snr_db == cfg.snr_grid_db[s]);
        CHECK(r.algorithm == a);
        CHECK(r.trial == t);
        CHECK(r.seed == trial_seed(cfg.base_seed, s, t));
        CHECK(r.noise_model == NoiseKind::laplace);
        CHECK(std::isfinite(r.nrmse));
        CHECK(r.max_residual <= 1e-8);
      }

  // aggregates recompute from the rows
  for (const auto& row : res.aggregates) {
    std::vector<double> v;
    for (const auto& r : res.records)
      if (r.snr_db == row.snr_db && r.algorithm == row.algorithm) v.push_back(r.nrmse);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    CHECK_THAT(row.mean_nrmse, WithinAbs(mean, 1e-12));
    CHECK_THAT(row.stderr_nrmse, WithinAbs(std::sqrt(ss / (v.size() - 1)) / std::sqrt(v.size()), 1e-12));
  }
}

TEST_CASE("sweep output is independent of the worker count", "[harness]") {
  const auto cfg = small_config(BinaryNoise{1.0});
  const auto one = run_sweep(cfg, 1);
  const auto four = run_sweep(cfg, 4);
  CHECK(trials_csv(one.records) == trials_csv(four.records));
  CHECK(aggregate_csv(one.aggregates) == aggregate_csv(four.aggregates));
}

TEST_CASE("worker count comes from the environment", "[harness]") {
  ::setenv(threads_env_var, "3", 1);
  CHECK(resolve_thread_count() == 3);
  ::setenv(threads_env_var, "0", 1);
  CHECK(resolve_thread_count() >= 1);
  ::setenv(threads_env_var, "lots", 1);
  CHECK_THROWS_AS(resolve_thread_count(), InvalidArgument);
  ::unsetenv(threads_env_var);
  CHECK(resolve_thread_count() >= 1);
}

TEST_CASE("sweep config validation", "[harness]") {
  auto bad = small_config();
  bad.m = bad.n;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = small_config();
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = small_config();
  bad.snr_grid_db.clear();
  CHECK_THROWS_AS(run_sweep(bad), InvalidArgument);
  bad = small_config();
  bad.noise_model = BinaryNoise{0.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(parse_algorithm("amp"), InvalidArgument);
  CHECK_THROWS_AS(parse_noise_kind("cauchy"), InvalidArgument);
}

TEST_CASE("outputs land on disk and the manifest round-trips", "[harness]") {
  auto cfg = small_config(BinaryNoise{1.0});
  cfg.engine.damping = 0.8;
  cfg.base_seed = 0xfeedfacecafebeefULL;
  const auto res = run_sweep(cfg, 2);
  const fs::path dir = scratch_dir("emit");
  const auto paths = emit_outputs(res, cfg, dir, true);
  CHECK(count_lines(slurp(paths.trials_csv)) == 1 + static_cast<int>(res.records.size()));
  CHECK(count_lines(slurp(paths.aggregate_csv)) == 1 + static_cast<int>(res.aggregates.size()));
  CHECK(fs::exists(paths.plot_script));

  const auto manifest = nlohmann::json::parse(slurp(paths.manifest));
  CHECK(manifest.at("library") == "gnp_vamp");
  CHECK(manifest.at("version") == std::string(library_version));

  const SweepConfig back = load_config(paths.manifest);
  CHECK(config_to_json(back) == config_to_json(cfg));
  const auto again = run_sweep(back, 1);
  const auto paths2 = emit_outputs(again, back, scratch_dir("emit2"));
  CHECK(slurp(paths2.trials_csv) == slurp(paths.trials_csv));
  CHECK(slurp(paths2.aggregate_csv) == slurp(paths.aggregate_csv));
}

TEST_CASE("io failures carry the path", "[harness]") {
  const fs::path blocker = scratch_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  SweepResult empty;
  try {
    emit_outputs(empty, small_config(), blocker / "sub");
    FAIL("expected an io error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(blocker.string()) != std::string::npos);
  }
  CHECK_THROWS_AS(load_config(blocker / "missing.json"), IoError);
  CHECK_THROWS_AS(load_config(blocker), IoError);
}

TEST_CASE("csv numbers round-trip exactly", "[harness]") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-9}) {
    CHECK(std::strtod(harness::detail::fmt_double(v).c_str(), nullptr) == v);
  }
  CHECK(harness::detail::fmt_double(0.25) == "0.25");
  CHECK(harness::detail::fmt_double(std::nan("")) == "nan");
}

TEST_CASE("problem files parse with commas or whitespace", "[harness]") {
  std::istringstream ws("2 3\n1 0 0\n0 1 0\n4 5\n");
  const auto p = parse_problem(ws);
  CHECK(p.A == (Matrix(2, 3) << 1, 0, 0, 0, 1, 0).finished());
  CHECK(p.y == Vector::Map(std::vector<double>{4, 5}.data(), 2));

  std::istringstream csv("2,3\n1,0,0\n0,1,0\n4,5\n");
  CHECK(parse_problem(csv).A == p.A);

  std::ostringstream out;
  write_problem(out, p);
  std::istringstream back(out.str());
  CHECK(parse_problem(back).y == p.y);

  std::istringstream short_file("2 3\n1 0 0\n0 1 0\n4\n");
  CHECK_THROWS_AS(parse_problem(short_file), IoError);
  std::istringstream junk("2 3\n1 0 zero\n0 1 0\n4 5\n");
  CHECK_THROWS_AS(parse_problem(junk), IoError);
  std::istringstream tall("3 2\n1 0\n0 1\n1 1\n1 2 3\n");
  CHECK_THROWS_AS(parse_problem(tall), InvalidArgument);
  CHECK_THROWS_AS(read_problem_file("/nonexistent/problem.txt"), IoError);
}
