#include <gtest/gtest.h>
#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gfl/errors.hpp"
#include "gfl/experiments.hpp"
#include "json.hpp"

using namespace gfl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gfl-exp-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_poly(const fs::path& out, std::size_t steps) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Poly1d);
  c.activations = {Activation(ActivationKind::Tanh)};
  c.seeds = {0};
  c.steps = steps;
  c.dataset_size = 200;
  c.batch = 20;
  c.log_every = 5;
  c.workers = 1;
  c.output_dir = out;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GFL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// L = 0.5 |theta|^2
double quadratic(std::uint64_t, std::span<const double> th, std::span<double> g) {
  double s = 0;
  for (std::size_t i = 0; i < th.size(); ++i) {
    g[i] = th[i];
    s += th[i] * th[i];
  }
  return 0.5 * s;
}

}  // namespace

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base) {
    for (std::uint64_t stream = 0; stream < 6; ++stream) seen.insert(derive_seed(base, stream));
  }
  EXPECT_EQ(seen.size(), 120u);
  EXPECT_EQ(derive_seed(7, 2), derive_seed(7, 2));
}

TEST(ParallelFor, VisitsEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 6) throw DomainError("task 6");
                            }),
               DomainError);
}

TEST(Train, ZeroStepsLogsOnlyTheStart) {
  std::vector<double> theta = {1.0, 2.0};
  TrainOptions opt;
  opt.steps = 0;
  const auto rows = train(quadratic, theta, opt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].step, 0u);
  EXPECT_EQ(rows[0].loss, 2.5);
  EXPECT_EQ(rows[0].ema_loss, 2.5);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
}

TEST(Train, LogCadenceAndCallback) {
  std::vector<double> theta = {1.0, 2.0};
  TrainOptions opt;
  opt.optimizer = SgdConfig{0.1};
  opt.steps = 10;
  opt.log_every = 3;
  opt.seed = 4;
  std::vector<std::uint64_t> seen;
  opt.on_log = [&](std::uint64_t s, std::span<const double>) { seen.push_back(s); };
  std::vector<std::uint64_t> checkpoints;
  opt.checkpoint_every = 4;
  opt.on_checkpoint = [&](std::uint64_t s, std::span<const double>) { checkpoints.push_back(s); };
  const auto rows = train(quadratic, theta, opt);
  EXPECT_EQ(checkpoints, (std::vector<std::uint64_t>{0, 4, 8, 10}));
  std::vector<std::uint64_t> steps;
  for (const auto& r : rows) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<std::uint64_t>{0, 3, 6, 9, 10}));
  EXPECT_EQ(seen, steps);
  EXPECT_EQ(rows.back().seed, 4u);
  // SGD on the quadratic: theta_k = 0.9^k theta_0
  EXPECT_NEAR(rows.back().theta_norm, std::pow(0.9, 10) * std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(theta[0], std::pow(0.9, 10), 1e-12);
}

TEST(Train, DivergenceIsANumericError) {
  std::vector<double> theta = {1.0};
  TrainOptions opt;
  opt.optimizer = SgdConfig{1e200};
  opt.steps = 20;
  EXPECT_THROW(train(quadratic, theta, opt), NumericError);
}

TEST(Train, TailNormSlope) {
  std::vector<MetricsRow> rows;
  for (std::uint64_t s = 0; s <= 100; s += 10) rows.push_back({s, 0, 0, s < 50 ? 1.0 : 2.0 * s, 0, 0});
  EXPECT_NEAR(tail_norm_slope(rows, 0.5), 2.0, 1e-12);
}

TEST(PolynomialRunner, ZeroStepsWritesOnlyTheInitialRow) {
  const auto out = scratch("poly0");
  const auto res = run_polynomial_experiment(small_poly(out, 0));
  ASSERT_EQ(res.runs.size(), 1u);
  EXPECT_EQ(res.runs[0].final_theta_norm, res.runs[0].initial_theta_norm);
  std::ifstream f(out / "metrics_tanh_seed0.csv");
  const auto rows = read_metrics_csv(f);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].step, 0u);
  for (const char* name : {"summary.json", "manifest.json", "loss.svg", "theta_norm.svg"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
}

TEST(PolynomialRunner, ReproducibleBytes) {
  const auto a = scratch("polyA"), b = scratch("polyB");
  run_polynomial_experiment(small_poly(a, 40));
  run_polynomial_experiment(small_poly(b, 40));
  const auto ca = slurp(a / "metrics_tanh_seed0.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b / "metrics_tanh_seed0.csv"));
}

TEST(Manifest, RecordsTheRun) {
  const auto out = scratch("manifest");
  auto c = small_poly(out, 0);
  c.seeds = {3, 8};
  write_manifest(c);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["experiment"], "poly1d");
  EXPECT_EQ(m["version"], library_version());
  EXPECT_EQ(m["seeds"], (std::vector<std::uint64_t>{3, 8}));
  EXPECT_TRUE(m["created_utc"].get<std::string>().ends_with("Z"));
  EXPECT_EQ(m["config"]["batch"], 20);
}

TEST(FlowRunner, ShortHorizonIsUndetermined) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Flow);
  c.horizon = 1e-3;
  c.output_dir = scratch("flowshort");
  const auto res = run_flow_experiment(c);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].verdict.tag, VerdictTag::Undetermined);
  EXPECT_TRUE(fs::exists(c.output_dir / "trajectory_seed0.csv"));
  EXPECT_TRUE(fs::exists(c.output_dir / "verdict_seed0.json"));
}

TEST(FlowRunner, RealizableStartConverges) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Flow);
  c.init = "realizable";
  c.output_dir = scratch("flowreal");
  const auto res = run_flow_experiment(c);
  EXPECT_EQ(res[0].verdict.tag, VerdictTag::ConvergedToCriticalPoint);
  EXPECT_LE(res[0].verdict.final_grad_norm, 1e-10);
}

TEST(TheoremCSweep, ConstantTargetIsExact) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::TheoremC);
  c.target = {"3"};
  c.output_dir = scratch("sweepconst");
  for (const auto& row : run_theoremC_sweep(c)) EXPECT_LE(row.sup_error, 1e-12);
}

TEST(TheoremCSweep, SquareErrorFallsAsNormGrows) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::TheoremC);
  c.output_dir = scratch("sweepsq");
  const auto rows = run_theoremC_sweep(c);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].sup_error, rows[i - 1].sup_error);
    EXPECT_GT(rows[i].theta_norm, rows[i - 1].theta_norm);
  }
  const auto csv = slurp(c.output_dir / "error_vs_j.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "activation,j,sup_error,expected_loss,theta_norm,hidden_width");
}

TEST(KolmogorovRunner, HeatSmokeRun) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Heat);
  c.steps = 60;
  c.eval_every = 30;
  c.test_points = 16;
  c.batch = 32;
  c.output_dir = scratch("heat");
  const auto res = run_kolmogorov_experiment(c);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].test_points, 16u);
  EXPECT_LT(res[0].final_relative_mse, res[0].initial_relative_mse);
  EXPECT_TRUE(fs::exists(c.output_dir / "eval_seed0.json"));
}

TEST(KolmogorovRunner, BlackScholesAgainstMonteCarlo) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::BlackScholes);
  c.steps = 20;
  c.eval_every = 10;
  c.test_points = 8;
  c.rounds = 4;
  c.paths = 64;
  c.batch = 16;
  c.output_dir = scratch("bs");
  const auto res = run_kolmogorov_experiment(c);
  EXPECT_LE(res[0].within_mc_noise, 8u);
  EXPECT_GT(res[0].final_theta_norm, 0.0);
}

TEST(MnistRunner, SmokeRun) {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Mnist);
  c.steps = 6;
  c.eval_every = 3;
  c.subsample = 100;
  c.batch = 16;
  c.output_dir = scratch("mnist");
  const auto res = run_mnist_experiment(c);
  ASSERT_EQ(res[0].checkpoints.size(), 3u);
  for (const auto& cp : res[0].checkpoints) {
    EXPECT_GE(cp.test_accuracy, 0.0);
    EXPECT_LE(cp.test_accuracy, 1.0);
  }
  EXPECT_TRUE(fs::exists(c.output_dir / "accuracy_seed0.json"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  std::ofstream(dir / "unknown.cfg") << "learning_rate = 0.1\n";
  std::ofstream(dir / "dup.cfg") << "steps = 1\nsteps = 2\n";
  std::ofstream(dir / "ok.cfg") << "steps = 2\nactivation = \"tanh\"\ndataset_size = 100\nbatch = 10\n";
  std::ofstream(dir / "blowup.cfg") << "optimizer = \"sgd\"\nlr = 1e200\nsteps = 20\nactivation = \"tanh\"\n";
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("poly1d --config " + (dir / "unknown.cfg").string()), 2);
  EXPECT_EQ(run_cli("poly1d --config " + (dir / "dup.cfg").string()), 2);
  EXPECT_EQ(run_cli("poly7d"), 2);
  EXPECT_EQ(run_cli("run poly1d --bogus-flag"), 2);
  EXPECT_EQ(run_cli("show-config flow"), 0);
  EXPECT_EQ(run_cli("poly1d --seed 1 --workers 1 --config " + (dir / "ok.cfg").string() + " --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "metrics_tanh_seed1.csv"));
  EXPECT_EQ(run_cli("poly1d --seed 0 --config " + (dir / "blowup.cfg").string() + " --out " + (dir / "blow").string()), 3);
  EXPECT_EQ(run_cli("plot " + (dir / "ok").string()), 0);
  EXPECT_EQ(run_cli("plot - < " + (dir / "ok" / "metrics_tanh_seed1.csv").string()), 0);
}
