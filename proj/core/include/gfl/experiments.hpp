#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gfl/config.hpp"
#include "gfl/flow.hpp"
#include "gfl/network.hpp"
#include "gfl/optim.hpp"
#include "gfl/plots.hpp"

namespace gfl {

/// Independent 64-bit stream seed for (base, stream), splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Runs fn(0..n-1) on up to `workers` threads (0 = hardware concurrency). The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Loss at theta for training step `step`; writes the gradient.
using StepObjective =
    std::function<double(std::uint64_t step, std::span<const double> theta, std::span<double> grad)>;

struct TrainOptions {
  OptimizerKind optimizer = AdamConfig{};
  std::size_t steps = 0;
  double ema_alpha = 0.95;
  std::size_t log_every = 1;
  std::uint64_t seed = 0;  ///< only copied into the rows
  /// Called after the row for `step` is logged (every log_every steps and the last).
  std::function<void(std::uint64_t step, std::span<const double> theta)> on_log;
  /// Called at step 0, every checkpoint_every-th step and the last, independent of
  /// the log cadence. 0 disables it.
  std::size_t checkpoint_every = 0;
  std::function<void(std::uint64_t step, std::span<const double> theta)> on_checkpoint;
};

/// Evaluates the objective at steps 0..steps and applies the optimizer after each
/// evaluation except the last, so row k describes theta_k. Logs row 0, every
/// log_every-th step and the final step. Throws NonFiniteGradient or NonFiniteState.
std::vector<MetricsRow> train(const StepObjective& objective, std::vector<double>& theta,
                              const TrainOptions& options);

/// Least-squares slope of theta_norm against step over the last `fraction` of rows.
double tail_norm_slope(const std::vector<MetricsRow>& rows, double fraction = 0.5);

struct SeedSummary {
  std::string activation;
  std::uint64_t seed = 0;
  double initial_ema_loss = 0.0;
  double final_ema_loss = 0.0;
  double initial_theta_norm = 0.0;
  double final_theta_norm = 0.0;
  double norm_ratio = 0.0;
  double tail_norm_slope = 0.0;
};

struct PolynomialRunResult {
  std::vector<SeedSummary> runs;  ///< activation-major, seeds in config order
};

/// Polynomial regression with minibatch SGD/Adam for each activation x seed.
/// Writes metrics_<activation>_seed<N>.csv, summary.json, loss.svg, theta_norm.svg
/// and manifest.json into output_dir.
PolynomialRunResult run_polynomial_experiment(const ExperimentConfig& config);

struct FlowRunResult {
  std::uint64_t seed = 0;
  TrajectoryLog log;
  DichotomyVerdict verdict;
  double energy_residual = 0.0;
  double norm_margin = 0.0;
  double norm_ratio = 0.0;       ///< final / initial theta_norm
  double loss_tail_range = 0.0;  ///< max - min loss over the classifier's tail
};

/// Full-batch gradient flow per seed. Writes trajectory_seed<N>.csv and
/// verdict_seed<N>.json.
std::vector<FlowRunResult> run_flow_experiment(const ExperimentConfig& config);

struct TheoremCRow {
  std::string activation;
  double j = 0.0;
  double sup_error = 0.0;
  double expected_loss = 0.0;
  double theta_norm = 0.0;
  std::size_t hidden_width = 0;
};

/// Builder sweep over j_values. With `widths` set the shallow net is embedded in that
/// architecture; otherwise the shallow net itself is measured. Writes error_vs_j.csv.
std::vector<TheoremCRow> run_theoremC_sweep(const ExperimentConfig& config);

struct KolmogorovRunResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  double initial_relative_mse = 0.0;
  double final_relative_mse = 0.0;
  double initial_theta_norm = 0.0;
  double final_theta_norm = 0.0;
  std::size_t test_points = 0;
  std::size_t within_mc_noise = 0;  ///< points with |pred - ref| <= 2 stderr (Monte Carlo references)
};

/// Adam on fresh one-sample Monte Carlo batches; the network sees box-normalized
/// coordinates in [-1, 1]^d. Writes metrics_<activation>_seed<N>.csv and
/// eval_seed<N>.json.
std::vector<KolmogorovRunResult> run_kolmogorov_experiment(const ExperimentConfig& config);

struct MnistCheckpoint {
  std::uint64_t step = 0;
  double train_loss = 0.0;  ///< mean cross-entropy over the training subset
  double test_accuracy = 0.0;
  double theta_norm = 0.0;
};

struct MnistRunResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  std::vector<MnistCheckpoint> checkpoints;  ///< step 0, every eval_every steps, final
};

/// Writes metrics_<activation>_seed<N>.csv and accuracy_seed<N>.json.
std::vector<MnistRunResult> run_mnist_experiment(const ExperimentConfig& config);

/// Dispatches on config.experiment; returns a one-line human summary.
std::string run_experiment(const ExperimentConfig& config);

/// manifest.json: experiment, version, seeds, config echo and a UTC timestamp.
void write_manifest(const ExperimentConfig& config);

std::string library_version();

}  // namespace gfl
