#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gfl/activations.hpp"
#include "gfl/losses.hpp"
#include "gfl/optim.hpp"

namespace gfl {

enum class ExperimentKind { Poly1d, Poly2d, Poly4d, Flow, TheoremC, Heat, BlackScholes, Mnist };

ExperimentKind parse_experiment(std::string_view name);
std::string experiment_name(ExperimentKind kind);

/// Every knob of every runner. Fields that a runner does not read keep their defaults;
/// `with_defaults` fills in the desk-scale values for each experiment.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Poly1d;

  // model and training
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;
  LossKind loss;
  OptimizerKind optimizer = AdamConfig{};
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::size_t dataset_size = 0;
  std::vector<std::uint64_t> seeds;
  double ema_alpha = 0.95;
  std::size_t log_every = 1;
  std::size_t workers = 0;  ///< 0 means hardware concurrency
  std::filesystem::path output_dir = "runs";

  // polynomial targets, one string per output
  std::vector<std::string> target;

  // flow
  std::string integrator = "rkf45";
  double horizon = 1.0;
  double step = 1e-2;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 10.0;
  std::size_t record_every = 1;
  std::size_t points = 32;
  std::string init = "builder";  ///< builder | glorot | realizable
  double j = 10.0;
  double grad_eps = 1e-6;
  double norm_growth_factor = 1.5;
  double tail_fraction = 0.5;

  // builder sweep
  std::vector<double> j_values;
  std::size_t grid_points = 201;
  double radius = 1.0;

  // Kolmogorov PDEs
  std::size_t dim = 2;
  double rate = 0.05;
  double carry = 0.01;
  double strike = 100.0;
  std::vector<double> sigma;
  std::vector<std::pair<double, double>> box;
  std::size_t rounds = 100;
  std::size_t paths = 1024;
  std::size_t test_points = 1024;

  // MNIST
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::size_t subsample = 0;  ///< 0 keeps every training image
  std::size_t eval_every = 500;

  static ExperimentConfig with_defaults(ExperimentKind kind);

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const;

  /// Round-trips through parse_config.
  [[nodiscard]] std::string to_text() const;
  /// Single JSON object with every field, for run manifests.
  [[nodiscard]] std::string to_json() const;
};

/// Reads a flat `key = value` file (a TOML subset: one assignment per line, `#`
/// comments, quoted strings, numbers, booleans and arrays). Values override the
/// defaults of `kind`; an `experiment` key, if present, must agree with `kind`.
/// Throws ConfigError with the line number and field path for syntax errors,
/// unknown keys and values of the wrong type.
ExperimentConfig parse_config(std::string_view text, ExperimentKind kind);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind);

}  // namespace gfl
