// gfl: command-line front end for the experiment runners.
//
//   gfl <experiment> [--config FILE] [--seed N] [--steps N] [--out DIR] [--workers N]
//   gfl plot <run-dir> [--out DIR]
//   gfl plot - < metrics.csv > loss.svg
//   gfl show-config <experiment> [--config FILE]
//
// Exit codes: 0 success, 1 other failure, 2 configuration or usage error,
// 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gfl/config.hpp"
#include "gfl/errors.hpp"
#include "gfl/experiments.hpp"
#include "gfl/plots.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

gfl::ExperimentConfig resolve(const std::string& name, const std::string& config_path) {
  const auto kind = gfl::parse_experiment(name);
  return config_path.empty() ? gfl::ExperimentConfig::with_defaults(kind) : gfl::load_config(config_path, kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-flow experiments on small dense networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gfl::library_version());

  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> workers;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("experiment", experiment,
                  "poly1d | poly2d | poly4d | flow | theoremC | heat | black_scholes | mnist")
      ->required();
  run->add_option("--config", config_path, "key = value config file (defaults when omitted)");
  run->add_option("--seed", seed, "run this single seed instead of the configured list");
  run->add_option("--steps", steps, "override the number of optimizer steps");
  run->add_option("--workers", workers, "worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "output directory");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "render loss.svg and theta_norm.svg from metrics CSVs");
  plot->add_option("dir", plot_dir, "directory holding metrics_<label>_seed<N>.csv, or - for one CSV on stdin")
      ->required();
  plot->add_option("--out", out_dir, "where to write the SVGs (default: the input directory)");

  auto* show = app.add_subcommand("show-config", "print the resolved configuration");
  show->add_option("experiment", experiment)->required();
  show->add_option("--config", config_path);

  // `gfl flow ...` is shorthand for `gfl run flow ...`
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args[0] != "run" && args[0] != "plot" && args[0] != "show-config" && args[0][0] != '-') {
    args.insert(args.begin(), "run");
  }
  std::vector<const char*> cargs{argv[0]};
  for (const auto& a : args) cargs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*plot && plot_dir == "-") {
      const auto rows = gfl::read_metrics_csv(std::cin);
      std::cout << gfl::render_svg({gfl::seed_average("stdin", {rows}, gfl::MetricField::EmaLoss)},
                                   "Training loss (EMA)", "step", "loss", true);
      return 0;
    }
    if (*plot) {
      const auto files = gfl::emit_plots(gfl::find_metrics_csvs(plot_dir), out_dir.empty() ? plot_dir : out_dir);
      for (const auto& f : files) std::cout << f.string() << '\n';
      return 0;
    }
    auto cfg = resolve(experiment, config_path);
    if (*show) {
      std::cout << cfg.to_text();
      return 0;
    }
    if (seed) cfg.seeds = {*seed};
    if (steps) cfg.steps = *steps;
    if (workers) cfg.workers = *workers;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    std::cout << gfl::run_experiment(cfg) << '\n';
    return 0;
  } catch (const gfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gfl::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
