#include "gfl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gfl/errors.hpp"
#include "gfl/idx.hpp"
#include "gfl/kolmogorov.hpp"
#include "gfl/losses.hpp"
#include "gfl/polybuild.hpp"

#ifndef GFL_VERSION
#define GFL_VERSION "dev"
#endif

namespace gfl {

using nlohmann::json;
namespace fs = std::filesystem;

std::string library_version() { return GFL_VERSION; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

PolynomialMap parse_targets(const ExperimentConfig& c, std::size_t num_vars) {
  PolynomialMap p;
  for (std::size_t i = 0; i < c.target.size(); ++i) {
    try {
      p.push_back(Polynomial::parse(c.target[i], num_vars));
    } catch (const ConfigError& e) {
      throw ConfigError("target[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_rows(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_metrics_csv(out, rows);
}

std::string metrics_name(const Activation& act, std::uint64_t seed) {
  return "metrics_" + act.name() + "_seed" + std::to_string(seed) + ".csv";
}

json summary_json(const SeedSummary& s) {
  return {{"activation", s.activation},
          {"seed", s.seed},
          {"initial_ema_loss", s.initial_ema_loss},
          {"final_ema_loss", s.final_ema_loss},
          {"initial_theta_norm", s.initial_theta_norm},
          {"final_theta_norm", s.final_theta_norm},
          {"norm_ratio", s.norm_ratio},
          {"tail_norm_slope", s.tail_norm_slope}};
}

SeedSummary summarize(const std::string& act, std::uint64_t seed, const std::vector<MetricsRow>& rows) {
  SeedSummary s;
  s.activation = act;
  s.seed = seed;
  s.initial_ema_loss = rows.front().ema_loss;
  s.final_ema_loss = rows.back().ema_loss;
  s.initial_theta_norm = rows.front().theta_norm;
  s.final_theta_norm = rows.back().theta_norm;
  s.norm_ratio = s.initial_theta_norm > 0 ? s.final_theta_norm / s.initial_theta_norm : 0.0;
  s.tail_norm_slope = tail_norm_slope(rows);
  return s;
}

}  // namespace

std::vector<MetricsRow> train(const StepObjective& objective, std::vector<double>& theta,
                              const TrainOptions& options) {
  if (options.log_every == 0) throw DomainError("log_every must be positive");
  OptimizerState opt(options.optimizer, theta.size());
  EmaTracker ema(options.ema_alpha);
  std::vector<double> grad(theta.size());
  std::vector<MetricsRow> rows;
  for (std::uint64_t step = 0; step <= options.steps; ++step) {
    const double loss = objective(step, theta, grad);
    if (!std::isfinite(loss)) throw NonFiniteState("loss is not finite at step " + std::to_string(step));
    const double smoothed = ema.update(loss);
    if (step % options.log_every == 0 || step == options.steps) {
      rows.push_back({step, loss, smoothed, l2(theta), l2(grad), options.seed});
      if (options.on_log) options.on_log(step, theta);
    }
    if (options.on_checkpoint && options.checkpoint_every > 0 &&
        (step % options.checkpoint_every == 0 || step == options.steps)) {
      options.on_checkpoint(step, theta);
    }
    if (step < options.steps) {
      opt.step(theta, grad);
      for (double v : theta) {
        if (!std::isfinite(v)) throw NonFiniteState("parameters became non-finite at step " + std::to_string(step));
      }
    }
  }
  return rows;
}

double tail_norm_slope(const std::vector<MetricsRow>& rows, double fraction) {
  if (rows.size() < 2) return 0.0;
  const std::uint64_t last = rows.back().step;
  const double cut = static_cast<double>(last) * (1.0 - fraction);
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (static_cast<double>(r.step) >= cut) {
      xs.push_back(static_cast<double>(r.step));
      ys.push_back(r.theta_norm);
    }
  }
  return least_squares_slope(xs, ys);
}

PolynomialRunResult run_polynomial_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t d0 = config.widths.front();
  const PolynomialMap p = parse_targets(config, d0);
  fs::create_directories(config.output_dir);
  write_manifest(config);

  const std::size_t n_act = config.activations.size();
  const std::size_t n_seed = config.seeds.size();
  PolynomialRunResult result;
  result.runs.resize(n_act * n_seed);
  parallel_for(n_act * n_seed, config.workers, [&](std::size_t task) {
    const Activation& act = config.activations[task / n_seed];
    const std::uint64_t seed = config.seeds[task % n_seed];
    const Architecture arch(config.widths, act);

    WeightedDataset data(d0, p.size());
    Rng data_rng(derive_seed(seed, 1));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> x(d0);
    const double w = 1.0 / static_cast<double>(config.dataset_size);
    for (std::size_t i = 0; i < config.dataset_size; ++i) {
      for (double& v : x) v = unif(data_rng);
      data.add(x, evaluate(p, x), w);
    }

    const auto init = init_params(arch, GlorotUniformInit{}, derive_seed(seed, 2));
    std::vector<double> th(init.values().begin(), init.values().end());
    Workspace ws(arch);
    const std::uint64_t batch_seed = derive_seed(seed, 3);
    const StepObjective objective = [&](std::uint64_t step, std::span<const double> t, std::span<double> g) {
      const auto idx = minibatch_indices(data.size(), config.batch, batch_seed, step);
      return batch_loss_grad(arch, t, data, idx, config.loss, g, ws);
    };
    TrainOptions opts;
    opts.optimizer = config.optimizer;
    opts.steps = config.steps;
    opts.ema_alpha = config.ema_alpha;
    opts.log_every = config.log_every;
    opts.seed = seed;
    const auto rows = train(objective, th, opts);
    write_rows(config.output_dir / metrics_name(act, seed), rows);
    result.runs[task] = summarize(act.name(), seed, rows);
  });

  json runs = json::array();
  for (const auto& s : result.runs) runs.push_back(summary_json(s));
  write_text(config.output_dir / "summary.json",
             json{{"experiment", experiment_name(config.experiment)}, {"runs", runs}}.dump(2) + "\n");
  emit_plots(find_metrics_csvs(config.output_dir), config.output_dir);
  return result;
}

namespace {

Integrator make_integrator(const ExperimentConfig& c) {
  if (c.integrator == "euler") return ExplicitEuler{c.step};
  if (c.integrator == "rk4") return RK4{c.step};
  if (c.integrator == "rosenbrock23") return AdaptiveRosenbrock23{c.rel_tol, c.abs_tol, c.h_init, c.h_min, c.h_max};
  return AdaptiveRKF45{c.rel_tol, c.abs_tol, c.h_init, c.h_min, c.h_max};
}

WeightedDataset flow_points(const ExperimentConfig& c, std::size_t d0, std::size_t out_dim, std::uint64_t seed) {
  WeightedDataset data(d0, out_dim);
  const double w = 1.0 / static_cast<double>(c.points);
  const std::vector<double> zeros(out_dim, 0.0);
  if (d0 == 1) {
    for (double x : linspace(-1.0, 1.0, c.points)) data.add(std::span<const double>(&x, 1), zeros, w);
    return data;
  }
  Rng rng(derive_seed(seed, 4));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(d0);
  for (std::size_t i = 0; i < c.points; ++i) {
    for (double& v : x) v = unif(rng);
    data.add(x, zeros, w);
  }
  return data;
}

}  // namespace

std::vector<FlowRunResult> run_flow_experiment(const ExperimentConfig& config) {
  config.validate();
  const Activation act = config.activations.front();
  const Architecture arch(config.widths, act);
  const PolynomialMap p = parse_targets(config, arch.input_dim());
  fs::create_directories(config.output_dir);
  write_manifest(config);

  FlowConfig fc;
  fc.integrator = make_integrator(config);
  fc.horizon = config.horizon;
  fc.record_every = config.record_every;
  DichotomyThresholds thresholds{config.grad_eps, config.norm_growth_factor, config.tail_fraction};

  std::vector<FlowRunResult> results(config.seeds.size());
  parallel_for(config.seeds.size(), config.workers, [&](std::size_t k) {
    const std::uint64_t seed = config.seeds[k];
    WeightedDataset data = flow_points(config, arch.input_dim(), arch.output_dim(), seed);
    ParameterVector theta0;
    TargetSpec target = PolynomialTarget{p};
    if (config.init == "builder") {
      const ShallowNet core = build_poly_shallow(act, p, config.j);
      theta0 = embed_deep(arch, core, find_core_layer(arch, core), config.j);
    } else {
      theta0 = init_params(arch, GlorotUniformInit{}, derive_seed(seed, 2));
      if (config.init == "realizable") {
        for (std::size_t i = 0; i < data.size(); ++i) data.set_target(i, forward(arch, theta0, data.x(i)));
        target = FixedLabels{};
      }
    }
    FlowRunResult r;
    r.seed = seed;
    r.log = integrate_flow(arch, theta0, data, target, config.loss, fc);
    r.verdict = classify(r.log, thresholds);
    r.energy_residual = check_energy_identity(r.log);
    r.norm_margin = check_norm_bound(r.log);
    const auto& s = r.log.samples;
    r.norm_ratio = s.front().theta_norm > 0 ? s.back().theta_norm / s.front().theta_norm : 0.0;
    const std::size_t tail = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(config.tail_fraction * static_cast<double>(s.size()))));
    double lo = s.back().loss, hi = s.back().loss;
    for (std::size_t i = s.size() - std::min(tail, s.size()); i < s.size(); ++i) {
      lo = std::min(lo, s[i].loss);
      hi = std::max(hi, s[i].loss);
    }
    r.loss_tail_range = hi - lo;

    std::ofstream csv(config.output_dir / ("trajectory_seed" + std::to_string(seed) + ".csv"), std::ios::binary);
    r.log.write_csv(csv);
    const json verdict = {{"seed", seed},
                          {"verdict", verdict_name(r.verdict.tag)},
                          {"final_grad_norm", r.verdict.final_grad_norm},
                          {"theta_norm_slope", r.verdict.theta_norm_slope},
                          {"loss_limit", r.verdict.loss_limit},
                          {"norm_grad_product_slope", r.verdict.norm_grad_product_slope},
                          {"norm_ratio", r.norm_ratio},
                          {"loss_tail_range", r.loss_tail_range},
                          {"energy_residual", r.energy_residual},
                          {"norm_bound_margin", r.norm_margin},
                          {"accepted_steps", r.log.accepted_steps},
                          {"rejected_steps", r.log.rejected_steps}};
    write_text(config.output_dir / ("verdict_seed" + std::to_string(seed) + ".json"), verdict.dump(2) + "\n");
    results[k] = std::move(r);
  });
  return results;
}

namespace {

/// Sup of |f - p| over the tensor grid with about `points` nodes in [-radius, radius]^m.
double grid_sup_error(const std::function<std::vector<double>(std::span<const double>)>& f,
                      const PolynomialMap& p, std::size_t m, double radius, std::size_t points) {
  const auto per_dim = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(points), 1.0 / static_cast<double>(m)))));
  double worst = 0.0;
  for (const auto& x : evaluation_grid(Box::cube(m, -radius, radius), std::pow(per_dim, m))) {
    const auto y = f(x);
    for (std::size_t o = 0; o < p.size(); ++o) worst = std::max(worst, std::abs(y[o] - p[o].evaluate(x)));
  }
  return worst;
}

}  // namespace

std::vector<TheoremCRow> run_theoremC_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::size_t m = [&] {
    if (!config.widths.empty()) return config.widths.front();
    std::size_t vars = 1;
    for (const auto& t : config.target) vars = std::max(vars, Polynomial::parse(t).num_vars());
    return vars;
  }();
  const PolynomialMap p = parse_targets(config, m);
  fs::create_directories(config.output_dir);
  write_manifest(config);

  std::vector<TheoremCRow> rows;
  for (const auto& act : config.activations) {
    for (double j : config.j_values) {
      const ShallowNet net = build_poly_shallow(act, p, j);
      Architecture arch = net.architecture();
      ParameterVector theta = net.parameters();
      if (!config.widths.empty()) {
        arch = Architecture(config.widths, act);
        theta = embed_deep(arch, net, find_core_layer(arch, net), j);
      }
      const auto eval = [&](std::span<const double> x) { return forward(arch, theta, x); };
      TheoremCRow row;
      row.activation = act.name();
      row.j = j;
      row.sup_error = grid_sup_error(eval, p, m, config.radius, config.grid_points);
      const auto quad = quadrature_dataset([](std::span<const double>) { return 1.0; },
                                           Box::cube(m, -config.radius, config.radius),
                                           m == 1 ? config.grid_points : 21, p.size());
      row.expected_loss = expected_loss(arch, theta, quad, PolynomialTarget{p}, config.loss);
      row.theta_norm = theta.norm();
      row.hidden_width = net.hidden;
      rows.push_back(row);
    }
  }
  std::ostringstream csv;
  csv.precision(17);
  csv << "activation,j,sup_error,expected_loss,theta_norm,hidden_width\n";
  for (const auto& r : rows) {
    csv << r.activation << ',' << r.j << ',' << r.sup_error << ',' << r.expected_loss << ',' << r.theta_norm
        << ',' << r.hidden_width << '\n';
  }
  write_text(config.output_dir / "error_vs_j.csv", csv.str());
  return rows;
}

namespace {

PdeSpec make_pde(const ExperimentConfig& c) {
  Box box;
  for (const auto& [lo, hi] : c.box) {
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }
  if (c.experiment == ExperimentKind::Heat) {
    HeatSpec s = HeatSpec::with_defaults(c.dim);
    s.horizon = c.horizon;
    if (!c.box.empty()) s.box = box;
    s.validate();
    return s;
  }
  BlackScholesSpec s = BlackScholesSpec::with_defaults(c.dim);
  s.horizon = c.horizon;
  s.rate = c.rate;
  s.carry = c.carry;
  s.strike = c.strike;
  if (!c.sigma.empty()) s.sigma = c.sigma;
  s.box = c.box.empty() ? Box::cube(c.dim, 0.5 * c.strike, 1.5 * c.strike) : box;
  s.validate();
  return s;
}

/// Affine map of the sample box onto [-1, 1]^d.
struct BoxScaler {
  std::vector<double> center;
  std::vector<double> half;
  explicit BoxScaler(const Box& b) {
    for (std::size_t i = 0; i < b.dim(); ++i) {
      center.push_back(0.5 * (b.lo[i] + b.hi[i]));
      half.push_back(0.5 * (b.hi[i] - b.lo[i]));
    }
  }
  void apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - center[i]) / half[i];
  }
};

}  // namespace

std::vector<KolmogorovRunResult> run_kolmogorov_experiment(const ExperimentConfig& config) {
  config.validate();
  const PdeSpec pde = make_pde(config);
  const Box& box = std::visit([](const auto& s) -> const Box& { return s.box; }, pde);
  const BoxScaler scaler(box);
  const Activation act = config.activations.front();
  const Architecture arch(config.widths, act);
  fs::create_directories(config.output_dir);
  write_manifest(config);

  // test grid and references, shared by all seeds
  const auto grid = evaluation_grid(box, config.test_points);
  std::vector<double> refs(grid.size());
  std::vector<double> ref_err(grid.size(), 0.0);
  std::vector<double> scaled_grid(grid.size() * box.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scaler.apply(grid[i], std::span<double>(scaled_grid.data() + i * box.dim(), box.dim()));
  }
  if (const auto* heat = std::get_if<HeatSpec>(&pde)) {
    for (std::size_t i = 0; i < grid.size(); ++i) refs[i] = heat_exact(*heat, heat->horizon, grid[i]);
  } else {
    const Sampler sampler = terminal_sampler(pde);
    parallel_for(grid.size(), config.workers, [&](std::size_t i) {
      const auto est = mc_reference(sampler, grid[i], config.rounds, config.paths, derive_seed(i, 99));
      refs[i] = est.mean;
      ref_err[i] = est.std_error;
    });
  }
  const bool monte_carlo = std::holds_alternative<BlackScholesSpec>(pde);

  std::vector<KolmogorovRunResult> results(config.seeds.size());
  parallel_for(config.seeds.size(), config.workers, [&](std::size_t k) {
    const std::uint64_t seed = config.seeds[k];
    Workspace ws(arch);
    std::vector<double> preds(grid.size());
    auto predict = [&](std::span<const double> th) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        forward_into(arch, th, std::span<const double>(scaled_grid.data() + i * box.dim(), box.dim()), ws);
        preds[i] = workspace_output(ws)[0];
      }
      return relative_mse(preds, refs);
    };
    const auto theta0 = init_params(arch, GlorotUniformInit{}, derive_seed(seed, 2));
    std::vector<double> theta(theta0.values().begin(), theta0.values().end());
    KolmogorovRunResult r;
    r.seed = seed;
    r.test_points = grid.size();
    r.initial_relative_mse = predict(theta);
    r.initial_theta_norm = l2(theta);

    WeightedDataset batch(box.dim(), 1);
    std::vector<std::size_t> all(config.batch);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<double> xs(box.dim());
    const StepObjective objective = [&](std::uint64_t step, std::span<const double> t, std::span<double> g) {
      Rng rng(derive_seed(derive_seed(seed, 5), step));
      const WeightedDataset raw = kolmogorov_batch(pde, config.batch, rng);
      batch = WeightedDataset(box.dim(), 1);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        scaler.apply(raw.x(i), xs);
        batch.add(xs, raw.y(i), raw.weight(i));
      }
      return batch_loss_grad(arch, t, batch, all, config.loss, g, ws);
    };
    json checkpoints = json::array();
    TrainOptions opts;
    opts.optimizer = config.optimizer;
    opts.steps = config.steps;
    opts.ema_alpha = config.ema_alpha;
    opts.log_every = config.log_every;
    opts.seed = seed;
    opts.checkpoint_every = config.eval_every;
    opts.on_checkpoint = [&](std::uint64_t step, std::span<const double> th) {
      checkpoints.push_back({{"step", step}, {"relative_mse", predict(th)}, {"theta_norm", l2(th)}});
    };
    r.metrics = train(objective, theta, opts);
    r.final_relative_mse = predict(theta);
    r.final_theta_norm = l2(theta);
    json noise = json::array();
    if (monte_carlo) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const bool within = std::abs(preds[i] - refs[i]) <= 2.0 * ref_err[i];
        r.within_mc_noise += within ? 1 : 0;
        noise.push_back(within);
      }
    }
    write_rows(config.output_dir / metrics_name(act, seed), r.metrics);
    json eval = {{"seed", seed},
                 {"pde", experiment_name(config.experiment)},
                 {"test_points", grid.size()},
                 {"initial_relative_mse", r.initial_relative_mse},
                 {"final_relative_mse", r.final_relative_mse},
                 {"initial_theta_norm", r.initial_theta_norm},
                 {"final_theta_norm", r.final_theta_norm},
                 {"checkpoints", checkpoints}};
    if (monte_carlo) {
      eval["within_mc_noise_count"] = r.within_mc_noise;
      eval["within_mc_noise"] = noise;
      eval["reference_stderr"] = ref_err;
    }
    write_text(config.output_dir / ("eval_seed" + std::to_string(seed) + ".json"), eval.dump(2) + "\n");
    results[k] = std::move(r);
  });
  return results;
}

std::vector<MnistRunResult> run_mnist_experiment(const ExperimentConfig& config) {
  config.validate();
  const LabeledImages train_set = load_labeled_images(config.train_images, config.train_labels, config.subsample);
  const LabeledImages test_set = load_labeled_images(config.test_images, config.test_labels);
  if (train_set.pixels != config.widths.front() || test_set.pixels != config.widths.front()) {
    throw DimensionMismatch("image size does not match the input width");
  }
  const Activation act = config.activations.front();
  const Architecture arch(config.widths, act);
  fs::create_directories(config.output_dir);
  write_manifest(config);

  WeightedDataset data(train_set.pixels, 10);
  const double w = 1.0 / static_cast<double>(train_set.count);
  for (std::size_t i = 0; i < train_set.count; ++i) {
    std::vector<double> onehot(10, 0.0);
    onehot[train_set.labels[i]] = 1.0;
    data.add(std::span<const double>(train_set.images.data() + i * train_set.pixels, train_set.pixels), onehot, w);
  }

  std::vector<MnistRunResult> results(config.seeds.size());
  parallel_for(config.seeds.size(), config.workers, [&](std::size_t k) {
    const std::uint64_t seed = config.seeds[k];
    Workspace ws(arch);
    std::vector<std::size_t> everything(data.size());
    for (std::size_t i = 0; i < everything.size(); ++i) everything[i] = i;
    std::vector<double> scratch(param_dim(arch));
    auto evaluate_at = [&](std::uint64_t step, std::span<const double> th) {
      MnistCheckpoint c;
      c.step = step;
      c.train_loss = batch_loss_grad(arch, th, data, everything, config.loss, scratch, ws);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test_set.count; ++i) {
        forward_into(arch, th,
                     std::span<const double>(test_set.images.data() + i * test_set.pixels, test_set.pixels), ws);
        const auto logits = workspace_output(ws);
        const auto best = std::distance(logits.begin(), std::max_element(logits.begin(), logits.end()));
        correct += static_cast<std::size_t>(best) == test_set.labels[i] ? 1 : 0;
      }
      c.test_accuracy = static_cast<double>(correct) / static_cast<double>(test_set.count);
      c.theta_norm = l2(th);
      return c;
    };
    const auto theta0 = init_params(arch, GlorotUniformInit{}, derive_seed(seed, 2));
    std::vector<double> theta(theta0.values().begin(), theta0.values().end());
    MnistRunResult r;
    r.seed = seed;
    const std::uint64_t batch_seed = derive_seed(seed, 3);
    const std::size_t batch = std::min(config.batch, data.size());
    const StepObjective objective = [&](std::uint64_t step, std::span<const double> t, std::span<double> g) {
      const auto idx = minibatch_indices(data.size(), batch, batch_seed, step);
      return batch_loss_grad(arch, t, data, idx, config.loss, g, ws);
    };
    TrainOptions opts;
    opts.optimizer = config.optimizer;
    opts.steps = config.steps;
    opts.ema_alpha = config.ema_alpha;
    opts.log_every = config.log_every;
    opts.seed = seed;
    opts.checkpoint_every = config.eval_every;
    opts.on_checkpoint = [&](std::uint64_t step, std::span<const double> th) {
      r.checkpoints.push_back(evaluate_at(step, th));
    };
    r.metrics = train(objective, theta, opts);
    write_rows(config.output_dir / metrics_name(act, seed), r.metrics);
    json cps = json::array();
    for (const auto& c : r.checkpoints) {
      cps.push_back({{"step", c.step}, {"train_loss", c.train_loss}, {"test_accuracy", c.test_accuracy},
                     {"theta_norm", c.theta_norm}});
    }
    const json acc = {{"seed", seed},
                      {"train_examples", train_set.count},
                      {"test_examples", test_set.count},
                      {"final_test_accuracy", r.checkpoints.back().test_accuracy},
                      {"checkpoints", cps}};
    write_text(config.output_dir / ("accuracy_seed" + std::to_string(seed) + ".json"), acc.dump(2) + "\n");
    results[k] = std::move(r);
  });
  return results;
}

std::string run_experiment(const ExperimentConfig& config) {
  std::ostringstream os;
  os.precision(4);
  switch (config.experiment) {
    case ExperimentKind::Poly1d:
    case ExperimentKind::Poly2d:
    case ExperimentKind::Poly4d: {
      const auto r = run_polynomial_experiment(config);
      double worst_ratio = std::numeric_limits<double>::infinity();
      for (const auto& s : r.runs) worst_ratio = std::min(worst_ratio, s.norm_ratio);
      os << r.runs.size() << " runs; smallest final/initial norm ratio " << worst_ratio;
      break;
    }
    case ExperimentKind::Flow:
      for (const auto& r : run_flow_experiment(config)) {
        os << "seed " << r.seed << ": " << verdict_name(r.verdict.tag) << " (norm ratio " << r.norm_ratio
           << ", final grad " << r.verdict.final_grad_norm << ") ";
      }
      break;
    case ExperimentKind::TheoremC:
      for (const auto& r : run_theoremC_sweep(config)) {
        os << r.activation << " j=" << r.j << ": sup error " << r.sup_error << ", |theta| " << r.theta_norm << "; ";
      }
      break;
    case ExperimentKind::Heat:
    case ExperimentKind::BlackScholes:
      for (const auto& r : run_kolmogorov_experiment(config)) {
        os << "seed " << r.seed << ": relative MSE " << r.initial_relative_mse << " -> " << r.final_relative_mse
           << ", |theta| " << r.initial_theta_norm << " -> " << r.final_theta_norm << " ";
      }
      break;
    case ExperimentKind::Mnist:
      for (const auto& r : run_mnist_experiment(config)) {
        os << "seed " << r.seed << ": train loss " << r.checkpoints.front().train_loss << " -> "
           << r.checkpoints.back().train_loss << ", test accuracy " << r.checkpoints.back().test_accuracy << " ";
      }
      break;
  }
  os << "(outputs in " << config.output_dir.string() << ")";
  return os.str();
}

void write_manifest(const ExperimentConfig& config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream stamp;
  stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  const json manifest = {{"experiment", experiment_name(config.experiment)},
                         {"version", library_version()},
                         {"seeds", config.seeds},
                         {"created_utc", stamp.str()},
                         {"config", json::parse(config.to_json())}};
  fs::create_directories(config.output_dir);
  write_text(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace gfl
