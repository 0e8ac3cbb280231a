// Acceptance checks. One PASS/FAIL line per criterion; exit status is the number of
// failures. Run a subset by passing criterion numbers (gfl_acceptance 3 5).

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gfl/activations.hpp"
#include "gfl/config.hpp"
#include "gfl/experiments.hpp"
#include "gfl/flow.hpp"
#include "gfl/idx.hpp"
#include "gfl/kolmogorov.hpp"
#include "gfl/losses.hpp"
#include "gfl/network.hpp"
#include "gfl/polybuild.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gfl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gfl-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// 1. backprop against central differences for every activation x loss pair
Outcome gradients() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 0.8);
  const std::vector<LossKind> losses = {LossTag::SquaredError, LossTag::BinaryCrossEntropy, LossKind(LossTag::Huber, 1.0)};
  double worst = 0.0;
  std::size_t checked = 0, bad = 0;
  for (const auto& act : all_activations()) {
    const bool kinked = !act.analytic();
    for (const auto& kind : losses) {
      for (int inst = 0; inst < 100;) {
        std::vector<std::size_t> widths = {1 + rng() % 3};
        const std::size_t hidden = 1 + rng() % 2;
        for (std::size_t h = 0; h < hidden; ++h) widths.push_back(1 + rng() % (h == 0 ? 5 : 4));
        widths.push_back(1 + rng() % 2);
        const Architecture arch(widths, act);
        std::vector<double> theta(param_dim(arch));
        for (double& v : theta) v = normal(rng);
        std::vector<double> x(widths.front()), y(widths.back());
        for (double& v : x) v = unit(rng);
        std::vector<double> pre;
        auto out = oracle::forward(widths, act, theta, x, &pre);
        if (kind.tag == LossTag::BinaryCrossEntropy) {
          // shift the output bias so predictions sit inside (0, 1)
          for (std::size_t o = 0; o < y.size(); ++o) {
            theta[theta.size() - y.size() + o] += 0.5 + 0.3 * unit(rng) - out[o];
            y[o] = 0.5 + 0.45 * unit(rng);
          }
          out = oracle::forward(widths, act, theta, x);
        } else {
          for (double& v : y) v = normal(rng);
        }
        // finite differences are only valid away from kinks of the activation or loss
        bool near_kink = false;
        if (kinked) {
          for (double z : pre) near_kink |= std::abs(z) < 0.05;
        }
        if (kind.tag == LossTag::Huber) {
          for (std::size_t o = 0; o < y.size(); ++o) near_kink |= std::abs(std::abs(out[o] - y[o]) - 1.0) < 0.05;
        }
        if (near_kink) continue;
        ++inst;

        WeightedDataset one(x.size(), y.size());
        one.add(x, y, 1.0);
        const auto lg = expected_loss_grad(arch, ParameterVector(arch, theta), one, FixedLabels{}, kind);
        const auto fd = oracle::gradient(
            [&](std::span<const double> t) { return oracle::loss(kind, oracle::forward(widths, act, t, x), y); },
            theta, 1e-4);
        for (std::size_t i = 0; i < theta.size(); ++i) {
          ++checked;
          worst = std::max(worst, std::abs(lg.grad[i] - fd[i]) / (1e-5 * std::abs(fd[i]) + 1e-8));
          if (!oracle::close(lg.grad[i], fd[i], 1e-5, 1e-8)) ++bad;
        }
      }
    }
  }
  return {bad == 0, std::to_string(checked) + " coordinates over 2700 instances, " + std::to_string(bad) +
                        " outside 1e-5 relative (1e-8 floor); worst error / tolerance " + fmt(worst)};
}

// 2. Taylor coefficients from jet arithmetic
Outcome jets() {
  const std::vector<double> tanh_ref = {0, 1, 0, -1.0 / 3, 0, 2.0 / 15};
  const std::vector<double> logistic_ref = {0.5, 0.25, 0};
  double worst_exact = 0.0;
  const auto t = act_jet(ActivationKind::Tanh, 0.0, 5);
  for (std::size_t k = 0; k < tanh_ref.size(); ++k) worst_exact = std::max(worst_exact, std::abs(t.coeffs[k] - tanh_ref[k]));
  const auto l = act_jet(ActivationKind::Logistic, 0.0, 2);
  for (std::size_t k = 0; k < logistic_ref.size(); ++k) {
    worst_exact = std::max(worst_exact, std::abs(l.coeffs[k] - logistic_ref[k]));
  }
  std::size_t bad = 0;
  double worst_rel = 0.0;
  for (const auto& act : all_activations()) {
    if (!act.analytic()) continue;
    const auto f = [&](double x) { return oracle::activation(act, x); };
    for (double x0 : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const auto jet = act_jet(act, x0, 3);
      double factorial = 1.0;
      for (int k = 1; k <= 3; ++k) {
        factorial *= k;
        const double fd = oracle::derivative(f, x0, k, k < 3 ? 1e-3 : 1e-2);
        const double got = factorial * jet.coeffs[k];
        worst_rel = std::max(worst_rel, std::abs(got - fd) / (1e-5 * std::abs(fd) + 1e-8));
        if (!oracle::close(got, fd, 1e-5, 1e-8)) ++bad;
      }
    }
  }
  const bool pass = worst_exact <= 1e-10 && bad == 0;
  return {pass, "Maclaurin max abs error " + fmt(worst_exact) + "; orders 1-3 at 5 points x 6 kinds: " +
                    std::to_string(bad) + " outside 1e-5 relative (worst error / tolerance " + fmt(worst_rel) + ")"};
}

// 3. lattice dimension, random decompositions and the worked x0*x1 example
Outcome decomposition() {
  bool counts = true;
  for (unsigned n = 0; n <= 8; ++n) {
    for (std::size_t m = 0; m <= 4; ++m) {
      const auto pts = lattice_points(n, m);
      counts &= pts.size() == oracle::count_lattice(n, m) &&
                static_cast<double>(pts.size()) == oracle::binomial(n + static_cast<unsigned>(m), static_cast<unsigned>(m));
    }
  }
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 3;
    const unsigned n = 1 + static_cast<unsigned>(rng() % 4);
    Polynomial p(m);
    // every monomial of total degree n
    std::vector<unsigned> e(m, 0);
    std::function<void(std::size_t, unsigned)> fill = [&](std::size_t v, unsigned left) {
      if (v + 1 == m) {
        e[v] = left;
        p.add_term(e, unit(rng));
        return;
      }
      for (unsigned k = 0; k <= left; ++k) {
        e[v] = k;
        fill(v + 1, left - k);
      }
    };
    fill(0, n);
    const auto dec = decompose_homogeneous(p);
    double err = 0.0, scale = 0.0;
    std::vector<double> x(m);
    for (int s = 0; s < 100; ++s) {
      for (double& v : x) v = unit(rng);
      double sum = 0.0;
      for (const auto& term : dec.terms) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += term.a[i] * x[i];
        sum += term.c * std::pow(dot, n);
      }
      const double ref = oracle::poly(p, x);
      err = std::max(err, std::abs(sum - ref));
      scale = std::max(scale, std::abs(ref));
    }
    worst = std::max(worst, err / (1.0 + scale));
  }
  const auto worked = decompose_homogeneous(Polynomial::parse("x0*x1", 2));
  const std::vector<std::pair<std::vector<double>, double>> expect = {{{1, 0}, -0.75}, {{1, 1}, 1.0}, {{1, 2}, -0.25}};
  double worked_err = worked.terms.size() == expect.size() ? 0.0 : 1.0;
  for (const auto& [a, c] : expect) {
    double best = 1.0;
    for (const auto& term : worked.terms) {
      if (term.a == a) best = std::abs(term.c - c);
    }
    worked_err = std::max(worked_err, best);
  }
  const bool pass = counts && worst <= 1e-8 && worked_err <= 1e-12;
  return {pass, std::string("lattice counts ") + (counts ? "match" : "MISMATCH") + "; worst relative residual " +
                    fmt(worst) + "; x0*x1 coefficient error " + fmt(worked_err)};
}

// 4. builder convergence in j together with parameter growth
Outcome builder() {
  const PolynomialMap p = {Polynomial::parse("x0^2", 1)};
  bool pass = true;
  std::string detail;
  for (ActivationKind kind : {ActivationKind::Tanh, ActivationKind::Logistic}) {
    const Activation act(kind);
    std::vector<double> errs, norms;
    std::size_t width = 0;
    for (double j : {10.0, 100.0, 1000.0}) {
      const ShallowNet net = build_poly_shallow(act, p, j);
      const auto theta = net.parameters();
      const std::vector<std::size_t> widths = {1, net.hidden, 1};
      double err = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        const double x = -1.0 + 2.0 * i / 1000.0;
        err = std::max(err, std::abs(oracle::forward(widths, act, theta.values(), std::span<const double>(&x, 1))[0] - x * x));
      }
      errs.push_back(err);
      norms.push_back(l2(theta.values()));
      width = std::max(width, net.hidden);
    }
    const bool ok = errs[1] * 1.05 < errs[0] && errs[2] * 1.05 < errs[1] && errs[2] <= 1e-3 && width <= 2 &&
                    norms[0] < norms[1] && norms[1] < norms[2];
    pass &= ok;
    detail += act.name() + " sup errors " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " + fmt(errs[2]) + " norms " +
              fmt(norms[0]) + ", " + fmt(norms[1]) + ", " + fmt(norms[2]) + " width " + std::to_string(width) + "; ";
  }
  return {pass, detail};
}

// 5. closed-form quadratic flow, energy identity and norm bound
Outcome flow_integrator() {
  FlowConfig cfg;
  cfg.integrator = AdaptiveRKF45{1e-8, 1e-10, 1e-3, 1e-12, 1.0};
  cfg.horizon = 5.0;
  const std::vector<double> theta0 = {1.0, -2.0, 0.5, 3.0};
  const Objective quadratic = [](std::span<const double> th, std::span<double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      g[i] = th[i];
      s += 0.5 * th[i] * th[i];
    }
    return s;
  };
  const auto q = integrate_flow(quadratic, theta0, cfg);
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < theta0.size(); ++i) {
    const double exact = std::exp(-5.0) * theta0[i];
    diff += (q.final_theta[i] - exact) * (q.final_theta[i] - exact);
    ref += exact * exact;
  }
  const double closed_form = std::sqrt(diff / ref);

  const Architecture arch({1, 5, 1}, ActivationKind::Tanh);
  WeightedDataset data(1, 1);
  for (int i = 0; i < 5; ++i) {
    const double x = -1.0 + 0.5 * i;
    const double zero = 0.0;
    data.add(std::span<const double>(&x, 1), std::span<const double>(&zero, 1), 0.2);
  }
  // finer sampling for the trapezoid quadrature inside the energy check
  cfg.integrator = AdaptiveRKF45{1e-8, 1e-10, 1e-3, 1e-12, 0.005};
  cfg.horizon = 10.0;
  const auto log = integrate_flow(arch, init_params(arch, GlorotUniformInit{}, 7), data,
                                  PolynomialTarget{{Polynomial::parse("x0^2", 1)}}, LossTag::SquaredError, cfg);
  const double energy = check_energy_identity(log);
  const double margin = check_norm_bound(log);
  const bool pass = closed_form <= 1e-6 && energy <= 1e-3 && margin >= -1e-6;
  return {pass, "quadratic relative error at t=5 " + fmt(closed_form) + "; energy residual " + fmt(energy) +
                    "; norm bound margin " + fmt(margin) + " (" + std::to_string(log.accepted_steps) + " steps)"};
}

// 6. dichotomy on a realizable and on a non-realizable target
Outcome dichotomy() {
  // (a) labels produced by N_theta* on the same 32 points, flow started at theta*
  auto fa = ExperimentConfig::with_defaults(ExperimentKind::Flow);
  fa.init = "realizable";
  fa.output_dir = scratch_dir("flow-realizable");
  const auto ra = run_flow_experiment(fa).front();
  const auto& va = ra.verdict;
  const bool pass_a = va.tag == VerdictTag::ConvergedToCriticalPoint && va.final_grad_norm <= 1e-8;

  // (b) x^2 on 32 points from the builder warm start, as the flow runner does by default
  auto fc = ExperimentConfig::with_defaults(ExperimentKind::Flow);
  fc.output_dir = scratch_dir("flow");
  const auto rb = run_flow_experiment(fc).front();
  const bool pass_b = rb.verdict.tag == VerdictTag::DivergingToInfinity && rb.norm_ratio >= 1.5 &&
                      rb.loss_tail_range <= 1e-3;
  return {pass_a && pass_b,
          "(a) " + verdict_name(va.tag) + ", final grad " + fmt(va.final_grad_norm) + " [" + (pass_a ? "ok" : "FAIL") +
              "]; (b) " + verdict_name(rb.verdict.tag) + ", norm ratio " + fmt(rb.norm_ratio) + " (needs >= 1.5), loss " +
              fmt(rb.log.samples.front().loss) + " -> " + fmt(rb.log.samples.back().loss) + ", tail range " +
              fmt(rb.loss_tail_range) + " [" + (pass_b ? "ok" : "FAIL") + "]"};
}

// 7. Adam on the degree-10 target
Outcome adam_divergence() {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Poly1d);
  c.activations = {ActivationKind::Tanh};
  c.seeds = {0, 1, 2};
  c.output_dir = scratch_dir("poly1d");
  const auto r = run_polynomial_experiment(c);
  bool pass = r.runs.size() == 3;
  std::string detail;
  for (const auto& s : r.runs) {
    const bool ok = s.final_ema_loss <= 1e-2 * s.initial_ema_loss && s.final_theta_norm >= 1.5 * s.initial_theta_norm &&
                    s.tail_norm_slope > 0;
    pass &= ok;
    detail += "seed " + std::to_string(s.seed) + ": ema loss x" + fmt(s.final_ema_loss / s.initial_ema_loss) +
              ", norm x" + fmt(s.norm_ratio) + ", tail slope " + fmt(s.tail_norm_slope) + "; ";
  }
  return {pass, detail};
}

// 8. heat equation regression
Outcome heat() {
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Heat);
  c.seeds = {0};
  c.output_dir = scratch_dir("heat");
  const auto r = run_kolmogorov_experiment(c).front();
  const bool pass = r.test_points == 1024 && r.final_relative_mse <= 5e-2 && r.final_theta_norm > r.initial_theta_norm;
  return {pass, "relative MSE " + fmt(r.initial_relative_mse) + " -> " + fmt(r.final_relative_mse) + " on " +
                    std::to_string(r.test_points) + " points; norm " + fmt(r.initial_theta_norm) + " -> " +
                    fmt(r.final_theta_norm)};
}

// 9. Monte Carlo samplers against closed forms
Outcome monte_carlo() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int heat_ok = 0;
  double worst_z = 0.0;
  for (int i = 0; i < 10; ++i) {
    HeatSpec s = HeatSpec::with_defaults(1 + rng() % 3);
    s.horizon = 0.1 + 1.9 * (0.5 + 0.5 * unit(rng));
    std::vector<double> x(s.dim);
    double exact = s.dim * s.horizon;
    for (double& v : x) {
      v = 2.0 * unit(rng);
      exact += v * v;
    }
    const auto est = mc_reference(terminal_sampler(s), x, 100, 1000, 1000 + i);
    const double z = std::abs(est.mean - exact) / est.std_error;
    worst_z = std::max(worst_z, z);
    heat_ok += z <= 4.0;
  }
  BlackScholesSpec bs = BlackScholesSpec::with_defaults(1);
  bs.strike = 0.0;
  bs.sigma = {0.3};
  const double x0 = 100.0;
  const auto bs_est = mc_reference(terminal_sampler(bs), std::span<const double>(&x0, 1), 100, 1000, 4242);
  const double bs_z = std::abs(bs_est.mean - x0 * std::exp(-bs.carry * bs.horizon)) / bs_est.std_error;

  const HeatSpec unit_heat = HeatSpec::with_defaults(1);
  const double origin = 0.0;
  std::vector<double> ratios;
  for (int rep = 0; rep < 20; ++rep) {
    const auto small = mc_reference(terminal_sampler(unit_heat), std::span<const double>(&origin, 1), 50, 256, 7000 + rep);
    const auto large = mc_reference(terminal_sampler(unit_heat), std::span<const double>(&origin, 1), 50, 1024, 9000 + rep);
    ratios.push_back(large.std_error / small.std_error);
  }
  std::nth_element(ratios.begin(), ratios.begin() + 10, ratios.end());
  const double median = ratios[10];
  const bool pass = heat_ok == 10 && bs_z <= 4.0 && median >= 0.4 && median <= 0.6;
  return {pass, "heat within 4 stderr at " + std::to_string(heat_ok) + "/10 (worst z " + fmt(worst_z) +
                    "); BS K=0 z " + fmt(bs_z) + "; stderr ratio at 4x paths " + fmt(median)};
}

// 10. IDX fixtures and the MNIST subset run
Outcome mnist() {
  const std::vector<std::uint8_t> fixture = {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 42};
  const auto t = parse_idx(fixture);
  bool idx_ok = t.shape == std::vector<std::size_t>{1, 1, 1} && t.at(0) == 42.0 && encode_idx(t) == fixture;
  const std::vector<std::uint8_t> labels = {0, 0, 8, 1, 0, 0, 0, 3, 7, 0, 9};
  const auto lt = parse_idx(labels);
  idx_ok &= lt.shape == std::vector<std::size_t>{3} && lt.u8 == std::vector<std::uint8_t>{7, 0, 9};
  auto c = ExperimentConfig::with_defaults(ExperimentKind::Mnist);
  for (const auto& path : {c.train_images, c.train_labels, c.test_images, c.test_labels}) {
    std::ifstream in(path, std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    idx_ok &= !bytes.empty() && encode_idx(parse_idx(bytes)) == bytes;
  }
  c.seeds = {0};
  c.output_dir = scratch_dir("mnist");
  const auto r = run_mnist_experiment(c).front();
  const auto& first = r.checkpoints.front();
  const auto& last = r.checkpoints.back();
  const bool pass = idx_ok && first.train_loss >= 5.0 * last.train_loss && last.theta_norm > first.theta_norm;
  return {pass, std::string("IDX fixtures ") + (idx_ok ? "bit-exact" : "MISMATCH") + "; train cross-entropy " +
                    fmt(first.train_loss) + " -> " + fmt(last.train_loss) + "; norm " + fmt(first.theta_norm) + " -> " +
                    fmt(last.theta_norm) + "; test accuracy " + fmt(last.test_accuracy)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient correctness", 30, gradients},
      {2, "jet correctness", 5, jets},
      {3, "homogeneous decomposition", 10, decomposition},
      {4, "polynomial builder", 60, builder},
      {5, "flow integrator", 60, flow_integrator},
      {6, "dichotomy", 300, dichotomy},
      {7, "Adam divergence", 600, adam_divergence},
      {8, "heat equation", 600, heat},
      {9, "Monte Carlo soundness", 120, monte_carlo},
      {10, "MNIST subset", 600, mnist},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::stoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    while (o.detail.ends_with(' ') || o.detail.ends_with(';')) o.detail.pop_back();
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " ["
              << fmt(secs) << " s of " << c.budget_seconds << " s" << (in_time ? "" : ", OVER BUDGET") << "]"
              << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("gfl-acceptance-" + std::to_string(::getpid())));
  return failures;
}
