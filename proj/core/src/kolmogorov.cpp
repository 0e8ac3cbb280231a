#include "gfl/kolmogorov.hpp"

#include <algorithm>
#include <cmath>

#include "gfl/activations.hpp"
#include "gfl/errors.hpp"

namespace gfl {

namespace {

void check_box(const Box& box, std::size_t dim) {
  if (box.lo.size() != dim || box.hi.size() != dim) throw DimensionMismatch("sample box dimension");
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(box.lo[i] < box.hi[i])) throw DomainError("sample box is degenerate along axis " + std::to_string(i));
  }
}

void check_point(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim) {
    throw DimensionMismatch("point of dimension " + std::to_string(x.size()) + " for a " +
                            std::to_string(dim) + "-dimensional problem");
  }
}

}  // namespace

HeatSpec HeatSpec::with_defaults(std::size_t dim) {
  HeatSpec s;
  s.dim = dim;
  s.horizon = 1.0;
  s.box = Box::cube(dim, -1.0, 1.0);
  return s;
}

void HeatSpec::validate() const {
  if (dim == 0) throw DomainError("heat dimension must be positive");
  if (!(horizon > 0.0)) throw DomainError("heat horizon must be positive");
  check_box(box, dim);
}

BlackScholesSpec BlackScholesSpec::with_defaults(std::size_t dim) {
  BlackScholesSpec s;
  s.dim = dim;
  s.sigma = dim == 1 ? std::vector<double>{0.1} : linspace(0.1, 0.5, dim);
  s.box = Box::cube(dim, 0.5 * s.strike, 1.5 * s.strike);
  return s;
}

void BlackScholesSpec::validate() const {
  if (dim == 0) throw DomainError("Black-Scholes dimension must be positive");
  if (!(horizon > 0.0)) throw DomainError("Black-Scholes horizon must be positive");
  if (!(strike > 0.0)) throw DomainError("strike must be positive");
  if (sigma.size() != dim) throw DimensionMismatch("need one volatility per asset");
  for (double s : sigma) {
    if (!(s > 0.0)) throw DomainError("volatilities must be positive");
  }
  check_box(box, dim);
  for (double lo : box.lo) {
    if (!(lo > 0.0)) throw DomainError("Black-Scholes sample box must lie in the open positive orthant");
  }
}

double heat_terminal_sample(const HeatSpec& spec, std::span<const double> x, Rng& rng) {
  check_point(x, spec.dim);
  std::normal_distribution<double> z;
  const double root_t = std::sqrt(spec.horizon);
  double acc = 0.0;
  for (double xi : x) {
    const double v = xi + root_t * z(rng);
    acc += v * v;
  }
  return acc;
}

double heat_exact(const HeatSpec& spec, double t, std::span<const double> x) {
  check_point(x, spec.dim);
  if (t < 0.0) throw DomainError("time must be nonnegative");
  double acc = 0.0;
  for (double xi : x) acc += xi * xi;
  return acc + static_cast<double>(spec.dim) * t;
}

double bs_payoff_sample(const BlackScholesSpec& spec, std::span<const double> x, Rng& rng) {
  check_point(x, spec.dim);
  if (spec.sigma.size() != spec.dim) throw DimensionMismatch("need one volatility per asset");
  std::normal_distribution<double> z;
  const double T = spec.horizon;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.dim; ++i) {
    if (!(x[i] > 0.0)) throw DomainError("asset prices must be positive");
    const double s = spec.sigma[i];
    const double xt = x[i] * std::exp((spec.rate - spec.carry - 0.5 * s * s) * T + s * std::sqrt(T) * z(rng));
    best = std::max(best, xt);
  }
  return std::exp(-spec.rate * T) * std::max(best - spec.strike, 0.0);
}

Sampler terminal_sampler(const PdeSpec& spec) {
  if (const auto* heat = std::get_if<HeatSpec>(&spec)) {
    return [s = *heat](std::span<const double> x, Rng& rng) { return heat_terminal_sample(s, x, rng); };
  }
  return [s = std::get<BlackScholesSpec>(spec)](std::span<const double> x, Rng& rng) {
    return bs_payoff_sample(s, x, rng);
  };
}

McEstimate mc_reference(const Sampler& sampler, std::span<const double> x, std::size_t rounds,
                        std::size_t paths, std::uint64_t seed) {
  if (rounds == 0 || paths == 0) throw DomainError("rounds and paths must be positive");
  std::vector<double> means(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    Rng rng(seq);
    double acc = 0.0;
    for (std::size_t p = 0; p < paths; ++p) acc += sampler(x, rng);
    means[r] = acc / static_cast<double>(paths);
  }
  McEstimate est;
  est.paths = rounds * paths;
  double total = 0.0;
  for (double m : means) total += m;
  est.mean = total / static_cast<double>(rounds);
  if (rounds > 1) {
    double ss = 0.0;
    for (double m : means) ss += (m - est.mean) * (m - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(rounds - 1) / static_cast<double>(rounds));
  }
  return est;
}

WeightedDataset kolmogorov_batch(const PdeSpec& spec, std::size_t batch, Rng& rng) {
  if (batch == 0) throw DomainError("batch must be positive");
  const Box& box = std::visit([](const auto& s) -> const Box& { return s.box; }, spec);
  const Sampler sampler = terminal_sampler(spec);
  WeightedDataset out(box.dim(), 1);
  std::vector<double> x(box.dim());
  const double w = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    const double y = sampler(x, rng);
    out.add(x, std::span<const double>(&y, 1), w);
  }
  return out;
}

double relative_mse(std::span<const double> predictions, std::span<const double> references) {
  if (predictions.size() != references.size() || predictions.empty()) {
    throw DimensionMismatch("relative MSE needs equal, nonzero lengths");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - references[i];
    num += d * d;
    den += references[i] * references[i];
  }
  if (den == 0.0) throw AllZeroReference("all reference values are zero");
  return num / den;
}

std::vector<std::vector<double>> evaluation_grid(const Box& box, std::size_t approx_points) {
  const std::size_t d = box.dim();
  const auto per_dim = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(approx_points), 1.0 / d))));
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < d; ++i) axes.push_back(linspace(box.lo[i], box.hi[i], per_dim));
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> counter(d, 0);
  while (true) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = axes[i][counter[i]];
    out.push_back(std::move(x));
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++counter[k] < per_dim) break;
      counter[k] = 0;
      if (k == 0) return out;
    }
  }
}

}  // namespace gfl
