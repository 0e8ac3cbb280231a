#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "gfl/losses.hpp"

namespace gfl {

using Rng = std::mt19937_64;

/// u_t = (1/2) Laplace u with u(0, x) = ||x||^2.
struct HeatSpec {
  std::size_t dim = 2;
  double horizon = 1.0;
  Box box;

  /// T = 1 and the box [-1, 1]^dim.
  static HeatSpec with_defaults(std::size_t dim);
  void validate() const;
};

/// Basket call on the maximum of d independent geometric Brownian motions with
/// drift r - c and discount e^{-rT}.
struct BlackScholesSpec {
  std::size_t dim = 1;
  double horizon = 1.0;
  double rate = 0.05;
  double carry = 0.01;
  double strike = 100.0;
  std::vector<double> sigma;
  Box box;

  /// sigma equispaced in [0.1, 0.5] (0.1 for one asset), box [K/2, 3K/2]^dim.
  static BlackScholesSpec with_defaults(std::size_t dim);
  void validate() const;
};

using PdeSpec = std::variant<HeatSpec, BlackScholesSpec>;

/// ||x + sqrt(T) Z||^2, Z standard normal.
double heat_terminal_sample(const HeatSpec& spec, std::span<const double> x, Rng& rng);
/// ||x||^2 + d t.
double heat_exact(const HeatSpec& spec, double t, std::span<const double> x);

/// e^{-rT} max(max_i X_T,i - K, 0) for the exact lognormal step. DomainError for x_i <= 0.
double bs_payoff_sample(const BlackScholesSpec& spec, std::span<const double> x, Rng& rng);

using Sampler = std::function<double(std::span<const double> x, Rng& rng)>;
Sampler terminal_sampler(const PdeSpec& spec);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;  ///< total samples, rounds x paths per round
};

/// Average of `rounds` round means of `paths` samples each; round r draws from its own
/// generator seeded by (seed, r). The standard error is the sample deviation of the
/// round means over sqrt(rounds) (zero for a single round).
McEstimate mc_reference(const Sampler& sampler, std::span<const double> x, std::size_t rounds,
                        std::size_t paths, std::uint64_t seed);

/// `batch` points uniform in the spec's box, each with one terminal sample as target and
/// weight 1/batch.
WeightedDataset kolmogorov_batch(const PdeSpec& spec, std::size_t batch, Rng& rng);

/// sum (p_i - r_i)^2 / sum r_i^2. Throws AllZeroReference, DimensionMismatch.
double relative_mse(std::span<const double> predictions, std::span<const double> references);

/// Tensor grid with round(n^(1/d)) points per axis of the box (endpoints included).
std::vector<std::vector<double>> evaluation_grid(const Box& box, std::size_t approx_points);

}  // namespace gfl
