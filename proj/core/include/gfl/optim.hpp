#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gfl {

struct SgdConfig {
  double lr = 0.01;
};

/// Bias-corrected Adam without weight decay.
struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerKind = std::variant<SgdConfig, AdamConfig>;

std::string optimizer_name(const OptimizerKind& kind);

class OptimizerState {
 public:
  OptimizerState(OptimizerKind kind, std::size_t dim);

  /// theta -= update(grad). Throws NonFiniteGradient (state untouched) and
  /// DimensionMismatch.
  void step(std::span<double> theta, std::span<const double> grad);

  [[nodiscard]] const OptimizerKind& kind() const { return kind_; }
  [[nodiscard]] std::uint64_t step_count() const { return step_count_; }
  [[nodiscard]] std::span<const double> first_moment() const { return m_; }
  [[nodiscard]] std::span<const double> second_moment() const { return v_; }

 private:
  OptimizerKind kind_;
  std::uint64_t step_count_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Value-semantics form of OptimizerState::step.
std::pair<std::vector<double>, OptimizerState> opt_step(OptimizerState state,
                                                         std::span<const double> theta,
                                                         std::span<const double> grad);

class EmaTracker {
 public:
  explicit EmaTracker(double alpha = 0.95);

  /// The first value seeds the average; afterwards current = alpha current + (1 - alpha) value.
  double update(double value);
  [[nodiscard]] std::optional<double> current() const { return current_; }
  [[nodiscard]] double alpha() const { return alpha_; }

 private:
  double alpha_;
  std::optional<double> current_;
};

/// `batch` distinct indices in [0, n), uniform, a pure function of (seed, step).
std::vector<std::size_t> minibatch_indices(std::size_t n, std::size_t batch, std::uint64_t seed,
                                           std::uint64_t step);

}  // namespace gfl
