#include "gfl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gfl/errors.hpp"

namespace gfl {

std::string optimizer_name(const OptimizerKind& kind) {
  return std::holds_alternative<SgdConfig>(kind) ? "sgd" : "adam";
}

OptimizerState::OptimizerState(OptimizerKind kind, std::size_t dim) : kind_(kind) {
  if (const auto* adam = std::get_if<AdamConfig>(&kind_)) {
    if (!(adam->beta1 >= 0.0 && adam->beta1 < 1.0) || !(adam->beta2 >= 0.0 && adam->beta2 < 1.0)) {
      throw DomainError("Adam betas must lie in [0, 1)");
    }
    if (!(adam->eps > 0.0)) throw DomainError("Adam eps must be positive");
    m_.assign(dim, 0.0);
    v_.assign(dim, 0.0);
  }
  const double lr = std::visit([](const auto& k) { return k.lr; }, kind_);
  if (!(lr > 0.0)) throw DomainError("learning rate must be positive");
}

void OptimizerState::step(std::span<double> theta, std::span<const double> grad) {
  if (theta.size() != grad.size()) throw DimensionMismatch("parameter and gradient lengths differ");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NonFiniteGradient("gradient coordinate " + std::to_string(i) + " is not finite at step " +
                              std::to_string(step_count_ + 1));
    }
  }
  ++step_count_;
  if (const auto* sgd = std::get_if<SgdConfig>(&kind_)) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= sgd->lr * grad[i];
    return;
  }
  const auto& a = std::get<AdamConfig>(kind_);
  if (m_.size() != theta.size()) throw DimensionMismatch("optimizer state sized for another model");
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(a.beta1, t);
  const double c2 = 1.0 - std::pow(a.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = a.beta1 * m_[i] + (1.0 - a.beta1) * grad[i];
    v_[i] = a.beta2 * v_[i] + (1.0 - a.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    theta[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

std::pair<std::vector<double>, OptimizerState> opt_step(OptimizerState state,
                                                         std::span<const double> theta,
                                                         std::span<const double> grad) {
  std::vector<double> next(theta.begin(), theta.end());
  state.step(next, grad);
  return {std::move(next), std::move(state)};
}

EmaTracker::EmaTracker(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("EMA alpha must lie in (0, 1)");
}

double EmaTracker::update(double value) {
  if (!std::isfinite(value)) throw DomainError("EMA observation is not finite");
  current_ = current_ ? alpha_ * *current_ + (1.0 - alpha_) * value : value;
  return *current_;
}

std::vector<std::size_t> minibatch_indices(std::size_t n, std::size_t batch, std::uint64_t seed,
                                           std::uint64_t step) {
  if (batch == 0 || batch > n) throw DomainError("batch size must lie in [1, dataset size]");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> out;
  out.reserve(batch);
  if (batch * 4 >= n) {
    // partial Fisher-Yates over the full range
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(batch));
    return out;
  }
  // sparse rejection sampling for small batches of large sets
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (out.size() < batch) {
    const std::size_t c = pick(rng);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace gfl
