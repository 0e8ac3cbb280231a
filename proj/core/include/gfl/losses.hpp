#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gfl/network.hpp"
#include "gfl/polynomial.hpp"

namespace gfl {

enum class LossTag { SquaredError, BinaryCrossEntropy, Huber, CrossEntropySoftmax };

struct LossKind {
  LossTag tag = LossTag::SquaredError;
  double delta = 1.0;  ///< Huber threshold

  LossKind() = default;
  LossKind(LossTag t, double d = 1.0);  // NOLINT(google-explicit-constructor)

  /// "squared_error" | "bce" | "huber" | "huber:<delta>" | "cross_entropy"
  static LossKind parse(std::string_view name);
  [[nodiscard]] std::string name() const;
};

/// Vector losses sum over coordinates. BinaryCrossEntropy is
/// -(y log yhat + (1-y) log(1-yhat)) with yhat in (0,1); CrossEntropySoftmax takes
/// logits and a target distribution (one-hot for classification).
double loss_eval(const LossKind& kind, std::span<const double> yhat, std::span<const double> y);
std::vector<double> loss_grad(const LossKind& kind, std::span<const double> yhat,
                              std::span<const double> y);
/// Allocation-free form of loss_eval + loss_grad; returns the loss.
double loss_eval_grad(const LossKind& kind, std::span<const double> yhat, std::span<const double> y,
                      std::span<double> grad);

/// Discrete probability measure with per-point regression targets. Stored flat:
/// point i occupies xs[i*in_dim, (i+1)*in_dim) and ys[i*out_dim, ...).
class WeightedDataset {
 public:
  WeightedDataset(std::size_t in_dim, std::size_t out_dim) : in_dim_(in_dim), out_dim_(out_dim) {}

  void add(std::span<const double> x, std::span<const double> y, double weight);
  /// Weights sum to 1 within 1e-12, all values finite, at least one point with
  /// positive weight. Throws DomainError otherwise.
  void validate() const;
  /// Rescales weights to sum to one. Throws ZeroMass if they sum to zero.
  void normalize();

  [[nodiscard]] std::size_t size() const { return weights_.size(); }
  [[nodiscard]] std::size_t in_dim() const { return in_dim_; }
  [[nodiscard]] std::size_t out_dim() const { return out_dim_; }
  [[nodiscard]] std::span<const double> x(std::size_t i) const {
    return {xs_.data() + i * in_dim_, in_dim_};
  }
  [[nodiscard]] std::span<const double> y(std::size_t i) const {
    return {ys_.data() + i * out_dim_, out_dim_};
  }
  [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  void set_target(std::size_t i, std::span<const double> y);

  /// The convex combination lambda * a + (1 - lambda) * b of two measures.
  static WeightedDataset mix(const WeightedDataset& a, double lambda, const WeightedDataset& b);

  /// CSV with header x_0..x_{d0-1},y_0..y_{dk-1},weight.
  void write_csv(std::ostream& os) const;
  static WeightedDataset read_csv(std::istream& is);

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> weights_;
};

/// Targets come either from a polynomial map evaluated at each x, or from the
/// labels stored in the dataset.
struct PolynomialTarget {
  PolynomialMap p;
};
struct FixedLabels {};
using TargetSpec = std::variant<PolynomialTarget, FixedLabels>;

double expected_loss(const Architecture& arch, const ParameterVector& theta,
                     const WeightedDataset& data, const TargetSpec& target, const LossKind& kind);

struct LossAndGradient {
  double loss;
  std::vector<double> grad;
};

/// Weighted sum of per-example gradients, accumulated in index order.
LossAndGradient expected_loss_grad(const Architecture& arch, const ParameterVector& theta,
                                   const WeightedDataset& data, const TargetSpec& target,
                                   const LossKind& kind);

/// Uniform average over the points `indices` (weights ignored). Gradient is
/// written into `grad` (overwritten). Returns the loss.
double batch_loss_grad(const Architecture& arch, std::span<const double> theta,
                       const WeightedDataset& data, std::span<const std::size_t> indices,
                       const LossKind& kind, std::span<double> grad, Workspace& ws);

/// Axis-aligned box [lo_i, hi_i].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  [[nodiscard]] std::size_t dim() const { return lo.size(); }
  static Box cube(std::size_t dim, double lo, double hi);
};

using Density = std::function<double(std::span<const double>)>;

/// Tensor-product trapezoidal nodes on `box`, weights proportional to
/// trapezoid weight x density, renormalized. Targets are zero-filled (out_dim wide);
/// pair with a PolynomialTarget. Throws ZeroMass if the density vanishes at every node.
WeightedDataset quadrature_dataset(const Density& density, const Box& box,
                                   std::size_t nodes_per_dim, std::size_t out_dim = 1);

}  // namespace gfl
