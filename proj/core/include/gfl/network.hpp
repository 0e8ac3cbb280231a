#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gfl/activations.hpp"

namespace gfl {

/// Fully connected feed-forward architecture (d0, ..., dk) with one activation.
/// Hidden layers apply the activation coordinatewise; the last layer is affine.
struct Architecture {
  std::vector<std::size_t> widths;
  Activation activation;

  Architecture() = default;
  Architecture(std::vector<std::size_t> w, Activation act);

  [[nodiscard]] std::size_t depth() const { return widths.size() - 1; }  ///< k
  [[nodiscard]] std::size_t input_dim() const { return widths.front(); }
  [[nodiscard]] std::size_t output_dim() const { return widths.back(); }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// sum_i d_i (d_{i-1} + 1)
std::size_t param_dim(const Architecture& arch);

/// Offsets of layer `layer` (1-based) inside the flat parameter array.
struct LayerSlice {
  std::size_t weight_offset;  ///< d_i x d_{i-1} row-major block
  std::size_t bias_offset;
  std::size_t rows;
  std::size_t cols;
};
LayerSlice layer_slice(const Architecture& arch, std::size_t layer);

/// Flat parameter vector laid out as (W1, b1, ..., Wk, bk), W row-major.
class ParameterVector {
 public:
  ParameterVector() = default;
  /// Throws DimensionMismatch on length mismatch and NonFiniteState on NaN/Inf.
  ParameterVector(const Architecture& arch, std::vector<double> data);
  static ParameterVector zeros(const Architecture& arch);

  struct Block {
    std::vector<double> weights;  ///< row-major d_i x d_{i-1}
    std::vector<double> bias;
  };
  static ParameterVector from_blocks(const Architecture& arch, std::span<const Block> blocks);
  [[nodiscard]] std::vector<Block> to_blocks(const Architecture& arch) const;

  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<const double> values() const { return data_; }
  [[nodiscard]] std::span<double> mutable_values() { return data_; }
  [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  [[nodiscard]] double norm() const;
  /// Re-checks finiteness after in-place updates; throws NonFiniteState.
  void check_finite() const;

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> data_;
};

/// Reusable activation buffers for forward/backward passes.
class Workspace {
 public:
  explicit Workspace(const Architecture& arch);

 private:
  friend void forward_into(const Architecture&, std::span<const double>, std::span<const double>,
                           Workspace&);
  friend void backward_accumulate(const Architecture&, std::span<const double>,
                                  std::span<const double>, double, std::span<double>, Workspace&);
  friend std::span<const double> workspace_output(const Workspace&);
  std::vector<std::vector<double>> pre_;   ///< pre-activations per layer 1..k
  std::vector<std::vector<double>> post_;  ///< post-activations per layer 0..k-1
  std::vector<std::vector<double>> slope_;
  std::vector<double> delta_;
  std::vector<double> delta_next_;
};

std::vector<double> forward(const Architecture& arch, const ParameterVector& theta,
                            std::span<const double> x);

struct ForwardBackward {
  std::vector<double> y;
  std::vector<double> grad;
};

/// Output and gradient of <dLdy, N_theta(x)> with respect to theta.
ForwardBackward forward_backward(const Architecture& arch, const ParameterVector& theta,
                                 std::span<const double> x, std::span<const double> dLdy);

// Low-level, allocation-free variants used by the batch loops. `theta` is the flat array.
void forward_into(const Architecture& arch, std::span<const double> theta,
                  std::span<const double> x, Workspace& ws);
std::span<const double> workspace_output(const Workspace& ws);
/// After forward_into: grad += scale * d<dLdy, N(x)>/dtheta.
void backward_accumulate(const Architecture& arch, std::span<const double> theta,
                         std::span<const double> dLdy, double scale, std::span<double> grad,
                         Workspace& ws);

struct UniformInit {
  double lo;
  double hi;
};
struct NormalInit {
  double mean;
  double stddev;
};
struct GlorotUniformInit {};
using InitScheme = std::variant<UniformInit, NormalInit, GlorotUniformInit>;

/// Deterministic given the seed. Uniform/Normal fill every entry (weights and
/// biases); GlorotUniform fills weights from U(+-sqrt(6/(fan_in+fan_out))) with zero biases.
ParameterVector init_params(const Architecture& arch, const InitScheme& scheme, std::uint64_t seed);

// Binary form: u32 count, u32 widths, then little-endian f64 payload.
void write_binary(std::ostream& os, const Architecture& arch, const ParameterVector& theta);
/// Returns the widths stored in the blob and the parameters.
std::pair<std::vector<std::size_t>, std::vector<double>> read_binary(std::istream& is);

// JSON form for small nets: {"widths": [...], "activation": "...", "theta": [...]}.
std::string params_to_json(const Architecture& arch, const ParameterVector& theta);
std::pair<Architecture, ParameterVector> params_from_json(std::string_view text);

}  // namespace gfl
