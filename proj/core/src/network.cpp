#include "gfl/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "gfl/errors.hpp"
#include "json.hpp"

namespace gfl {

Architecture::Architecture(std::vector<std::size_t> w, Activation act)
    : widths(std::move(w)), activation(act) {
  if (widths.size() < 2) throw DimensionMismatch("architecture needs at least one layer");
  for (std::size_t d : widths) {
    if (d == 0) throw DimensionMismatch("architecture widths must be positive");
  }
}

std::size_t param_dim(const Architecture& arch) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < arch.widths.size(); ++i) {
    n += arch.widths[i] * (arch.widths[i - 1] + 1);
  }
  return n;
}

LayerSlice layer_slice(const Architecture& arch, std::size_t layer) {
  std::size_t offset = 0;
  for (std::size_t i = 1; i < layer; ++i) offset += arch.widths[i] * (arch.widths[i - 1] + 1);
  const std::size_t rows = arch.widths[layer];
  const std::size_t cols = arch.widths[layer - 1];
  return {offset, offset + rows * cols, rows, cols};
}

ParameterVector::ParameterVector(const Architecture& arch, std::vector<double> data)
    : data_(std::move(data)) {
  if (data_.size() != param_dim(arch)) {
    throw DimensionMismatch("parameter vector has length " + std::to_string(data_.size()) +
                            ", architecture needs " + std::to_string(param_dim(arch)));
  }
  check_finite();
}

ParameterVector ParameterVector::zeros(const Architecture& arch) {
  return ParameterVector(arch, std::vector<double>(param_dim(arch), 0.0));
}

ParameterVector ParameterVector::from_blocks(const Architecture& arch,
                                             std::span<const Block> blocks) {
  if (blocks.size() != arch.depth()) throw DimensionMismatch("wrong number of layer blocks");
  std::vector<double> data;
  data.reserve(param_dim(arch));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.weights.size() != arch.widths[i + 1] * arch.widths[i] ||
        b.bias.size() != arch.widths[i + 1]) {
      throw DimensionMismatch("layer block " + std::to_string(i + 1) + " has the wrong shape");
    }
    data.insert(data.end(), b.weights.begin(), b.weights.end());
    data.insert(data.end(), b.bias.begin(), b.bias.end());
  }
  return ParameterVector(arch, std::move(data));
}

std::vector<ParameterVector::Block> ParameterVector::to_blocks(const Architecture& arch) const {
  std::vector<Block> out;
  for (std::size_t layer = 1; layer <= arch.depth(); ++layer) {
    const auto s = layer_slice(arch, layer);
    Block b;
    b.weights.assign(data_.begin() + s.weight_offset, data_.begin() + s.bias_offset);
    b.bias.assign(data_.begin() + s.bias_offset, data_.begin() + s.bias_offset + s.rows);
    out.push_back(std::move(b));
  }
  return out;
}

double ParameterVector::norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

void ParameterVector::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NonFiniteState("parameter " + std::to_string(i) + " is not finite");
    }
  }
}

Workspace::Workspace(const Architecture& arch) {
  const std::size_t k = arch.depth();
  pre_.resize(k + 1);
  post_.resize(k);
  slope_.resize(k);
  std::size_t widest = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    widest = std::max(widest, arch.widths[i]);
    if (i >= 1) pre_[i].resize(arch.widths[i]);
    if (i < k) {
      post_[i].resize(arch.widths[i]);
      slope_[i].resize(arch.widths[i]);
    }
  }
  delta_.resize(widest);
  delta_next_.resize(widest);
}

void forward_into(const Architecture& arch, std::span<const double> theta,
                  std::span<const double> x, Workspace& ws) {
  if (x.size() != arch.input_dim()) throw DimensionMismatch("input has the wrong dimension");
  if (theta.size() != param_dim(arch)) throw DimensionMismatch("theta has the wrong length");
  std::copy(x.begin(), x.end(), ws.post_[0].begin());
  const std::size_t k = arch.depth();
  std::size_t offset = 0;
  for (std::size_t layer = 1; layer <= k; ++layer) {
    const std::size_t rows = arch.widths[layer];
    const std::size_t cols = arch.widths[layer - 1];
    const double* w = theta.data() + offset;
    const double* b = w + rows * cols;
    const double* in = ws.post_[layer - 1].data();
    double* z = ws.pre_[layer].data();
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = b[r];
      const double* row = w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc += row[c] * in[c];
      z[r] = acc;
    }
    if (layer < k) {
      for (std::size_t r = 0; r < rows; ++r) {
        const auto vd = act_eval_with_derivative(arch.activation, z[r]);
        ws.post_[layer][r] = vd.value;
        ws.slope_[layer][r] = vd.derivative;
      }
    }
    offset += rows * (cols + 1);
  }
}

std::span<const double> workspace_output(const Workspace& ws) { return ws.pre_.back(); }

void backward_accumulate(const Architecture& arch, std::span<const double> theta,
                         std::span<const double> dLdy, double scale, std::span<double> grad,
                         Workspace& ws) {
  const std::size_t k = arch.depth();
  if (dLdy.size() != arch.output_dim()) throw DimensionMismatch("dLdy has the wrong dimension");
  if (grad.size() != theta.size()) throw DimensionMismatch("gradient buffer has the wrong length");
  for (std::size_t r = 0; r < arch.output_dim(); ++r) ws.delta_[r] = scale * dLdy[r];

  std::size_t end = theta.size();
  for (std::size_t layer = k; layer >= 1; --layer) {
    const std::size_t rows = arch.widths[layer];
    const std::size_t cols = arch.widths[layer - 1];
    const std::size_t offset = end - rows * (cols + 1);
    const double* w = theta.data() + offset;
    double* gw = grad.data() + offset;
    double* gb = gw + rows * cols;
    const double* in = ws.post_[layer - 1].data();
    const double* delta = ws.delta_.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = delta[r];
      gb[r] += d;
      if (d == 0.0) continue;
      double* grow = gw + r * cols;
      for (std::size_t c = 0; c < cols; ++c) grow[c] += d * in[c];
    }
    if (layer > 1) {
      double* next = ws.delta_next_.data();
      std::fill(next, next + cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        const double d = delta[r];
        if (d == 0.0) continue;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) next[c] += row[c] * d;
      }
      const double* slope = ws.slope_[layer - 1].data();
      for (std::size_t c = 0; c < cols; ++c) next[c] *= slope[c];
      std::swap(ws.delta_, ws.delta_next_);
    }
    end = offset;
  }
}

std::vector<double> forward(const Architecture& arch, const ParameterVector& theta,
                            std::span<const double> x) {
  Workspace ws(arch);
  forward_into(arch, theta.values(), x, ws);
  const auto y = workspace_output(ws);
  return {y.begin(), y.end()};
}

ForwardBackward forward_backward(const Architecture& arch, const ParameterVector& theta,
                                 std::span<const double> x, std::span<const double> dLdy) {
  Workspace ws(arch);
  forward_into(arch, theta.values(), x, ws);
  ForwardBackward out;
  const auto y = workspace_output(ws);
  out.y.assign(y.begin(), y.end());
  out.grad.assign(theta.size(), 0.0);
  backward_accumulate(arch, theta.values(), dLdy, 1.0, out.grad, ws);
  return out;
}

ParameterVector init_params(const Architecture& arch, const InitScheme& scheme,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> data(param_dim(arch), 0.0);
  if (const auto* u = std::get_if<UniformInit>(&scheme)) {
    if (!(u->lo <= u->hi)) throw DomainError("uniform init needs lo <= hi");
    if (u->lo == u->hi) {
      std::fill(data.begin(), data.end(), u->lo);
    } else {
      std::uniform_real_distribution<double> dist(u->lo, u->hi);
      for (double& v : data) v = dist(rng);
    }
  } else if (const auto* n = std::get_if<NormalInit>(&scheme)) {
    if (!(n->stddev >= 0.0)) throw DomainError("normal init needs stddev >= 0");
    if (n->stddev == 0.0) {
      std::fill(data.begin(), data.end(), n->mean);
    } else {
      std::normal_distribution<double> dist(n->mean, n->stddev);
      for (double& v : data) v = dist(rng);
    }
  } else {
    for (std::size_t layer = 1; layer <= arch.depth(); ++layer) {
      const auto s = layer_slice(arch, layer);
      const double bound = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (std::size_t i = s.weight_offset; i < s.bias_offset; ++i) data[i] = dist(rng);
    }
  }
  return ParameterVector(arch, std::move(data));
}

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw TruncatedPayload("parameter blob is truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_binary(std::ostream& os, const Architecture& arch, const ParameterVector& theta) {
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arch.widths.size()));
  for (std::size_t w : arch.widths) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  for (double v : theta.values()) put_le<double>(os, v);
}

std::pair<std::vector<std::size_t>, std::vector<double>> read_binary(std::istream& is) {
  const auto count = get_le<std::uint32_t>(is);
  if (count < 2 || count > 1024) throw SchemaMismatch("implausible width count in parameter blob");
  std::vector<std::size_t> widths(count);
  for (auto& w : widths) w = get_le<std::uint32_t>(is);
  std::size_t n = 0;
  for (std::size_t i = 1; i < widths.size(); ++i) n += widths[i] * (widths[i - 1] + 1);
  std::vector<double> data(n);
  for (auto& v : data) v = get_le<double>(is);
  return {std::move(widths), std::move(data)};
}

std::string params_to_json(const Architecture& arch, const ParameterVector& theta) {
  nlohmann::json j;
  j["widths"] = arch.widths;
  j["activation"] = arch.activation.name();
  j["theta"] = std::vector<double>(theta.values().begin(), theta.values().end());
  return j.dump();
}

std::pair<Architecture, ParameterVector> params_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Architecture arch(j.at("widths").get<std::vector<std::size_t>>(),
                      Activation::parse(j.at("activation").get<std::string>()));
    ParameterVector theta(arch, j.at("theta").get<std::vector<double>>());
    return {std::move(arch), std::move(theta)};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("parameter JSON: ") + e.what());
  }
}

}  // namespace gfl
