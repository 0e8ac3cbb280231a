#include "gfl/losses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "gfl/errors.hpp"

namespace gfl {

LossKind::LossKind(LossTag t, double d) : tag(t), delta(d) {
  if (tag == LossTag::Huber && !(delta > 0.0)) throw DomainError("huber delta must be positive");
}

LossKind LossKind::parse(std::string_view name) {
  if (name == "squared_error" || name == "mse") return LossTag::SquaredError;
  if (name == "bce" || name == "binary_cross_entropy") return LossTag::BinaryCrossEntropy;
  if (name == "cross_entropy") return LossTag::CrossEntropySoftmax;
  if (name == "huber") return LossTag::Huber;
  if (name.starts_with("huber:")) {
    const auto param = name.substr(6);
    double delta = 0.0;
    auto [ptr, ec] = std::from_chars(param.data(), param.data() + param.size(), delta);
    if (ec != std::errc() || ptr != param.data() + param.size()) {
      throw ConfigError("bad huber delta '" + std::string(param) + "'");
    }
    return LossKind(LossTag::Huber, delta);
  }
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::string LossKind::name() const {
  switch (tag) {
    case LossTag::SquaredError: return "squared_error";
    case LossTag::BinaryCrossEntropy: return "bce";
    case LossTag::CrossEntropySoftmax: return "cross_entropy";
    case LossTag::Huber: {
      if (delta == 1.0) return "huber";
      std::ostringstream os;
      os << "huber:" << delta;
      return os.str();
    }
  }
  return "?";
}

double loss_eval_grad(const LossKind& kind, std::span<const double> yhat, std::span<const double> y,
                      std::span<double> grad) {
  if (yhat.size() != y.size()) throw DimensionMismatch("prediction and target sizes differ");
  if (grad.size() != yhat.size()) throw DimensionMismatch("loss gradient buffer size");
  double loss = 0.0;
  switch (kind.tag) {
    case LossTag::SquaredError:
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = yhat[i] - y[i];
        loss += r * r;
        grad[i] = 2.0 * r;
      }
      break;
    case LossTag::Huber:
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = yhat[i] - y[i];
        const double a = std::abs(r);
        if (a <= kind.delta) {
          loss += 0.5 * r * r;
          grad[i] = r;
        } else {
          loss += kind.delta * (a - 0.5 * kind.delta);
          grad[i] = std::copysign(kind.delta, r);
        }
      }
      break;
    case LossTag::BinaryCrossEntropy:
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = yhat[i];
        if (!(p > 0.0 && p < 1.0)) {
          throw DomainError("binary cross-entropy prediction outside (0,1)");
        }
        loss -= y[i] * std::log(p) + (1.0 - y[i]) * std::log1p(-p);
        grad[i] = -y[i] / p + (1.0 - y[i]) / (1.0 - p);
      }
      // soft labels make the minimum nonzero; the floor keeps the result >= 0 after rounding
      loss = std::max(loss, 0.0);
      break;
    case LossTag::CrossEntropySoftmax: {
      const double m = *std::max_element(yhat.begin(), yhat.end());
      double z = 0.0;
      for (double v : yhat) z += std::exp(v - m);
      const double lse = m + std::log(z);
      double ysum = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        loss += y[i] * (lse - yhat[i]);
        ysum += y[i];
      }
      for (std::size_t i = 0; i < y.size(); ++i) grad[i] = ysum * std::exp(yhat[i] - lse) - y[i];
      loss = std::max(loss, 0.0);
      break;
    }
  }
  return loss;
}

double loss_eval(const LossKind& kind, std::span<const double> yhat, std::span<const double> y) {
  std::vector<double> g(yhat.size());
  return loss_eval_grad(kind, yhat, y, g);
}

std::vector<double> loss_grad(const LossKind& kind, std::span<const double> yhat,
                              std::span<const double> y) {
  std::vector<double> g(yhat.size());
  loss_eval_grad(kind, yhat, y, g);
  return g;
}

void WeightedDataset::add(std::span<const double> x, std::span<const double> y, double weight) {
  if (x.size() != in_dim_ || y.size() != out_dim_) {
    throw DimensionMismatch("dataset point has the wrong dimension");
  }
  xs_.insert(xs_.end(), x.begin(), x.end());
  ys_.insert(ys_.end(), y.begin(), y.end());
  weights_.push_back(weight);
}

void WeightedDataset::set_target(std::size_t i, std::span<const double> y) {
  if (y.size() != out_dim_) throw DimensionMismatch("target has the wrong dimension");
  std::copy(y.begin(), y.end(), ys_.begin() + static_cast<std::ptrdiff_t>(i * out_dim_));
}

void WeightedDataset::validate() const {
  if (weights_.empty()) throw DomainError("dataset is empty");
  double total = 0.0;
  bool any_positive = false;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("dataset weights must be finite and >= 0");
    total += w;
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw DomainError("dataset has no point with positive weight");
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("dataset weights do not sum to 1");
  for (double v : xs_) {
    if (!std::isfinite(v)) throw DomainError("dataset point is not finite");
  }
  for (double v : ys_) {
    if (!std::isfinite(v)) throw DomainError("dataset target is not finite");
  }
}

void WeightedDataset::normalize() {
  double total = 0.0;
  for (double w : weights_) total += w;
  if (!(total > 0.0)) throw ZeroMass("dataset weights sum to zero");
  for (double& w : weights_) w /= total;
}

WeightedDataset WeightedDataset::mix(const WeightedDataset& a, double lambda,
                                     const WeightedDataset& b) {
  if (a.in_dim_ != b.in_dim_ || a.out_dim_ != b.out_dim_) {
    throw DimensionMismatch("cannot mix datasets of different shapes");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("mixing weight must lie in [0,1]");
  WeightedDataset out(a.in_dim_, a.out_dim_);
  for (std::size_t i = 0; i < a.size(); ++i) out.add(a.x(i), a.y(i), lambda * a.weight(i));
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b.x(i), b.y(i), (1.0 - lambda) * b.weight(i));
  return out;
}

void WeightedDataset::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < in_dim_; ++i) os << "x_" << i << ",";
  for (std::size_t i = 0; i < out_dim_; ++i) os << "y_" << i << ",";
  os << "weight\n";
  os.precision(17);
  for (std::size_t p = 0; p < size(); ++p) {
    for (double v : x(p)) os << v << ",";
    for (double v : y(p)) os << v << ",";
    os << weight(p) << "\n";
  }
}

WeightedDataset WeightedDataset::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaMismatch("dataset CSV is empty");
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.empty() || cols.back() != "weight") throw SchemaMismatch("last column must be 'weight'");
    for (std::size_t i = 0; i + 1 < cols.size(); ++i) {
      if (cols[i] == "x_" + std::to_string(in_dim) && out_dim == 0) {
        ++in_dim;
      } else if (cols[i] == "y_" + std::to_string(out_dim)) {
        ++out_dim;
      } else {
        throw SchemaMismatch("unexpected dataset column '" + cols[i] + "'");
      }
    }
  }
  WeightedDataset out(in_dim, out_dim);
  std::vector<double> row(in_dim + out_dim + 1);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ls, cell, ',')) {
      if (n >= row.size()) throw SchemaMismatch("too many fields in dataset row");
      row[n++] = std::stod(cell);
    }
    if (n != row.size()) throw SchemaMismatch("too few fields in dataset row");
    out.add({row.data(), in_dim}, {row.data() + in_dim, out_dim}, row.back());
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_target(const WeightedDataset& data, const TargetSpec& target, Fn&& fn) {
  std::vector<double> buf(data.out_dim());
  const auto* poly = std::get_if<PolynomialTarget>(&target);
  if (poly && poly->p.size() != data.out_dim()) {
    throw DimensionMismatch("polynomial target arity differs from the output dimension");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (poly) {
      for (std::size_t o = 0; o < buf.size(); ++o) buf[o] = poly->p[o].evaluate(data.x(i));
      fn(i, std::span<const double>(buf));
    } else {
      fn(i, data.y(i));
    }
  }
}

}  // namespace

double expected_loss(const Architecture& arch, const ParameterVector& theta,
                     const WeightedDataset& data, const TargetSpec& target, const LossKind& kind) {
  Workspace ws(arch);
  std::vector<double> g(arch.output_dim());
  double total = 0.0;
  for_each_target(data, target, [&](std::size_t i, std::span<const double> y) {
    forward_into(arch, theta.values(), data.x(i), ws);
    total += data.weight(i) * loss_eval_grad(kind, workspace_output(ws), y, g);
  });
  return std::max(total, 0.0);
}

LossAndGradient expected_loss_grad(const Architecture& arch, const ParameterVector& theta,
                                   const WeightedDataset& data, const TargetSpec& target,
                                   const LossKind& kind) {
  Workspace ws(arch);
  std::vector<double> g(arch.output_dim());
  LossAndGradient out{0.0, std::vector<double>(theta.size(), 0.0)};
  for_each_target(data, target, [&](std::size_t i, std::span<const double> y) {
    const double w = data.weight(i);
    if (w == 0.0) return;
    forward_into(arch, theta.values(), data.x(i), ws);
    out.loss += w * loss_eval_grad(kind, workspace_output(ws), y, g);
    backward_accumulate(arch, theta.values(), g, w, out.grad, ws);
  });
  out.loss = std::max(out.loss, 0.0);
  return out;
}

double batch_loss_grad(const Architecture& arch, std::span<const double> theta,
                       const WeightedDataset& data, std::span<const std::size_t> indices,
                       const LossKind& kind, std::span<double> grad, Workspace& ws) {
  if (indices.empty()) throw DomainError("empty batch");
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> g(arch.output_dim());
  const double w = 1.0 / static_cast<double>(indices.size());
  double total = 0.0;
  for (std::size_t i : indices) {
    forward_into(arch, theta, data.x(i), ws);
    total += loss_eval_grad(kind, workspace_output(ws), data.y(i), g);
    backward_accumulate(arch, theta, g, w, grad, ws);
  }
  return total * w;
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

WeightedDataset quadrature_dataset(const Density& density, const Box& box,
                                   std::size_t nodes_per_dim, std::size_t out_dim) {
  const std::size_t d = box.dim();
  if (d == 0 || box.hi.size() != d) throw DimensionMismatch("bad quadrature box");
  if (nodes_per_dim < 2) throw DomainError("quadrature needs at least 2 nodes per dimension");
  double total_nodes = std::pow(static_cast<double>(nodes_per_dim), static_cast<double>(d));
  if (total_nodes > 1e6) throw DomainError("quadrature grid exceeds 1e6 nodes");

  WeightedDataset out(d, out_dim);
  const std::vector<double> zeros(out_dim, 0.0);
  std::vector<std::size_t> counter(d, 0);
  std::vector<double> x(d);
  const std::size_t n = static_cast<std::size_t>(total_nodes);
  for (std::size_t flat = 0; flat < n; ++flat) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = static_cast<double>(counter[k]) / static_cast<double>(nodes_per_dim - 1);
      x[k] = box.lo[k] + t * (box.hi[k] - box.lo[k]);
      const bool edge = counter[k] == 0 || counter[k] == nodes_per_dim - 1;
      w *= edge ? 0.5 : 1.0;
    }
    const double rho = density(x);
    if (!(rho >= 0.0)) throw DomainError("density must be nonnegative");
    out.add(x, zeros, w * rho);
    for (std::size_t k = d; k-- > 0;) {
      if (++counter[k] < nodes_per_dim) break;
      counter[k] = 0;
    }
  }
  out.normalize();
  return out;
}

}  // namespace gfl
