#include "gfl/polybuild.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "gfl/errors.hpp"

namespace gfl {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<MultiIndex> lattice_points(unsigned n, std::size_t m) {
  std::vector<MultiIndex> out;
  MultiIndex cur(m, 0);
  // odometer over {0..n}^m, keeping points with |lambda| <= n
  while (true) {
    if (degree_of(cur) <= n) out.push_back(cur);
    std::size_t k = m;
    while (k > 0) {
      --k;
      if (cur[k] < n) {
        ++cur[k];
        break;
      }
      cur[k] = 0;
      if (k == 0) return out;
    }
    if (m == 0) return out;
  }
}

double LinearFormDecomposition::evaluate(std::span<const double> x) const {
  if (x.size() != num_vars) throw DimensionMismatch("decomposition evaluated at wrong dimension");
  double acc = 0.0;
  for (const auto& t : terms) {
    double dot = 0.0;
    for (std::size_t i = 0; i < num_vars; ++i) dot += t.a[i] * x[i];
    acc += t.c * std::pow(dot, static_cast<int>(degree));
  }
  return acc;
}

namespace {

using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

long double multinomial(unsigned n, unsigned first, const MultiIndex& rest) {
  long double r = 1.0L;
  unsigned remaining = n;
  auto take = [&](unsigned k) {
    // C(remaining, k), then drop those k
    for (unsigned i = 1; i <= k; ++i) r = r * static_cast<long double>(remaining - k + i) / i;
    remaining -= k;
  };
  take(first);
  for (unsigned k : rest) take(k);
  return r;
}

long double lattice_power(const MultiIndex& base, const MultiIndex& exponent) {
  long double r = 1.0L;
  for (std::size_t k = 0; k < base.size(); ++k) {
    for (unsigned e = 0; e < exponent[k]; ++e) r *= static_cast<long double>(base[k]);
  }
  return r;
}

}  // namespace

LinearFormDecomposition decompose_homogeneous(const Polynomial& p0) {
  const unsigned n = p0.degree();
  const std::size_t m = p0.num_vars();
  if (p0.is_zero() || n < 1) throw DomainError("decomposition needs a nonzero homogeneous polynomial of degree >= 1");
  if (!p0.is_homogeneous()) throw DomainError("decomposition input is not homogeneous");

  // x0 plays the role of the distinguished variable; lattice over the other m-1.
  const auto lattice = lattice_points(n, m - 1);
  const auto size = static_cast<Eigen::Index>(lattice.size());
  ExtMatrix vandermonde(size, size);
  ExtVector rhs(size);
  for (Eigen::Index row = 0; row < size; ++row) {
    const MultiIndex& mu = lattice[static_cast<std::size_t>(row)];
    const unsigned mu0 = n - degree_of(mu);
    MultiIndex full(m);
    full[0] = mu0;
    std::copy(mu.begin(), mu.end(), full.begin() + 1);
    rhs(row) = static_cast<long double>(p0.coefficient(full)) / multinomial(n, mu0, mu);
    for (Eigen::Index col = 0; col < size; ++col) {
      vandermonde(row, col) = lattice_power(lattice[static_cast<std::size_t>(col)], mu);
    }
  }
  const ExtVector coeffs = vandermonde.colPivHouseholderQr().solve(rhs);

  LinearFormDecomposition out;
  out.degree = n;
  out.num_vars = m;
  long double largest = 0.0L;
  for (Eigen::Index i = 0; i < size; ++i) largest = std::max(largest, std::abs(coeffs(i)));
  for (Eigen::Index i = 0; i < size; ++i) {
    if (std::abs(coeffs(i)) <= 1e-15L * largest) continue;
    LinearFormTerm t;
    t.c = static_cast<double>(coeffs(i));
    t.a.assign(m, 1.0);
    const MultiIndex& lambda = lattice[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k + 1 < m; ++k) t.a[k + 1] = static_cast<double>(lambda[k]);
    out.terms.push_back(std::move(t));
  }

  std::mt19937_64 rng(0x5eedULL + n * 131 + m);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(m);
  double worst = 0.0;
  double scale = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (double& v : x) v = unif(rng);
    const double exact = p0.evaluate(x);
    worst = std::max(worst, std::abs(exact - out.evaluate(x)));
    scale = std::max(scale, std::abs(exact));
  }
  if (!(worst <= 1e-8 * (1.0 + scale))) {
    throw IllConditioned("linear-form decomposition of a degree-" + std::to_string(n) +
                         " form in " + std::to_string(m) + " variables has residual " +
                         std::to_string(worst));
  }
  return out;
}

double PowerFragment::evaluate(double x) const {
  const double u = x / scale;
  double taylor_part = 0.0;
  for (std::size_t k = taylor.size(); k-- > 0;) taylor_part = taylor_part * u + taylor[k];
  return std::pow(scale, static_cast<int>(power)) / alpha *
         (act_eval(activation, x0 + u) - taylor_part);
}

PowerFragment build_univariate_power_jet(const Activation& act, unsigned n, double j) {
  if (!(j > 0.0)) throw DegenerateScale("scale j must be positive");
  if (n == 0) throw DomainError("power must be at least 1");
  const auto ep = find_expansion_point(act, n);
  const Jet jet = act_jet(act, ep.x0, n);
  PowerFragment f;
  f.activation = act;
  f.power = n;
  f.x0 = ep.x0;
  f.alpha = ep.alpha;
  f.scale = j;
  f.taylor.assign(jet.coeffs.begin(), jet.coeffs.begin() + n);
  return f;
}

std::vector<double> ShallowNet::evaluate(std::span<const double> x) const {
  if (x.size() != inputs) throw DimensionMismatch("shallow net input dimension");
  std::vector<double> h(hidden);
  for (std::size_t u = 0; u < hidden; ++u) {
    double z = b1[u];
    for (std::size_t i = 0; i < inputs; ++i) z += W1[u * inputs + i] * x[i];
    h[u] = act_eval(activation, z);
  }
  std::vector<double> y(b2);
  for (std::size_t o = 0; o < outputs; ++o) {
    for (std::size_t u = 0; u < hidden; ++u) y[o] += W2[o * hidden + u] * h[u];
  }
  return y;
}

Architecture ShallowNet::architecture() const { return Architecture({inputs, hidden, outputs}, activation); }

ParameterVector ShallowNet::parameters() const {
  std::vector<double> data;
  data.reserve(W1.size() + b1.size() + W2.size() + b2.size());
  data.insert(data.end(), W1.begin(), W1.end());
  data.insert(data.end(), b1.begin(), b1.end());
  data.insert(data.end(), W2.begin(), W2.end());
  data.insert(data.end(), b2.begin(), b2.end());
  return ParameterVector(architecture(), std::move(data));
}

std::size_t shallow_width_bound(std::size_t inputs, std::size_t outputs, unsigned degree) {
  return outputs * (binomial(degree + inputs, inputs) - inputs);
}

namespace {

struct Unit {
  std::vector<double> w;
  double bias;
  double out;
};

/// max(j, 2 j e1, sqrt(2 j e2)): keeps both leading remainder terms below 1/(2j).
double level_scale(double j, double e1, double e2) {
  return std::max({j, 2.0 * j * e1, std::sqrt(2.0 * j * e2)});
}

double l1_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

/// Units and output bias for one output component.
std::pair<std::vector<Unit>, double> build_component(const Activation& act, Polynomial q,
                                                     double j) {
  const std::size_t m = q.num_vars();
  std::vector<Unit> units;
  for (unsigned d = q.degree(); d >= 2; --d) {
    const auto parts = homogeneous_parts(q);
    if (d >= parts.size() || parts[d].is_zero()) continue;
    const Polynomial& part = parts[d];
    const auto dec = decompose_homogeneous(part);
    const auto ep = find_expansion_point(act, d);
    const Jet jet = act_jet(act, ep.x0, d + 2);

    double a1 = 0.0;
    double a2 = 0.0;
    for (const auto& t : dec.terms) {
      const double norm = l1_norm(t.a);
      a1 += std::abs(t.c) * std::pow(norm, d + 1);
      a2 += std::abs(t.c) * std::pow(norm, d + 2);
    }
    const double s = level_scale(j, std::abs(jet.coeffs[d + 1] / ep.alpha) * a1,
                                 std::abs(jet.coeffs[d + 2] / ep.alpha) * a2);

    q -= part;
    for (const auto& t : dec.terms) {
      Unit u;
      u.w.resize(m);
      for (std::size_t i = 0; i < m; ++i) u.w[i] = t.a[i] / s;
      u.bias = ep.x0;
      u.out = t.c * std::pow(s, d) / ep.alpha;
      units.push_back(std::move(u));

      // the unit also emits c s^{d-k} psi_k / alpha <a,x>^k for k < d
      const Polynomial form = Polynomial::linear(t.a);
      Polynomial power = Polynomial::constant(m, 1.0);
      for (unsigned k = 0; k < d; ++k) {
        const double factor = t.c * jet.coeffs[k] / ep.alpha * std::pow(s, d - k);
        q -= factor * power;
        power = power * form;
      }
    }
  }

  // degree <= 1 remainder: identity builder on the linear form, constant into the bias
  std::vector<double> lin(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    MultiIndex idx(m, 0);
    idx[i] = 1;
    lin[i] = q.coefficient(idx);
  }
  double bias = q.coefficient(MultiIndex(m, 0));
  if (l1_norm(lin) > 0.0) {
    const auto ep = find_expansion_point(act, 1);
    const Jet jet = act_jet(act, ep.x0, 3);
    const double norm = l1_norm(lin);
    const double s = level_scale(j, std::abs(jet.coeffs[2] / ep.alpha) * norm * norm,
                                 std::abs(jet.coeffs[3] / ep.alpha) * norm * norm * norm);
    Unit u;
    u.w.resize(m);
    for (std::size_t i = 0; i < m; ++i) u.w[i] = lin[i] / s;
    u.bias = ep.x0;
    u.out = s / ep.alpha;
    bias -= u.out * jet.coeffs[0];
    units.push_back(std::move(u));
  }
  return {std::move(units), bias};
}

}  // namespace

ShallowNet build_poly_shallow(const Activation& act, const PolynomialMap& p, double j) {
  if (!(j > 0.0)) throw DegenerateScale("scale j must be positive");
  if (p.empty()) throw DimensionMismatch("polynomial map has no components");
  if (!act.analytic()) {
    throw DomainError("the polynomial builder needs an analytic activation, got " + act.name());
  }
  const std::size_t m = p.front().num_vars();
  std::vector<std::vector<Unit>> per_output;
  ShallowNet net;
  net.activation = act;
  net.inputs = m;
  net.outputs = p.size();
  for (const auto& component : p) {
    if (component.num_vars() != m) throw DimensionMismatch("polynomial components disagree on arity");
    auto [units, bias] = build_component(act, component, j);
    per_output.push_back(std::move(units));
    net.b2.push_back(bias);
  }
  std::size_t hidden = 0;
  for (const auto& u : per_output) hidden += u.size();
  net.hidden = std::max<std::size_t>(hidden, 1);
  net.W1.assign(net.hidden * m, 0.0);
  net.b1.assign(net.hidden, 0.0);
  net.W2.assign(net.outputs * net.hidden, 0.0);
  std::size_t row = 0;
  for (std::size_t o = 0; o < per_output.size(); ++o) {
    for (const auto& u : per_output[o]) {
      std::copy(u.w.begin(), u.w.end(), net.W1.begin() + static_cast<std::ptrdiff_t>(row * m));
      net.b1[row] = u.bias;
      net.W2[o * net.hidden + row] = u.out;
      ++row;
    }
  }
  return net;
}

double sup_error(const ShallowNet& net, const PolynomialMap& p, double radius,
                 std::size_t points_per_dim) {
  const std::size_t m = net.inputs;
  const auto axis = linspace(-radius, radius, points_per_dim);
  std::vector<std::size_t> counter(m, 0);
  std::vector<double> x(m);
  double worst = 0.0;
  while (true) {
    for (std::size_t k = 0; k < m; ++k) x[k] = axis[counter[k]];
    const auto y = net.evaluate(x);
    for (std::size_t o = 0; o < p.size(); ++o) worst = std::max(worst, std::abs(y[o] - p[o].evaluate(x)));
    std::size_t k = m;
    while (k > 0) {
      --k;
      if (++counter[k] < points_per_dim) break;
      counter[k] = 0;
      if (k == 0) return worst;
    }
  }
}

namespace {

std::string width_condition_failure(const Architecture& arch, const ShallowNet& core,
                                    std::size_t layer_index) {
  const auto& w = arch.widths;
  if (w[layer_index] < core.hidden) {
    return "hidden layer " + std::to_string(layer_index) + " has width " +
           std::to_string(w[layer_index]) + " but the core needs " + std::to_string(core.hidden);
  }
  for (std::size_t l = 1; l < layer_index; ++l) {
    if (w[l] < w.front()) {
      return "hidden layer " + std::to_string(l) + " before the core has width " +
             std::to_string(w[l]) + " < input dimension " + std::to_string(w.front());
    }
  }
  for (std::size_t l = layer_index + 1; l < arch.depth(); ++l) {
    if (w[l] < w.back()) {
      return "hidden layer " + std::to_string(l) + " after the core has width " +
             std::to_string(w[l]) + " < output dimension " + std::to_string(w.back());
    }
  }
  return {};
}

/// Row-major dense affine readout v = A h + a from a layer's activations.
struct Readout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;
  std::vector<double> a;
};

}  // namespace

std::size_t find_core_layer(const Architecture& arch, const ShallowNet& core) {
  for (std::size_t l = 1; l < arch.depth(); ++l) {
    if (width_condition_failure(arch, core, l).empty()) return l;
  }
  throw ArchitectureTooSmall("no hidden layer of " + std::to_string(arch.depth() - 1) +
                             " can host a core of width " + std::to_string(core.hidden));
}

ParameterVector embed_deep(const Architecture& arch, const ShallowNet& core,
                           std::size_t layer_index, double j) {
  if (!(j > 0.0)) throw DegenerateScale("scale j must be positive");
  if (arch.activation != core.activation) throw DomainError("core and architecture use different activations");
  if (arch.input_dim() != core.inputs || arch.output_dim() != core.outputs) {
    throw DimensionMismatch("core input/output dimensions differ from the architecture");
  }
  if (layer_index == 0 || layer_index >= arch.depth()) {
    throw DomainError("core layer index must lie strictly between 0 and the depth");
  }
  if (const auto why = width_condition_failure(arch, core, layer_index); !why.empty()) {
    throw ArchitectureTooSmall(why);
  }

  const std::size_t k = arch.depth();
  const auto& w = arch.widths;
  const auto ep = find_expansion_point(arch.activation, 1);
  const Jet jet = act_jet(arch.activation, ep.x0, 3);
  const double s = level_scale(j, std::abs(jet.coeffs[2] / ep.alpha),
                               std::abs(jet.coeffs[3] / ep.alpha));

  std::vector<ParameterVector::Block> blocks(k);
  for (std::size_t l = 1; l <= k; ++l) {
    blocks[l - 1].weights.assign(w[l] * w[l - 1], 0.0);
    blocks[l - 1].bias.assign(w[l], 0.0);
  }

  Readout r;  // v = x initially
  r.rows = r.cols = w[0];
  r.A.assign(r.rows * r.cols, 0.0);
  for (std::size_t i = 0; i < r.rows; ++i) r.A[i * r.cols + i] = 1.0;
  r.a.assign(r.rows, 0.0);

  // z_u = sum_c M[u][c] v_c + beta_u, with v = A h + a, written into layer l's block
  auto emit = [&](std::size_t l, std::size_t units, const std::vector<double>& M,
                  std::span<const double> beta, std::size_t vdim) {
    auto& blk = blocks[l - 1];
    const std::size_t cols = w[l - 1];
    for (std::size_t u = 0; u < units; ++u) {
      double b = beta[u];
      for (std::size_t c = 0; c < vdim; ++c) {
        const double mc = M[u * vdim + c];
        if (mc == 0.0) continue;
        b += mc * r.a[c];
        for (std::size_t h = 0; h < r.cols; ++h) blk.weights[u * cols + h] += mc * r.A[c * r.cols + h];
      }
      blk.bias[u] = b;
    }
  };

  auto identity_layer = [&](std::size_t l, std::size_t dim) {
    std::vector<double> M(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) M[i * dim + i] = 1.0 / s;
    const std::vector<double> beta(dim, ep.x0);
    emit(l, dim, M, beta, dim);
    Readout next;
    next.rows = dim;
    next.cols = w[l];
    next.A.assign(dim * w[l], 0.0);
    for (std::size_t i = 0; i < dim; ++i) next.A[i * w[l] + i] = s / ep.alpha;
    next.a.assign(dim, -s / ep.alpha * jet.coeffs[0]);
    r = std::move(next);
  };

  for (std::size_t l = 1; l < layer_index; ++l) identity_layer(l, core.inputs);

  emit(layer_index, core.hidden, core.W1, core.b1, core.inputs);
  {
    Readout next;
    next.rows = core.outputs;
    next.cols = w[layer_index];
    next.A.assign(next.rows * next.cols, 0.0);
    for (std::size_t o = 0; o < core.outputs; ++o) {
      for (std::size_t u = 0; u < core.hidden; ++u) {
        next.A[o * next.cols + u] = core.W2[o * core.hidden + u];
      }
    }
    next.a = core.b2;
    r = std::move(next);
  }

  for (std::size_t l = layer_index + 1; l < k; ++l) identity_layer(l, core.outputs);

  // affine output layer reads v directly
  auto& last = blocks[k - 1];
  for (std::size_t o = 0; o < r.rows; ++o) {
    for (std::size_t h = 0; h < r.cols; ++h) last.weights[o * r.cols + h] = r.A[o * r.cols + h];
    last.bias[o] = r.a[o];
  }
  return ParameterVector::from_blocks(arch, blocks);
}

}  // namespace gfl
