#include "gfl/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gfl/errors.hpp"
#include "gfl/series.hpp"

namespace gfl {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

Series logistic(const Series& a) {
  if (a[0] >= 0.0) return Series::constant(1.0, a.order()) / (1.0 + exp(-a));
  const Series e = exp(a);
  return e / (1.0 + e);
}

Series softplus(const Series& a) {
  if (a[0] > 0.0) return a + log(1.0 + exp(-a));
  return log(1.0 + exp(a));
}

void require_order(const Activation& act, double x0, std::size_t order) {
  if (order <= 1) return;
  const auto k = act.kind;
  if (k == ActivationKind::Relu) {
    throw UnsupportedOrder("relu has no derivatives above order 1");
  }
  if ((k == ActivationKind::Elu || k == ActivationKind::Softsign) && x0 == 0.0) {
    throw UnsupportedOrder(act.name() + " is only C^1 at 0; order " + std::to_string(order) +
                           " requested");
  }
}

}  // namespace

Activation::Activation(ActivationKind k, double b) : kind(k), beta(b) {
  if (kind == ActivationKind::Swish && !(beta > 0.0)) {
    throw DomainError("swish beta must be strictly positive");
  }
}

Activation Activation::parse(std::string_view name) {
  static constexpr std::pair<std::string_view, ActivationKind> kNames[] = {
      {"logistic", ActivationKind::Logistic}, {"tanh", ActivationKind::Tanh},
      {"softplus", ActivationKind::Softplus}, {"swish", ActivationKind::Swish},
      {"gelu", ActivationKind::Gelu},         {"mish", ActivationKind::Mish},
      {"elu", ActivationKind::Elu},           {"softsign", ActivationKind::Softsign},
      {"relu", ActivationKind::Relu}};
  std::string_view head = name;
  std::string_view param;
  if (auto colon = name.find(':'); colon != std::string_view::npos) {
    head = name.substr(0, colon);
    param = name.substr(colon + 1);
  }
  for (const auto& [key, kind] : kNames) {
    if (head != key) continue;
    if (param.empty()) return Activation(kind);
    if (kind != ActivationKind::Swish) {
      throw ConfigError("activation '" + std::string(head) + "' takes no parameter");
    }
    double beta = 0.0;
    auto [ptr, ec] = std::from_chars(param.data(), param.data() + param.size(), beta);
    if (ec != std::errc() || ptr != param.data() + param.size()) {
      throw ConfigError("bad swish beta '" + std::string(param) + "'");
    }
    return Activation(kind, beta);
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string Activation::name() const {
  switch (kind) {
    case ActivationKind::Logistic: return "logistic";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Softplus: return "softplus";
    case ActivationKind::Swish: {
      if (beta == 1.0) return "swish";
      std::ostringstream os;
      os << "swish:" << beta;
      return os.str();
    }
    case ActivationKind::Gelu: return "gelu";
    case ActivationKind::Mish: return "mish";
    case ActivationKind::Elu: return "elu";
    case ActivationKind::Softsign: return "softsign";
    case ActivationKind::Relu: return "relu";
  }
  return "?";
}

bool Activation::analytic() const {
  switch (kind) {
    case ActivationKind::Elu:
    case ActivationKind::Softsign:
    case ActivationKind::Relu: return false;
    default: return true;
  }
}

bool Activation::c1() const { return kind != ActivationKind::Relu; }

std::vector<Activation> default_sweep_activations() {
  return {ActivationKind::Logistic, ActivationKind::Tanh, ActivationKind::Softplus,
          ActivationKind::Swish, ActivationKind::Gelu};
}

std::vector<Activation> all_activations() {
  return {ActivationKind::Logistic, ActivationKind::Tanh, ActivationKind::Softplus,
          ActivationKind::Swish,    ActivationKind::Gelu, ActivationKind::Mish,
          ActivationKind::Elu,      ActivationKind::Softsign, ActivationKind::Relu};
}

double act_eval(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::Logistic: return logistic(x);
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Softplus: return softplus(x);
    case ActivationKind::Swish: return x * logistic(act.beta * x);
    case ActivationKind::Gelu: return x * normal_cdf(x);
    case ActivationKind::Mish: return x * std::tanh(softplus(x));
    case ActivationKind::Elu: return x <= 0.0 ? std::expm1(x) : x;
    case ActivationKind::Softsign: return x / (std::abs(x) + 1.0);
    case ActivationKind::Relu: return x > 0.0 ? x : 0.0;
  }
  return 0.0;
}

ValueAndDerivative act_eval_with_derivative(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::Logistic: {
      const double s = logistic(x);
      return {s, s * (1.0 - s)};
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return {t, 1.0 - t * t};
    }
    case ActivationKind::Softplus: return {softplus(x), logistic(x)};
    case ActivationKind::Swish: {
      const double s = logistic(act.beta * x);
      return {x * s, s + act.beta * x * s * (1.0 - s)};
    }
    case ActivationKind::Gelu: {
      const double cdf = normal_cdf(x);
      return {x * cdf, cdf + x * normal_pdf(x)};
    }
    case ActivationKind::Mish: {
      const double t = std::tanh(softplus(x));
      return {x * t, t + x * (1.0 - t * t) * logistic(x)};
    }
    case ActivationKind::Elu:
      if (x <= 0.0) return {std::expm1(x), std::exp(x)};
      return {x, 1.0};
    case ActivationKind::Softsign: {
      const double d = std::abs(x) + 1.0;
      return {x / d, 1.0 / (d * d)};
    }
    case ActivationKind::Relu:
      // subgradient convention psi'(0) = 0
      return x > 0.0 ? ValueAndDerivative{x, 1.0} : ValueAndDerivative{0.0, 0.0};
  }
  return {0.0, 0.0};
}

double act_derivative(const Activation& act, double x) {
  return act_eval_with_derivative(act, x).derivative;
}

double Jet::evaluate_offset(double h) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * h + coeffs[k];
  return acc;
}

Jet act_jet(const Activation& act, double x0, std::size_t order) {
  if (!std::isfinite(x0)) throw DomainError("jet basepoint must be finite");
  require_order(act, x0, order);

  const Series t = Series::variable(x0, order);
  Series y(order);
  switch (act.kind) {
    case ActivationKind::Logistic: y = logistic(t); break;
    case ActivationKind::Tanh: y = tanh(t); break;
    case ActivationKind::Softplus: y = softplus(t); break;
    case ActivationKind::Swish: y = t * logistic(act.beta * t); break;
    case ActivationKind::Gelu:
      y = t * (0.5 * (1.0 + erf(t * (1.0 / std::numbers::sqrt2))));
      break;
    case ActivationKind::Mish: y = t * tanh(softplus(t)); break;
    case ActivationKind::Elu:
      if (x0 < 0.0) {
        y = exp(t) - 1.0;
      } else {
        y = t;  // order <= 1 at 0: value 0, slope 1 from both sides
      }
      break;
    case ActivationKind::Softsign:
      if (x0 > 0.0) {
        y = t / (1.0 + t);
      } else if (x0 < 0.0) {
        y = t / (1.0 - t);
      } else {
        y = t;
      }
      break;
    case ActivationKind::Relu:
      y = x0 > 0.0 ? t : Series(order);
      break;
  }
  Jet jet{x0, std::move(y).release()};
  jet.coeffs[0] = act_eval(act, x0);
  return jet;
}

ExpansionPoint find_expansion_point(const Activation& act, std::size_t order,
                                    std::span<const double> grid) {
  if (grid.empty()) throw DomainError("expansion-point search grid is empty");
  ExpansionPoint best{grid.front(), 0.0};
  for (double x : grid) {
    const double a = act_jet(act, x, order).coeffs[order];
    if (std::abs(a) > std::abs(best.alpha)) best = {x, a};
  }
  if (!(std::abs(best.alpha) > kNonzeroCoefficientThreshold)) {
    throw NoNonzeroCoefficient(act.name() + ": Taylor coefficient of order " +
                               std::to_string(order) + " vanishes on the whole grid");
  }
  return best;
}

ExpansionPoint find_expansion_point(const Activation& act, std::size_t order) {
  static const std::vector<double> grid = linspace(-3.0, 3.0, 61);
  return find_expansion_point(act, order, grid);
}

SublinearityReport sublinearity_probe(const Activation& act, double radius, std::size_t samples) {
  if (!(radius > 0.0) || samples == 0) throw DomainError("sublinearity probe needs radius > 0");
  auto sup_on = [&](double r) {
    double sup = 0.0;
    for (double x : linspace(-r, r, std::max<std::size_t>(samples, 2))) {
      sup = std::max(sup, std::abs(act_derivative(act, x)));
    }
    return sup;
  };
  const double inner = sup_on(radius);
  const double outer = sup_on(2.0 * radius);
  return {inner, outer <= 1.01 * inner};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

}  // namespace gfl
