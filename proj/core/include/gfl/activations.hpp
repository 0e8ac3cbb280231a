#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gfl {

enum class ActivationKind { Logistic, Tanh, Softplus, Swish, Gelu, Mish, Elu, Softsign, Relu };

/// An activation function. `beta` is only meaningful for Swish.
struct Activation {
  ActivationKind kind = ActivationKind::Tanh;
  double beta = 1.0;

  Activation() = default;
  Activation(ActivationKind k, double b = 1.0);  // NOLINT(google-explicit-constructor)

  /// Parses "logistic", "tanh", "softplus", "swish" / "swish:<beta>", "gelu",
  /// "mish", "elu", "softsign", "relu".
  static Activation parse(std::string_view name);
  [[nodiscard]] std::string name() const;

  /// Real analytic on all of R (sublinear analytic activations).
  [[nodiscard]] bool analytic() const;
  /// Continuously differentiable on R (Relu is not).
  [[nodiscard]] bool c1() const;

  friend bool operator==(const Activation&, const Activation&) = default;
};

/// The five analytic activations used for the default polynomial sweeps.
std::vector<Activation> default_sweep_activations();
/// Every kind in the catalog, Swish with beta = 1.
std::vector<Activation> all_activations();

double act_eval(const Activation& act, double x);
double act_derivative(const Activation& act, double x);

struct ValueAndDerivative {
  double value;
  double derivative;
};
ValueAndDerivative act_eval_with_derivative(const Activation& act, double x);

/// Normalized Taylor coefficients psi^(j)(x0)/j!, j = 0..order.
struct Jet {
  double basepoint = 0.0;
  std::vector<double> coeffs;

  [[nodiscard]] std::size_t order() const { return coeffs.size() - 1; }
  /// Evaluates the truncated series at basepoint + h.
  [[nodiscard]] double evaluate_offset(double h) const;
};

/// Throws UnsupportedOrder when the activation has no derivative of the
/// requested order at x0 (Relu above order 1, Elu/Softsign above order 1 at 0).
Jet act_jet(const Activation& act, double x0, std::size_t order);

struct ExpansionPoint {
  double x0;
  double alpha;  ///< psi^(order)(x0) / order!
};

inline constexpr double kNonzeroCoefficientThreshold = 1e-12;

/// Grid point maximizing |psi^(order)(x)/order!|. Throws NoNonzeroCoefficient
/// if the best magnitude does not exceed kNonzeroCoefficientThreshold.
ExpansionPoint find_expansion_point(const Activation& act, std::size_t order,
                                    std::span<const double> grid);
/// Same, over linspace(-3, 3, 61).
ExpansionPoint find_expansion_point(const Activation& act, std::size_t order);

struct SublinearityReport {
  double sup_abs_derivative;
  bool bounded;
};

/// Maximum of |psi'| over `samples` equispaced points in [-radius, radius];
/// `bounded` holds when the same estimate on [-2 radius, 2 radius] grew by at most 1%.
SublinearityReport sublinearity_probe(const Activation& act, double radius, std::size_t samples);

std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace gfl
