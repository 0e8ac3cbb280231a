#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gfl/activations.hpp"
#include "gfl/network.hpp"
#include "gfl/polynomial.hpp"

namespace gfl {

std::size_t binomial(std::size_t n, std::size_t k);

/// All lambda in N^m with sum(lambda) <= n, in lexicographic order. |result| == C(n+m, m).
std::vector<MultiIndex> lattice_points(unsigned n, std::size_t m);

/// One term c * <a, x>^degree.
struct LinearFormTerm {
  double c;
  std::vector<double> a;
};

/// p0(x) = sum_i c_i <a_i, x>^degree.
struct LinearFormDecomposition {
  unsigned degree = 0;
  std::size_t num_vars = 0;
  std::vector<LinearFormTerm> terms;

  [[nodiscard]] double evaluate(std::span<const double> x) const;
};

/// Writes a homogeneous polynomial of degree n >= 1 in m variables as a signed sum of
/// n-th powers of the linear forms (1, l_1, ..., l_{m-1}) . x over the lattice
/// l in S(n, m-1), solving the generalized Vandermonde system by column-pivoted QR in
/// extended precision. Zero coefficients are dropped. Throws IllConditioned when the
/// reconstruction residual on 100 random points of [-1,1]^m exceeds
/// 1e-8 * (1 + max |p0|) there.
LinearFormDecomposition decompose_homogeneous(const Polynomial& p0);

/// Scalar building block x -> (j^n / alpha) (psi(x0 + x/j) - T_{n-1}psi(x0 + x/j)),
/// where alpha = psi^(n)(x0)/n! and T_{n-1} is the Taylor polynomial of order n-1 at x0.
/// It tends to x^n uniformly on compacts as j grows. For n = 1 it is the identity builder.
struct PowerFragment {
  Activation activation;
  unsigned power = 1;
  double x0 = 0.0;
  double alpha = 1.0;
  double scale = 1.0;           ///< j
  std::vector<double> taylor;   ///< psi^(k)(x0)/k!, k = 0..power-1

  [[nodiscard]] double evaluate(double x) const;
};

/// Throws NoNonzeroCoefficient (from the expansion-point search) and DegenerateScale for j <= 0.
PowerFragment build_univariate_power_jet(const Activation& act, unsigned n, double j);

/// Single-hidden-layer network x -> W2 psi(W1 x + b1) + b2.
struct ShallowNet {
  Activation activation;
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t outputs = 0;
  std::vector<double> W1;  ///< hidden x inputs, row-major
  std::vector<double> b1;
  std::vector<double> W2;  ///< outputs x hidden, row-major
  std::vector<double> b2;

  [[nodiscard]] std::vector<double> evaluate(std::span<const double> x) const;
  [[nodiscard]] Architecture architecture() const;
  [[nodiscard]] ParameterVector parameters() const;
};

/// Upper bound r (C(n+m, m) - m) on the hidden width of build_poly_shallow.
std::size_t shallow_width_bound(std::size_t inputs, std::size_t outputs, unsigned degree);

/// Shallow network approximating the polynomial map p (one Polynomial per output).
///
/// Works top-down over the homogeneous parts: the degree-d part is decomposed into
/// powers of linear forms, each form becomes one hidden unit with input weights a/s,
/// bias x0 and output weight c s^d / alpha; the Taylor terms of order < d that this
/// unit also produces are subtracted from the remaining lower-degree polynomial.
/// Degree one is realized with the identity builder, constants by the output bias.
/// The per-level scale s grows linearly in j and is enlarged where the leading
/// Taylor remainder estimate on the unit box would exceed 1/j.
ShallowNet build_poly_shallow(const Activation& act, const PolynomialMap& p, double j);

/// Sup of |net - p| over a uniform grid of `points_per_dim` points per axis of
/// [-radius, radius]^m, maximized over outputs.
double sup_error(const ShallowNet& net, const PolynomialMap& p, double radius,
                 std::size_t points_per_dim);

/// Embeds `core` as hidden layer `layer_index` of `arch`; earlier hidden layers
/// approximate the identity on R^m and later ones the identity on R^r, with every
/// unused connection zero. Throws ArchitectureTooSmall naming the violated width
/// condition.
ParameterVector embed_deep(const Architecture& arch, const ShallowNet& core,
                           std::size_t layer_index, double j);

/// Smallest valid hidden layer index for `core` in `arch` (ArchitectureTooSmall if none).
std::size_t find_core_layer(const Architecture& arch, const ShallowNet& core);

}  // namespace gfl
