#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gfl {

/// Exponent vector, one entry per variable.
using MultiIndex = std::vector<unsigned>;

unsigned degree_of(const MultiIndex& idx);

/// Sparse multivariate polynomial in variables x0..x{m-1}. Zero coefficients are
/// never stored.
class Polynomial {
 public:
  explicit Polynomial(std::size_t num_vars = 1);

  static Polynomial constant(std::size_t num_vars, double c);
  /// sum_i a[i] x_i + c
  static Polynomial linear(std::span<const double> a, double c = 0.0);
  /// Parses "3*x0^2*x1 - 2*x1 + 5". `num_vars` 0 means infer from the largest index.
  static Polynomial parse(std::string_view text, std::size_t num_vars = 0);

  [[nodiscard]] std::size_t num_vars() const { return num_vars_; }
  [[nodiscard]] const std::map<MultiIndex, double>& terms() const { return terms_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  /// Highest term degree; 0 for the zero polynomial.
  [[nodiscard]] unsigned degree() const;
  [[nodiscard]] bool is_homogeneous() const;
  [[nodiscard]] double coefficient(const MultiIndex& idx) const;
  [[nodiscard]] double max_abs_coefficient() const;

  /// Adds c to the coefficient of idx (erasing it if the result is zero).
  void add_term(const MultiIndex& idx, double c);

  /// Throws DimensionMismatch unless x.size() == num_vars().
  [[nodiscard]] double evaluate(std::span<const double> x) const;
  [[nodiscard]] double operator()(std::span<const double> x) const { return evaluate(x); }

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  [[nodiscard]] Polynomial pow(unsigned e) const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::size_t num_vars_;
  std::map<MultiIndex, double> terms_;
};

/// part[d] holds exactly the degree-d terms of p; parts sum to p.
std::vector<Polynomial> homogeneous_parts(const Polynomial& p);

/// Vector-valued polynomial target R^m -> R^r.
using PolynomialMap = std::vector<Polynomial>;

std::vector<double> evaluate(const PolynomialMap& p, std::span<const double> x);

/// Default regression targets for the polynomial experiments, keyed by input dimension 1, 2, 4.
Polynomial reference_target(std::size_t input_dim);

}  // namespace gfl
