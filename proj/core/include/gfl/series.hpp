#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gfl {

/// Truncated power series sum_k c[k] t^k, all operands sharing one truncation order.
///
/// Transcendental functions use the recurrences obtained from the ODE each
/// function satisfies (y' = y a' for exp, a y' = a' for log, ...), so the cost
/// of every operation is O(order^2) and no expression swell occurs.
class Series {
 public:
  Series() = default;
  explicit Series(std::size_t order) : c_(order + 1, 0.0) {}
  explicit Series(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  /// The identity series x0 + t.
  static Series variable(double x0, std::size_t order);
  static Series constant(double value, std::size_t order);

  [[nodiscard]] std::size_t order() const { return c_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t k) const { return c_[k]; }
  double& operator[](std::size_t k) { return c_[k]; }
  [[nodiscard]] std::span<const double> coeffs() const { return c_; }
  [[nodiscard]] std::vector<double> release() && { return std::move(c_); }

  Series& operator+=(const Series& o);
  Series& operator-=(const Series& o);
  Series& operator*=(double s);
  Series& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator+(Series a, double s) { return a += s; }
  friend Series operator+(double s, Series a) { return a += s; }
  friend Series operator-(Series a, double s) { return a += -s; }
  friend Series operator-(double s, const Series& a);
  friend Series operator*(Series a, double s) { return a *= s; }
  friend Series operator*(double s, Series a) { return a *= s; }
  friend Series operator-(Series a) { return a *= -1.0; }
  friend Series operator*(const Series& a, const Series& b);
  friend Series operator/(const Series& a, const Series& b);

 private:
  std::vector<double> c_;
};

Series exp(const Series& a);
Series log(const Series& a);
Series tanh(const Series& a);
Series erf(const Series& a);

/// Re-expand the polynomial sum_k c[k] (x - x0)^k around x0 + h.
std::vector<double> shift_polynomial(std::span<const double> coeffs, double h);

}  // namespace gfl
