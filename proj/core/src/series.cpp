#include "gfl/series.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "gfl/errors.hpp"

namespace gfl {

namespace {

void require_same_order(const Series& a, const Series& b) {
  if (a.order() != b.order()) throw DimensionMismatch("series orders differ");
}

}  // namespace

Series Series::variable(double x0, std::size_t order) {
  Series s(order);
  s[0] = x0;
  if (order >= 1) s[1] = 1.0;
  return s;
}

Series Series::constant(double value, std::size_t order) {
  Series s(order);
  s[0] = value;
  return s;
}

Series& Series::operator+=(const Series& o) {
  require_same_order(*this, o);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Series& Series::operator-=(const Series& o) {
  require_same_order(*this, o);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Series& Series::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Series operator-(double s, const Series& a) {
  Series r = -a;
  r[0] += s;
  return r;
}

Series operator*(const Series& a, const Series& b) {
  require_same_order(a, b);
  Series r(a.order());
  for (std::size_t k = 0; k <= a.order(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= k; ++i) acc += a[i] * b[k - i];
    r[k] = acc;
  }
  return r;
}

Series operator/(const Series& a, const Series& b) {
  require_same_order(a, b);
  if (b[0] == 0.0) throw DomainError("series division by a series with zero constant term");
  Series q(a.order());
  for (std::size_t k = 0; k <= a.order(); ++k) {
    double acc = a[k];
    for (std::size_t i = 1; i <= k; ++i) acc -= b[i] * q[k - i];
    q[k] = acc / b[0];
  }
  return q;
}

Series exp(const Series& a) {
  Series e(a.order());
  e[0] = std::exp(a[0]);
  for (std::size_t k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += static_cast<double>(i) * a[i] * e[k - i];
    e[k] = acc / static_cast<double>(k);
  }
  return e;
}

Series log(const Series& a) {
  if (!(a[0] > 0.0)) throw DomainError("series log of a nonpositive constant term");
  Series l(a.order());
  l[0] = std::log(a[0]);
  for (std::size_t k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i < k; ++i) acc += static_cast<double>(i) * l[i] * a[k - i];
    l[k] = (a[k] - acc / static_cast<double>(k)) / a[0];
  }
  return l;
}

Series tanh(const Series& a) {
  // y' = (1 - y^2) a'; w tracks 1 - y^2.
  Series y(a.order());
  Series w(a.order());
  y[0] = std::tanh(a[0]);
  w[0] = 1.0 - y[0] * y[0];
  for (std::size_t k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += static_cast<double>(i) * a[i] * w[k - i];
    y[k] = acc / static_cast<double>(k);
    double sq = 0.0;
    for (std::size_t i = 0; i <= k; ++i) sq += y[i] * y[k - i];
    w[k] = -sq;
  }
  return y;
}

Series erf(const Series& a) {
  // erf(a)' = 2/sqrt(pi) exp(-a^2) a'
  const Series g = (2.0 * std::numbers::inv_sqrtpi) * exp(-(a * a));
  Series y(a.order());
  y[0] = std::erf(a[0]);
  for (std::size_t k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += static_cast<double>(i) * a[i] * g[k - i];
    y[k] = acc / static_cast<double>(k);
  }
  return y;
}

std::vector<double> shift_polynomial(std::span<const double> coeffs, double h) {
  // Horner-style synthetic division (Taylor shift).
  std::vector<double> c(coeffs.begin(), coeffs.end());
  const std::size_t n = c.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t k = n - 1; k > i; --k) c[k - 1] += h * c[k];
  }
  return c;
}

}  // namespace gfl
