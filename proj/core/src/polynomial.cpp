#include "gfl/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "gfl/errors.hpp"

namespace gfl {

unsigned degree_of(const MultiIndex& idx) { return std::accumulate(idx.begin(), idx.end(), 0u); }

Polynomial::Polynomial(std::size_t num_vars) : num_vars_(num_vars) {
  if (num_vars == 0) throw DimensionMismatch("polynomial needs at least one variable");
}

Polynomial Polynomial::constant(std::size_t num_vars, double c) {
  Polynomial p(num_vars);
  p.add_term(MultiIndex(num_vars, 0), c);
  return p;
}

Polynomial Polynomial::linear(std::span<const double> a, double c) {
  Polynomial p(a.size());
  p.add_term(MultiIndex(a.size(), 0), c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    MultiIndex idx(a.size(), 0);
    idx[i] = 1;
    p.add_term(idx, a[i]);
  }
  return p;
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const auto& [idx, c] : terms_) d = std::max(d, degree_of(idx));
  return d;
}

bool Polynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  const unsigned d = degree_of(terms_.begin()->first);
  return std::all_of(terms_.begin(), terms_.end(),
                     [d](const auto& t) { return degree_of(t.first) == d; });
}

double Polynomial::coefficient(const MultiIndex& idx) const {
  const auto it = terms_.find(idx);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [idx, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void Polynomial::add_term(const MultiIndex& idx, double c) {
  if (idx.size() != num_vars_) throw DimensionMismatch("multi-index arity mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(idx, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != num_vars_) {
    throw DimensionMismatch("polynomial in " + std::to_string(num_vars_) +
                            " variables evaluated at a point of dimension " +
                            std::to_string(x.size()));
  }
  double acc = 0.0;
  for (const auto& [idx, c] : terms_) {
    double term = c;
    for (std::size_t v = 0; v < num_vars_; ++v) {
      for (unsigned e = 0; e < idx[v]; ++e) term *= x[v];
    }
    acc += term;
  }
  return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw DimensionMismatch("polynomial arity mismatch");
  for (const auto& [idx, c] : o.terms_) add_term(idx, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.num_vars_ != num_vars_) throw DimensionMismatch("polynomial arity mismatch");
  for (const auto& [idx, c] : o.terms_) add_term(idx, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [idx, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.num_vars_ != b.num_vars_) throw DimensionMismatch("polynomial arity mismatch");
  Polynomial r(a.num_vars_);
  MultiIndex idx(a.num_vars_);
  for (const auto& [ia, ca] : a.terms_) {
    for (const auto& [ib, cb] : b.terms_) {
      for (std::size_t v = 0; v < idx.size(); ++v) idx[v] = ia[v] + ib[v];
      r.add_term(idx, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial r = constant(num_vars_, 1.0);
  for (unsigned i = 0; i < e; ++i) r = r * *this;
  return r;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  // highest degree first, reads like the usual notation
  std::vector<std::pair<MultiIndex, double>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& l, const auto& r) {
    return degree_of(l.first) > degree_of(r.first);
  });
  for (const auto& [idx, c] : ordered) {
    double mag = c;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    mag = std::abs(c);
    const bool is_const = degree_of(idx) == 0;
    if (is_const || mag != 1.0) {
      os << mag;
      if (!is_const) os << "*";
    }
    bool first_var = true;
    for (std::size_t v = 0; v < idx.size(); ++v) {
      if (idx[v] == 0) continue;
      if (!first_var) os << "*";
      os << "x" << v;
      if (idx[v] > 1) os << "^" << idx[v];
      first_var = false;
    }
    first = false;
  }
  return os.str();
}

namespace {

class PolyParser {
 public:
  explicit PolyParser(std::string_view s) : s_(s) {}

  struct Monomial {
    double coeff = 1.0;
    std::vector<std::pair<std::size_t, unsigned>> factors;
  };

  std::vector<Monomial> parse() {
    std::vector<Monomial> out;
    skip_ws();
    if (pos_ == s_.size()) fail("empty polynomial");
    double sign = 1.0;
    if (peek() == '-' || peek() == '+') {
      sign = get() == '-' ? -1.0 : 1.0;
    }
    while (true) {
      Monomial m = parse_monomial();
      m.coeff *= sign;
      out.push_back(std::move(m));
      skip_ws();
      if (pos_ == s_.size()) break;
      const char op = get();
      if (op != '+' && op != '-') fail("expected '+' or '-'");
      sign = op == '-' ? -1.0 : 1.0;
    }
    return out;
  }

 private:
  Monomial parse_monomial() {
    Monomial m;
    bool expect_factor = true;
    while (expect_factor) {
      skip_ws();
      if (peek() == 'x') {
        ++pos_;
        const std::size_t var = parse_uint("variable index");
        unsigned e = 1;
        skip_ws();
        if (peek() == '^') {
          ++pos_;
          skip_ws();
          e = static_cast<unsigned>(parse_uint("exponent"));
        }
        m.factors.emplace_back(var, e);
      } else if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
        m.coeff *= parse_number();
      } else {
        fail("expected a number or a variable");
      }
      skip_ws();
      expect_factor = peek() == '*';
      if (expect_factor) ++pos_;
    }
    return m;
  }

  double parse_number() {
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    const std::string tmp(begin, s_.size() - pos_);
    const double v = std::strtod(tmp.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tmp.c_str());
    if (used == 0) fail("bad number");
    pos_ += used;
    return v;
  }

  std::size_t parse_uint(const char* what) {
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
      ++pos_;
    }
    if (pos_ == start) fail(std::string("expected ") + what);
    return v;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return s_[pos_++]; }
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("polynomial parse error at column " + std::to_string(pos_) + ": " + why +
                      " in '" + std::string(s_) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial Polynomial::parse(std::string_view text, std::size_t num_vars) {
  const auto monomials = PolyParser(text).parse();
  std::size_t needed = 1;
  for (const auto& m : monomials) {
    for (const auto& [v, e] : m.factors) needed = std::max(needed, v + 1);
  }
  if (num_vars == 0) num_vars = needed;
  if (needed > num_vars) {
    throw ConfigError("polynomial '" + std::string(text) + "' uses x" + std::to_string(needed - 1) +
                      " but only " + std::to_string(num_vars) + " variables are available");
  }
  Polynomial p(num_vars);
  for (const auto& m : monomials) {
    MultiIndex idx(num_vars, 0);
    for (const auto& [v, e] : m.factors) idx[v] += e;
    p.add_term(idx, m.coeff);
  }
  return p;
}

std::vector<Polynomial> homogeneous_parts(const Polynomial& p) {
  std::vector<Polynomial> parts(p.degree() + 1, Polynomial(p.num_vars()));
  for (const auto& [idx, c] : p.terms()) parts[degree_of(idx)].add_term(idx, c);
  return parts;
}

std::vector<double> evaluate(const PolynomialMap& p, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(p.size());
  for (const auto& component : p) out.push_back(component.evaluate(x));
  return out;
}

Polynomial reference_target(std::size_t input_dim) {
  switch (input_dim) {
    case 1:
      return Polynomial::parse("x0^10 - 2*x0^8 + 2*x0^5 + 3*x0^3 - 2*x0^2 + 5", 1);
    case 2:
      return Polynomial::parse("x1^5 - x0^3*x1^2 - 4*x0^2*x1 + 3*x0^3 - x1^2 + x0 + 2", 2);
    case 4:
      return Polynomial::parse(
          "x0^6*x3^5 + x1^6 - x0^3*x1^2*x2 + x3^2 - 4*x2^4*x1^4 + 3*x3^3*x1^3 - x2^2*x0 + x2 + 3",
          4);
    default:
      throw ConfigError("no reference polynomial target for input dimension " +
                        std::to_string(input_dim));
  }
}

}  // namespace gfl
