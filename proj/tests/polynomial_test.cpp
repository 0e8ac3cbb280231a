#include <gtest/gtest.h>

#include <random>

#include "gfl/errors.hpp"
#include "gfl/polynomial.hpp"
#include "oracles.hpp"

using namespace gfl;

namespace {

using TermMap = std::map<MultiIndex, double>;

Polynomial random_poly(std::mt19937_64& rng, std::size_t m, unsigned max_deg) {
  std::uniform_int_distribution<unsigned> e(0, max_deg);
  std::normal_distribution<double> c(0, 1);
  Polynomial p(m);
  for (int t = 0; t < 6; ++t) {
    MultiIndex idx(m);
    for (auto& v : idx) v = e(rng) / static_cast<unsigned>(m);
    p.add_term(idx, c(rng));
  }
  return p;
}

}  // namespace

TEST(Polynomial, EvaluationExamples) {
  const auto p = Polynomial::parse("x0^2 + 1");
  const double two = 2.0;
  EXPECT_EQ(p.evaluate(std::span<const double>(&two, 1)), 5.0);
  const double one = 1.0;
  EXPECT_EQ(reference_target(1).evaluate(std::span<const double>(&one, 1)), 7.0);
  EXPECT_EQ(Polynomial(3).evaluate(std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_THROW(p.evaluate(std::vector<double>{1, 2}), DimensionMismatch);
}

TEST(Polynomial, EvaluationMatchesTermwiseSum) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = 1 + rng() % 4;
    const auto p = random_poly(rng, m, 8);
    std::vector<double> x(m);
    for (double& v : x) v = u(rng);
    EXPECT_NEAR(p.evaluate(x), oracle::poly(p, x), 1e-12);
  }
}

TEST(Polynomial, ParseAndPrintRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_poly(rng, 1 + rng() % 3, 6);
    EXPECT_EQ(Polynomial::parse(p.to_string(), p.num_vars()), p) << p.to_string();
  }
  const auto q = Polynomial::parse("-x1 + 2.5*x0^3*x1 - 4");
  EXPECT_EQ(q.num_vars(), 2u);
  EXPECT_EQ(q.coefficient({3, 1}), 2.5);
  EXPECT_EQ(q.coefficient({0, 0}), -4.0);
  EXPECT_EQ(q.coefficient({0, 1}), -1.0);
  EXPECT_EQ(q.degree(), 4u);
}

TEST(Polynomial, ParseRejectsGarbage) {
  EXPECT_THROW(Polynomial::parse("x0^"), ConfigError);
  EXPECT_THROW(Polynomial::parse("2**x0"), ConfigError);
  EXPECT_THROW(Polynomial::parse("y0 + 1"), ConfigError);
  EXPECT_THROW(Polynomial::parse("x3", 2), Error);
}

TEST(Polynomial, ZeroCoefficientsAreDropped) {
  auto p = Polynomial::parse("x0^2 + x0");
  p.add_term({2}, -1.0);
  EXPECT_EQ(p, Polynomial::parse("x0"));
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ(Polynomial::parse("x0 - x0", 1).terms().size(), 0u);
}

TEST(Polynomial, ProductEvaluatesToProduct) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_poly(rng, 2, 4), b = random_poly(rng, 2, 4);
    const std::vector<double> x = {0.3, -0.8};
    EXPECT_NEAR((a * b).evaluate(x), a.evaluate(x) * b.evaluate(x), 1e-12);
    EXPECT_NEAR(a.pow(3).evaluate(x), std::pow(a.evaluate(x), 3), 1e-11);
  }
}

TEST(HomogeneousParts, SplitByDegreeAndSumBack) {
  const auto p = Polynomial::parse("x0^2*x1 + 3*x1^3 - x0 + 2*x1 + 7");
  const auto parts = homogeneous_parts(p);
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0], Polynomial::constant(2, 7.0));
  EXPECT_EQ(parts[1], Polynomial::parse("-x0 + 2*x1", 2));
  EXPECT_TRUE(parts[2].is_zero());
  EXPECT_EQ(parts[3], Polynomial::parse("x0^2*x1 + 3*x1^3", 2));
  Polynomial sum(2);
  for (const auto& q : parts) {
    EXPECT_TRUE(q.is_zero() || q.is_homogeneous());
    sum += q;
  }
  EXPECT_EQ(sum, p);
}

TEST(ReferenceTarget, OneDimensional) {
  const TermMap expect = {{{10}, 1}, {{8}, -2}, {{5}, 2}, {{3}, 3}, {{2}, -2}, {{0}, 5}};
  EXPECT_EQ(reference_target(1).terms(), expect);
}

TEST(ReferenceTarget, TwoDimensional) {
  const TermMap expect = {{{0, 5}, 1}, {{3, 2}, -1}, {{2, 1}, -4}, {{3, 0}, 3}, {{0, 2}, -1}, {{1, 0}, 1}, {{0, 0}, 2}};
  EXPECT_EQ(reference_target(2).terms(), expect);
}

TEST(ReferenceTarget, FourDimensional) {
  const TermMap expect = {{{6, 0, 0, 5}, 1}, {{0, 6, 0, 0}, 1},  {{3, 2, 1, 0}, -1}, {{0, 0, 0, 2}, 1}, {{0, 4, 4, 0}, -4},
                          {{0, 3, 0, 3}, 3}, {{1, 0, 2, 0}, -1}, {{0, 0, 1, 0}, 1},  {{0, 0, 0, 0}, 3}};
  EXPECT_EQ(reference_target(4).terms(), expect);
  EXPECT_EQ(reference_target(4).degree(), 11u);
  EXPECT_THROW(reference_target(3), ConfigError);
}

TEST(PolynomialMap, EvaluatesEachComponent) {
  const PolynomialMap p = {Polynomial::parse("x0 + x1", 2), Polynomial::parse("x0*x1", 2)};
  EXPECT_EQ(evaluate(p, std::vector<double>{2, 3}), (std::vector<double>{5, 6}));
}
