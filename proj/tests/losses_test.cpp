#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gfl/errors.hpp"
#include "gfl/losses.hpp"
#include "oracles.hpp"

using namespace gfl;

namespace {

double eval1(const LossKind& k, double yhat, double y) {
  return loss_eval(k, std::span<const double>(&yhat, 1), std::span<const double>(&y, 1));
}
double grad1(const LossKind& k, double yhat, double y) {
  return loss_grad(k, std::span<const double>(&yhat, 1), std::span<const double>(&y, 1))[0];
}

WeightedDataset point_set(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                          const std::vector<double>& w) {
  WeightedDataset d(xs.front().size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) d.add(xs[i], std::span<const double>(&ys[i], 1), w[i]);
  return d;
}

}  // namespace

TEST(LossEval, SquaredErrorExamples) {
  const LossKind k = LossTag::SquaredError;
  EXPECT_EQ(eval1(k, 3.0, 1.0), 4.0);
  EXPECT_EQ(grad1(k, 3.0, 1.0), 4.0);
  EXPECT_EQ(eval1(k, 1.0, 1.0), 0.0);
  const std::vector<double> a = {1, 2}, b = {0, 0};
  EXPECT_EQ(loss_eval(k, a, b), 5.0);
}

TEST(LossEval, HuberExamples) {
  const LossKind k(LossTag::Huber, 1.0);
  EXPECT_EQ(eval1(k, 2.0, 0.0), 1.5);
  EXPECT_EQ(grad1(k, 2.0, 0.0), 1.0);
  EXPECT_NEAR(grad1(k, 0.3, 0.0), 0.3, 1e-15);
  EXPECT_EQ(eval1(k, -3.0, 0.0), 2.5);
  // gradient is continuous across |r| = delta
  EXPECT_NEAR(grad1(k, 1.0 - 1e-12, 0.0), grad1(k, 1.0 + 1e-12, 0.0), 1e-11);
}

TEST(LossEval, BinaryCrossEntropyExamples) {
  const LossKind k = LossTag::BinaryCrossEntropy;
  EXPECT_NEAR(eval1(k, 0.5, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(grad1(k, 0.5, 1.0), -2.0, 1e-15);
  EXPECT_THROW(eval1(k, 0.0, 1.0), DomainError);
  EXPECT_THROW(eval1(k, 1.0, 0.0), DomainError);
  EXPECT_THROW(eval1(k, 1.2, 0.0), DomainError);
}

TEST(LossEval, CrossEntropyOfUniformLogits) {
  const LossKind k = LossTag::CrossEntropySoftmax;
  const std::vector<double> logits = {0, 0, 0, 0}, onehot = {0, 1, 0, 0};
  EXPECT_NEAR(loss_eval(k, logits, onehot), std::log(4.0), 1e-15);
  const auto g = loss_grad(k, logits, onehot);
  EXPECT_NEAR(g[1], -0.75, 1e-15);
  EXPECT_NEAR(g[0], 0.25, 1e-15);
  const std::vector<double> huge = {1000, 0, -1000, 0};
  EXPECT_TRUE(std::isfinite(loss_eval(k, huge, onehot)));
}

TEST(LossEval, DimensionMismatch) {
  const std::vector<double> a = {1, 2}, b = {1};
  EXPECT_THROW(loss_eval(LossTag::SquaredError, a, b), DimensionMismatch);
}

TEST(LossEval, ZeroExactlyOnTheDiagonal) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 3);
  for (const LossKind k : {LossKind(LossTag::SquaredError), LossKind(LossTag::Huber, 0.7)}) {
    for (int i = 0; i < 1000; ++i) {
      const double y = n(rng), yhat = (i % 4 == 0) ? y : n(rng);
      const double l = eval1(k, yhat, y);
      EXPECT_GE(l, 0.0);
      EXPECT_EQ(l == 0.0, yhat == y);
    }
  }
}

TEST(LossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::normal_distribution<double> n(0, 1.5);
  const std::vector<LossKind> kinds = {LossTag::SquaredError, LossTag::BinaryCrossEntropy, LossKind(LossTag::Huber, 1.0),
                                       LossTag::CrossEntropySoftmax};
  for (const auto& k : kinds) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> yhat(3), y(3);
      for (std::size_t j = 0; j < 3; ++j) {
        yhat[j] = k.tag == LossTag::BinaryCrossEntropy ? u(rng) : n(rng);
        y[j] = k.tag == LossTag::BinaryCrossEntropy ? u(rng) : n(rng);
      }
      if (k.tag == LossTag::CrossEntropySoftmax) y = {0.2, 0.5, 0.3};
      if (k.tag == LossTag::Huber) {
        bool kink = false;
        for (std::size_t j = 0; j < 3; ++j) kink |= std::abs(std::abs(yhat[j] - y[j]) - 1.0) < 0.05;
        if (kink) continue;
      }
      const auto g = loss_grad(k, yhat, y);
      const auto fd = oracle::gradient([&](std::span<const double> v) { return oracle::loss(k, v, y); }, yhat, 1e-4);
      std::vector<double> g2(3);
      EXPECT_DOUBLE_EQ(loss_eval_grad(k, yhat, y, g2), loss_eval(k, yhat, y));
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_TRUE(oracle::close(g[j], fd[j], 1e-6, 1e-9)) << k.name() << " " << g[j] << " vs " << fd[j];
        EXPECT_EQ(g2[j], g[j]);
      }
    }
  }
}

TEST(LossKind, ParsesNames) {
  EXPECT_EQ(LossKind::parse("squared_error").tag, LossTag::SquaredError);
  EXPECT_EQ(LossKind::parse("bce").tag, LossTag::BinaryCrossEntropy);
  EXPECT_EQ(LossKind::parse("huber:0.5").delta, 0.5);
  EXPECT_EQ(LossKind::parse("cross_entropy").tag, LossTag::CrossEntropySoftmax);
  EXPECT_THROW(LossKind::parse("hinge"), Error);
}

TEST(ExpectedLoss, ConstantNetworkOnTwoPoints) {
  const Architecture a({1, 1}, ActivationKind::Tanh);
  const ParameterVector theta(a, {0.0, 1.0});
  const auto d = point_set({{0.0}, {1.0}}, {0.0, 2.0}, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(expected_loss(a, theta, d, FixedLabels{}, LossTag::SquaredError), 1.0);
  EXPECT_EQ(expected_loss(a, ParameterVector(a, {2.0, 0.0}), d, FixedLabels{}, LossTag::SquaredError), 0.0);
}

TEST(ExpectedLoss, PolynomialTargetOverridesLabels) {
  const Architecture a({1, 1}, ActivationKind::Tanh);
  const auto d = point_set({{-1.0}, {1.0}}, {99.0, 99.0}, {0.5, 0.5});
  const PolynomialTarget t{{Polynomial::parse("3*x0 + 1")}};
  EXPECT_EQ(expected_loss(a, ParameterVector(a, {3.0, 1.0}), d, t, LossTag::SquaredError), 0.0);
  const PolynomialTarget wrong{{Polynomial::parse("x0*x1")}};
  EXPECT_THROW(expected_loss(a, ParameterVector(a, {3.0, 1.0}), d, wrong, LossTag::SquaredError), DimensionMismatch);
}

TEST(ExpectedLoss, SinglePointGradientIsChainRule) {
  const Architecture a({2, 3, 1}, ActivationKind::Mish);
  const auto theta = init_params(a, NormalInit{0, 1}, 3);
  const auto d = point_set({{0.3, -0.2}}, {0.7}, {1.0});
  const auto lg = expected_loss_grad(a, theta, d, FixedLabels{}, LossTag::SquaredError);
  const std::vector<double> x = {0.3, -0.2};
  const auto y = forward(a, theta, x);
  const double up = 2 * (y[0] - 0.7);
  const auto fb = forward_backward(a, theta, x, std::span<const double>(&up, 1));
  for (std::size_t i = 0; i < theta.size(); ++i) EXPECT_NEAR(lg.grad[i], fb.grad[i], 1e-15);
}

TEST(ExpectedLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> n(0, 0.7);
  const std::vector<LossKind> kinds = {LossTag::SquaredError, LossTag::BinaryCrossEntropy, LossKind(LossTag::Huber, 1.0)};
  for (const auto& act : all_activations()) {
    for (const auto& k : kinds) {
      for (int inst = 0; inst < 20;) {
        const Architecture a({2, 1 + rng() % 4, 1}, act);
        std::vector<double> t(param_dim(a));
        for (double& v : t) v = n(rng);
        WeightedDataset d(2, 1);
        bool skip = false;
        for (int p = 0; p < 3; ++p) {
          const std::vector<double> x = {u(rng), u(rng)};
          std::vector<double> pre;
          const double out = oracle::forward(a.widths, act, t, x, &pre)[0];
          for (double z : pre) skip |= !act.analytic() && std::abs(z) < 0.05;
          double y = k.tag == LossTag::BinaryCrossEntropy ? 0.5 + 0.4 * u(rng) : n(rng);
          if (k.tag == LossTag::Huber) skip |= std::abs(std::abs(out - y) - 1.0) < 0.05;
          d.add(x, std::span<const double>(&y, 1), 1.0 / 3);
        }
        if (k.tag == LossTag::BinaryCrossEntropy) {
          // move the output into (0, 1) by shifting the output bias
          double lo = 1e9, hi = -1e9;
          for (std::size_t p = 0; p < 3; ++p) {
            const double o = oracle::forward(a.widths, act, t, d.x(p))[0];
            lo = std::min(lo, o);
            hi = std::max(hi, o);
          }
          if (hi - lo > 0.8) continue;
          t.back() += 0.5 - 0.5 * (lo + hi);
        }
        if (skip) continue;
        ++inst;
        const auto lg = expected_loss_grad(a, ParameterVector(a, t), d, FixedLabels{}, k);
        const auto fd = oracle::gradient(
            [&](std::span<const double> th) {
              double s = 0;
              for (std::size_t p = 0; p < d.size(); ++p) {
                s += d.weight(p) * oracle::loss(k, oracle::forward(a.widths, act, th, d.x(p)), d.y(p));
              }
              return s;
            },
            t, 1e-4);
        for (std::size_t i = 0; i < t.size(); ++i) {
          ASSERT_TRUE(oracle::close(lg.grad[i], fd[i], 1e-5, 1e-8)) << act.name() << " " << k.name() << " coord " << i;
        }
      }
    }
  }
}

TEST(ExpectedLoss, LinearInTheMeasure) {
  const Architecture a({1, 4, 1}, ActivationKind::Softplus);
  const auto theta = init_params(a, NormalInit{0, 1}, 11);
  const auto d1 = point_set({{-0.5}, {0.1}}, {1.0, -1.0}, {0.25, 0.75});
  const auto d2 = point_set({{0.9}, {0.4}, {-0.8}}, {0.3, 0.2, 0.0}, {0.2, 0.3, 0.5});
  const double l1 = expected_loss(a, theta, d1, FixedLabels{}, LossTag::SquaredError);
  const double l2 = expected_loss(a, theta, d2, FixedLabels{}, LossTag::SquaredError);
  for (double lambda : {0.0, 0.3, 0.5, 1.0}) {
    const auto m = WeightedDataset::mix(d1, lambda, d2);
    EXPECT_NEAR(expected_loss(a, theta, m, FixedLabels{}, LossTag::SquaredError), lambda * l1 + (1 - lambda) * l2, 1e-12);
  }
}

TEST(ExpectedLoss, BatchAverageMatchesUniformMeasure) {
  const Architecture a({2, 3, 1}, ActivationKind::Gelu);
  const auto theta = init_params(a, NormalInit{0, 1}, 12);
  const auto d = point_set({{0.1, 0.2}, {-0.3, 0.5}, {0.9, -0.9}, {0.0, 0.0}}, {1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25});
  const auto full = expected_loss_grad(a, theta, d, FixedLabels{}, LossTag::SquaredError);
  const std::vector<std::size_t> idx = {0, 1, 2, 3};
  std::vector<double> grad(theta.size());
  Workspace ws(a);
  const double l = batch_loss_grad(a, theta.values(), d, idx, LossTag::SquaredError, grad, ws);
  EXPECT_NEAR(l, full.loss, 1e-14);
  for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_NEAR(grad[i], full.grad[i], 1e-14);
}

TEST(WeightedDataset, ValidationAndNormalization) {
  auto d = point_set({{0.0}, {1.0}}, {0.0, 0.0}, {1.0, 3.0});
  EXPECT_THROW(d.validate(), DomainError);
  d.normalize();
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.weight(1), 0.75);
  auto z = point_set({{0.0}}, {0.0}, {0.0});
  EXPECT_THROW(z.normalize(), ZeroMass);
}

TEST(WeightedDataset, CsvRoundTrip) {
  auto d = point_set({{0.125, -1.0 / 3}, {1e-300, 7.0}}, {0.1, -2.5}, {0.4, 0.6});
  std::stringstream ss;
  d.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "x_0,x_1,y_0,weight");
  const auto back = WeightedDataset::read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.weight(i), d.weight(i));
    EXPECT_EQ(back.y(i)[0], d.y(i)[0]);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(back.x(i)[j], d.x(i)[j]);
  }
}

TEST(Quadrature, UniformUnitInterval) {
  const auto d = quadrature_dataset([](std::span<const double>) { return 1.0; }, Box::cube(1, 0, 1), 3);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_NEAR(d.weight(0), 0.25, 1e-15);
  EXPECT_NEAR(d.weight(1), 0.5, 1e-15);
  EXPECT_NEAR(d.weight(2), 0.25, 1e-15);
  EXPECT_EQ(d.x(1)[0], 0.5);
}

TEST(Quadrature, PointMassDensity) {
  const auto d = quadrature_dataset([](std::span<const double> x) { return std::abs(x[0] - 0.5) < 1e-12 ? 1.0 : 0.0; },
                                    Box::cube(1, 0, 1), 3);
  EXPECT_EQ(d.weight(1), 1.0);
  EXPECT_EQ(d.weight(0), 0.0);
}

TEST(Quadrature, SquareCornersAndZeroMass) {
  const auto d = quadrature_dataset([](std::span<const double>) { return 2.0; }, Box::cube(2, -1, 1), 2);
  ASSERT_EQ(d.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(d.weight(i), 0.25, 1e-15);
  EXPECT_THROW(quadrature_dataset([](std::span<const double>) { return 0.0; }, Box::cube(1, 0, 1), 5), ZeroMass);
}

TEST(Quadrature, IntegratesQuadraticAccurately) {
  const auto d = quadrature_dataset([](std::span<const double>) { return 1.0; }, Box::cube(1, -1, 1), 2001);
  double m2 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) m2 += d.weight(i) * d.x(i)[0] * d.x(i)[0];
  EXPECT_NEAR(m2, 1.0 / 3, 1e-6);
}
