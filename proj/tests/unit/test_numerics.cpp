#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ratelab/errors.hpp"
#include "ratelab/interpolation.hpp"
#include "ratelab/quadrature.hpp"

using namespace ratelab;

TEST(Quadrature, PolynomialIsExact) {
  const auto res = integrate([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
  EXPECT_NEAR(res.value, 8.0, 1e-14);
}

TEST(Quadrature, OscillatoryAndPeaked) {
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value, 2.0, 1e-12);
  // Lorentzian with width 1e-3.
  const double eps = 1e-3;
  const auto res = integrate([&](double x) { return eps / (x * x + eps * eps); }, -1.0, 1.0);
  EXPECT_NEAR(res.value, 2.0 * std::atan(1.0 / eps), 1e-9);
  EXPECT_GT(res.subdivisions, 1u);
}

TEST(Quadrature, EndpointSingularity) {
  const auto res = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(res.value, 2.0, 1e-8);
}

TEST(Quadrature, EmptyIntervalIsZero) { EXPECT_EQ(integrate([](double) { return 1.0; }, 3.0, 3.0).value, 0.0); }

TEST(Quadrature, BudgetExhaustionThrows) {
  QuadratureOptions opts;
  opts.max_subdivisions = 3;
  opts.rel_tol = 1e-15;
  EXPECT_THROW(integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, opts), QuadratureError);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  EXPECT_THROW(integrate([](double) { return std::nan(""); }, 0.0, 1.0), QuadratureError);
}

TEST(MonotoneCubic, InterpolatesKnots) {
  const MonotoneCubic c({0.0, 1.0, 2.0, 4.0}, {0.0, 1.0, 1.5, 4.0});
  EXPECT_DOUBLE_EQ(c(0.0), 0.0);
  EXPECT_DOUBLE_EQ(c(1.0), 1.0);
  EXPECT_DOUBLE_EQ(c(4.0), 4.0);
  EXPECT_EQ(c.segment(1.5), 1u);
}

TEST(MonotoneCubic, ReproducesLines) {
  const MonotoneCubic c({0.0, 1.0, 3.0, 7.0}, {1.0, 3.0, 7.0, 15.0});
  for (double x = 0.0; x <= 7.0; x += 0.25) {
    EXPECT_NEAR(c(x), 2.0 * x + 1.0, 1e-12);
    EXPECT_NEAR(c.derivative(x), 2.0, 1e-12);
  }
}

TEST(MonotoneCubic, RejectsBadKnots) {
  EXPECT_THROW(MonotoneCubic({0.0}, {1.0}), Error);
  EXPECT_THROW(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), Error);
  EXPECT_THROW(MonotoneCubic({0.0, 1.0}, {1.0}), Error);
}

// Property: nondecreasing data give a nondecreasing interpolant with no
// overshoot, on random step-like data.
TEST(MonotoneCubic, PreservesMonotonicityOnRandomData) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> gap(0.01, 2.0);
  std::bernoulli_distribution flat(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x{0.0}, y{0.0};
    for (int i = 0; i < 12; ++i) {
      x.push_back(x.back() + gap(rng));
      y.push_back(y.back() + (flat(rng) ? 0.0 : gap(rng) * gap(rng)));
    }
    const MonotoneCubic c(x, y);
    double prev = c(x.front());
    for (int k = 1; k <= 2000; ++k) {
      const double xv = x.front() + (x.back() - x.front()) * k / 2000.0;
      const double v = c(xv);
      ASSERT_GE(v, prev - 1e-12) << "trial " << trial << " x " << xv;
      const auto seg = c.segment(xv);
      ASSERT_GE(v, y[seg] - 1e-12);
      ASSERT_LE(v, y[std::min(seg + 1, y.size() - 1)] + 1e-12);
      prev = v;
    }
  }
}
