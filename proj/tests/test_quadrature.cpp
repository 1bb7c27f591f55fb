#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wfgraph/quadrature.hpp"

using namespace wfg;

TEST(Quadrature, Polynomial) {
  auto r = quad::integrate([](double y) { return 3.0 * y * y; }, 0.0, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 8.0, 1e-13);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
  auto r = quad::integrate([](double y) { return std::exp(y); }, 1.0, 0.0);
  EXPECT_NEAR(r.value, -(std::exp(1.0) - 1.0), 1e-13);
}

TEST(Quadrature, LogSingularityAtZero) {
  quad::Options opt;
  opt.singular_left = true;
  auto r = quad::integrate([](double y) { return y <= 0.0 ? 0.0 : -std::log(y); }, 0.0, 1.0, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Quadrature, PowerSingularityAtZero) {
  quad::Options opt;
  opt.singular_left = true;
  opt.rel_tol = 1e-12;
  auto r = quad::integrate([](double y) { return y <= 0.0 ? 0.0 : std::pow(y, -0.85); }, 0.0, 1.0, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0 / 0.15, 1e-9);
}

TEST(Quadrature, SingularRightWithBreakpoint) {
  quad::Options opt;
  opt.singular_right = true;
  opt.breakpoints = {0.5};
  // int_0^1 (1 - y)^{-1/2} dy = 2.
  auto r = quad::integrate([](double y) { return y >= 1.0 ? 0.0 : 1.0 / std::sqrt(1.0 - y); }, 0.0, 1.0, opt);
  EXPECT_NEAR(r.value, 2.0, 1e-6);
}

TEST(Quadrature, KinkAtBreakpoint) {
  quad::Options opt;
  opt.breakpoints = {0.3};
  auto r = quad::integrate([](double y) { return std::abs(y - 0.3); }, 0.0, 1.0, opt);
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-14);
  EXPECT_LE(r.intervals, 4);
}

TEST(Quadrature, CheckedThrowsOnDivergence) {
  quad::Options opt;
  opt.max_intervals = 50;
  auto f = [](double y) { return y <= 0.0 ? 0.0 : 1.0 / y; };
  EXPECT_THROW(quad::integrate_checked(f, 0.0, 1.0, opt), NumericalError);
}

TEST(Quadrature, EmptyInterval) {
  auto r = quad::integrate([](double) { return 1.0; }, 0.25, 0.25);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.value, 0.0);
}
