#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace ltei;
using boost::multiprecision::cpp_bin_float_50;

namespace {

double erf_kernel_oracle(double omega, double r) {
  const cpp_bin_float_50 w(omega), x(r);
  return static_cast<double>(boost::math::erf(w * x) / x);
}

}  // namespace

TEST(GaussLegendre, SmallRules) {
  const auto r1 = gauss_legendre(1);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_DOUBLE_EQ(r1.nodes[0], 0.0);
  EXPECT_DOUBLE_EQ(r1.weights[0], 2.0);
  const auto r2 = gauss_legendre(2);
  ASSERT_EQ(r2.size(), 2u);
  EXPECT_NEAR(std::abs(r2.nodes[0]), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r2.nodes[0] + r2.nodes[1], 0.0, 1e-15);
  EXPECT_NEAR(r2.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(r2.weights[1], 1.0, 1e-15);
  EXPECT_THROW(gauss_legendre(0), DomainError);
}

TEST(GaussLegendre, PolynomialExactness) {
  const auto r = gauss_legendre(16);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 10);
  EXPECT_NEAR(s, 2.0 / 11.0, 1e-14);
  for (int n : {3, 7, 20, 64}) {
    const auto q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1 && k <= 30; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) acc += q.weights[i] * std::pow(q.nodes[i], k);
      EXPECT_NEAR(acc, (k % 2) ? 0.0 : 2.0 / (k + 1), 1e-13) << "n=" << n << " k=" << k;
    }
  }
}

TEST(GaussLegendre, ShiftedInterval) {
  const auto r = gauss_legendre(12, 1.0, 4.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_GT(r.nodes[i], 1.0);
    EXPECT_LT(r.nodes[i], 4.0);
    s += r.weights[i] * std::exp(r.nodes[i]);
  }
  EXPECT_NEAR(s, std::exp(4.0) - std::exp(1.0), 1e-12);
}

TEST(KernelReference, LimitsAndOracle) {
  EXPECT_NEAR(kernel_eval_reference(0.7, 0.0), 2 * 0.7 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_EQ(kernel_eval_reference(0.0, 1.3), 0.0);
  EXPECT_NEAR(kernel_eval_reference(0.5, 2.0), erf_kernel_oracle(0.5, 2.0), 1e-16);
  std::mt19937 rng(20);
  std::uniform_real_distribution<double> lr(-9, 2);
  for (int k = 0; k < 200; ++k) {
    const double r = std::pow(10.0, lr(rng));
    for (double w : {0.1, 0.5, 1.0, 5.0}) {
      const double ref = erf_kernel_oracle(w, r);
      EXPECT_NEAR(kernel_eval_reference(w, r), ref, 4e-16 * ref) << "w=" << w << " r=" << r;
    }
  }
  EXPECT_THROW(kernel_eval_reference(-1.0, 1.0), DomainError);
  EXPECT_THROW(kernel_eval_reference(1.0, -1.0), DomainError);
}

TEST(KernelQuadrature, Examples) {
  EXPECT_NEAR(kernel_quadrature(0.8, 10, 0.0), 2 * 0.8 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_EQ(kernel_quadrature(0.0, 10, 1.0), 0.0);
  EXPECT_NEAR(kernel_quadrature(0.5, 20, 2.0), erf_kernel_oracle(0.5, 2.0), 1e-12);
}

TEST(KernelQuadrature, ErrorDecreasesWithOrder) {
  double prev = 1.0;
  for (int n : {2, 4, 8, 16, 32}) {
    const double e = kernel_quadrature_error(kernel_rule(1.0, n), 6.0);
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(KernelQuadrature, CalibrationMeetsTolerance) {
  for (double w : {0.1, 0.5, 1.0, 5.0})
    for (double tol : {1e-4, 1e-8}) {
      const int n = calibrate_n_q1(w, 10.0, tol);
      EXPECT_LE(kernel_quadrature_error(kernel_rule(w, n), 10.0), tol);
      if (n > 2) EXPECT_GT(kernel_quadrature_error(kernel_rule(w, n / 2), 10.0), tol);
    }
  // harder for larger omega at a fixed range
  EXPECT_LE(calibrate_n_q1(0.1, 10.0, 1e-8), calibrate_n_q1(5.0, 10.0, 1e-8));
}
