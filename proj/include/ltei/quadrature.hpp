#pragma once

// Gauss-Legendre rules and the long-range kernel erf(w r)/r.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ltei/errors.hpp"

namespace ltei {

struct QuadratureRule {
  std::vector<double> nodes;    // increasing
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

// n-point Gauss-Legendre rule on [-1, 1]; Newton iteration on P_n from the
// Tricomi initial guess.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1, got " + std::to_string(n));
  QuadratureRule q;
  q.nodes.assign(n, 0.0);
  q.weights.assign(n, 2.0);
  if (n == 1) return q;
  for (int i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    const double dp = detail::legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.weights[n / 2] = 2.0 / (detail::legendre(n, 0.0).second * detail::legendre(n, 0.0).second);
  return q;
}

// Rule mapped affinely onto [a, b].
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule q = gauss_legendre(n);
  const double h = 0.5 * (b - a), c = 0.5 * (b + a);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q.nodes[i] = c + h * q.nodes[i];
    q.weights[i] *= h;
  }
  return q;
}

// erf(w r)/r with the r -> 0 limit 2w/sqrt(pi); a short Taylor series is used
// below r = 1e-6/w where the quotient loses digits.
inline double kernel_eval_reference(double omega, double r) {
  if (omega < 0.0) throw DomainError("kernel: omega must be non-negative");
  if (r < 0.0) throw DomainError("kernel: r must be non-negative");
  if (omega == 0.0) return 0.0;
  const double lim = 2.0 * omega / std::sqrt(std::numbers::pi);
  if (r < 1e-6 / omega) {
    const double t = omega * omega * r * r;
    return lim * (1.0 - t / 3.0 + t * t / 10.0);
  }
  return std::erf(omega * r) / r;
}

// Nodes s_i in (0, w) and weights of the s-integral
// erf(w r)/r = 2/sqrt(pi) int_0^w exp(-s^2 r^2) ds.
// The kernel is (w/sqrt(pi)) sum_i weights[i] exp(-s_i^2 r^2).
struct KernelRule {
  double omega = 0.0;
  std::vector<double> s;
  std::vector<double> weights;   // Gauss-Legendre weights on [-1, 1]
  int size() const { return static_cast<int>(s.size()); }
  double prefactor() const { return omega / std::sqrt(std::numbers::pi); }
};

inline KernelRule kernel_rule(double omega, int n_q1) {
  if (omega < 0.0) throw DomainError("kernel_rule: omega must be non-negative");
  const QuadratureRule gl = gauss_legendre(n_q1);
  KernelRule k;
  k.omega = omega;
  k.s.resize(gl.size());
  k.weights = gl.weights;
  for (std::size_t i = 0; i < gl.size(); ++i) k.s[i] = 0.5 * omega * (1.0 + gl.nodes[i]);
  return k;
}

inline double kernel_quadrature(const KernelRule& k, double r) {
  double sum = 0.0;
  for (int i = 0; i < k.size(); ++i) sum += k.weights[i] * std::exp(-k.s[i] * k.s[i] * r * r);
  return k.prefactor() * sum;
}

inline double kernel_quadrature(double omega, int n_q1, double r) { return kernel_quadrature(kernel_rule(omega, n_q1), r); }

// Largest relative error of the quadrature kernel on [0, r_max].
inline double kernel_quadrature_error(const KernelRule& k, double r_max, int samples = 400) {
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = r_max * i / samples;
    const double ref = kernel_eval_reference(k.omega, r);
    const double err = std::abs(kernel_quadrature(k, r) - ref);
    worst = std::max(worst, ref > 0.0 ? err / ref : err);
  }
  return worst;
}

// Smallest order on the ladder 2, 4, 8, ... whose kernel error over [0, r_max]
// is below tol.
inline int calibrate_n_q1(double omega, double r_max, double tol, int max_order = 512) {
  for (int n = 2; n <= max_order; n *= 2)
    if (kernel_quadrature_error(kernel_rule(omega, n), r_max) < tol) return n;
  throw ToleranceError("calibrate_n_q1: kernel error stays above " + std::to_string(tol) + " up to order " +
                       std::to_string(max_order));
}

}  // namespace ltei
