#pragma once

// Chebyshev grids on [-b, b], polynomial evaluation and 2D coefficient
// transforms.  Coefficients are computed with FFTW's DCT-II (first-kind grid)
// or DCT-I (second-kind grid).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "ltei/errors.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

enum class GridKind {
  Gauss,    // x_k = b cos((2k-1) pi / 2N), roots of T_N
  Lobatto,  // x_k = b cos((k-1) pi / (N-1)), extrema of T_{N-1}
};

// Nodes in decreasing order.  A one-point Lobatto grid is the midpoint.
inline std::vector<double> cheb_nodes(GridKind kind, int n, double b) {
  if (n < 1) throw DomainError("cheb_nodes: n must be >= 1, got " + std::to_string(n));
  if (!(b > 0.0)) throw DomainError("cheb_nodes: half-width must be positive");
  std::vector<double> x(n);
  const double pi = std::numbers::pi;
  for (int k = 0; k < n; ++k) {
    if (kind == GridKind::Gauss)
      x[k] = b * std::cos((2.0 * k + 1.0) * pi / (2.0 * n));
    else
      x[k] = n == 1 ? 0.0 : b * std::cos(k * pi / (n - 1.0));
  }
  return x;
}

namespace detail {

inline double scaled_abscissa(double x, double b) {
  const double t = x / b;
  if (std::abs(t) > 1.0 + 1e-12)
    throw DomainError("Chebyshev evaluation outside [-b, b]: x = " + std::to_string(x) + ", b = " + std::to_string(b));
  return std::clamp(t, -1.0, 1.0);
}

}  // namespace detail

// T_0(x/b), ..., T_{n-1}(x/b) into out[0..n).
inline void cheb_eval(int n, double x, double b, double* out) {
  const double t = detail::scaled_abscissa(x, b);
  if (n > 0) out[0] = 1.0;
  if (n > 1) out[1] = t;
  for (int k = 2; k < n; ++k) out[k] = 2.0 * t * out[k - 1] - out[k - 2];
}

inline std::vector<double> cheb_eval(int n, double x, double b) {
  std::vector<double> v(std::max(n, 0));
  cheb_eval(n, x, b, v.data());
  return v;
}

// Rows are sample points, columns T_0..T_{n-1}.
inline Matrix cheb_vandermonde(int n, const std::vector<double>& xs, double b) {
  Matrix v(static_cast<Index>(xs.size()), n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cheb_eval(n, xs[i], b, row.data());
    for (int k = 0; k < n; ++k) v(static_cast<Index>(i), k) = row[k];
  }
  return v;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2D real-to-real transform of an n x n array.
inline void fftw_r2r_square(std::vector<double>& data, int n, fftw_r2r_kind kind) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_2d(n, n, data.data(), data.data(), kind, kind, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace detail

// Values of f on the tensor grid: F(k, k') = f(x_k, x_k').
inline Matrix sample_on_grid(const std::function<double(double, double)>& f, GridKind kind, int n, double b) {
  const auto x = cheb_nodes(kind, n, b);
  Matrix v(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v(i, j) = f(x[i], x[j]);
  return v;
}

// Coefficients alpha(n, m) of the degree (N-1, N-1) interpolant
// f(x, y) ~ sum alpha(n, m) T_n(x/b) T_m(y/b) from grid samples.
inline Matrix interp2d_coeffs_from_samples(const Matrix& samples, GridKind kind) {
  const int n = static_cast<int>(samples.rows());
  if (samples.cols() != n) throw DimensionError("interp2d_coeffs: sample matrix must be square");
  if (n == 0) return Matrix(0, 0);
  if (n == 1) return samples;
  std::vector<double> buf(samples.data(), samples.data() + static_cast<std::size_t>(n) * n);
  Matrix a(n, n);
  if (kind == GridKind::Gauss) {
    // REDFT10: Y_k = 2 sum_j X_j cos(pi k (j + 1/2) / n)
    detail::fftw_r2r_square(buf, n, FFTW_REDFT10);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        a(i, j) = buf[static_cast<std::size_t>(j) * n + i] * scale * (i == 0 ? 0.5 : 1.0) * (j == 0 ? 0.5 : 1.0);
  } else {
    // REDFT00: Y_k = X_0 + (-1)^k X_{n-1} + 2 sum_{j=1}^{n-2} X_j cos(pi j k / (n-1))
    detail::fftw_r2r_square(buf, n, FFTW_REDFT00);
    const double scale = 1.0 / ((n - 1.0) * (n - 1.0));
    auto edge = [n](int k) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) a(i, j) = buf[static_cast<std::size_t>(j) * n + i] * scale * edge(i) * edge(j);
  }
  return a;
}

inline Matrix interp2d_coeffs(const std::function<double(double, double)>& f, int n, double b,
                              GridKind kind = GridKind::Lobatto) {
  return interp2d_coeffs_from_samples(sample_on_grid(f, kind, n, b), kind);
}

// sum alpha(n, m) T_n(x/b) T_m(y/b)
inline double interp2d_eval(const Matrix& alpha, double x, double y, double b) {
  const auto tx = cheb_eval(static_cast<int>(alpha.rows()), x, b);
  const auto ty = cheb_eval(static_cast<int>(alpha.cols()), y, b);
  const Eigen::Map<const Vector> vx(tx.data(), alpha.rows()), vy(ty.data(), alpha.cols());
  return vx.dot(alpha * vy);
}

struct AdaptiveOrderResult {
  int order = 0;
  Matrix coeffs;
  double tail = 0.0;          // max trailing |alpha| / max |alpha|
  double sampled_error = 0.0;  // max |f - p| / max |f| on the check grid
  bool converged = false;
};

// Orders 4, 8, 16, ... capped at n_max.  An order is accepted when the two
// trailing coefficient rows and columns are below tol * max|alpha| and the
// interpolant error on a 3x finer uniform grid is within 10 tol ||f||.
inline AdaptiveOrderResult adaptive_order(const std::function<double(double, double)>& f, double tol, double b,
                                          int n_max, GridKind kind = GridKind::Lobatto) {
  if (!(tol > 0.0)) throw DomainError("adaptive_order: tolerance must be positive");
  if (n_max < 1) throw DomainError("adaptive_order: n_max must be >= 1");
  std::vector<int> ladder;
  for (int n = 4; n < n_max; n *= 2) ladder.push_back(n);
  ladder.push_back(n_max);

  AdaptiveOrderResult best;
  for (int n : ladder) {
    AdaptiveOrderResult r;
    r.order = n;
    r.coeffs = interp2d_coeffs(f, n, b, kind);
    const double amax = r.coeffs.cwiseAbs().maxCoeff();
    const int t = std::min(2, n);
    const double trailing = std::max(r.coeffs.bottomRows(t).cwiseAbs().maxCoeff(),
                                     r.coeffs.rightCols(t).cwiseAbs().maxCoeff());
    r.tail = amax > 0.0 ? trailing / amax : 0.0;

    const int m = 3 * n;
    std::vector<double> xs(m);
    for (int i = 0; i < m; ++i) xs[i] = -b + 2.0 * b * (i + 0.5) / m;
    const Matrix v = cheb_vandermonde(n, xs, b);
    const Matrix p = v * r.coeffs * v.transpose();
    double fmax = 0.0, emax = 0.0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double fv = f(xs[i], xs[j]);
        fmax = std::max(fmax, std::abs(fv));
        emax = std::max(emax, std::abs(fv - p(i, j)));
      }
    r.sampled_error = fmax > 0.0 ? emax / fmax : emax;
    r.converged = r.tail < tol && r.sampled_error <= 10.0 * tol;
    best = std::move(r);
    if (best.converged) break;
  }
  return best;
}

// Lagrange basis on a first-kind grid of n points:
// L(x_i, x) = 1/n + 2/n sum_{k=1}^{n-1} T_k(x_i) T_k(x).
inline double lagrange_cheb(int i, double x, const std::vector<double>& grid, double b) {
  const int n = static_cast<int>(grid.size());
  if (i < 0 || i >= n) throw DimensionError("lagrange_cheb: node index out of range");
  const auto ti = cheb_eval(n, grid[i], b);
  const auto tx = cheb_eval(n, x, b);
  double s = 0.0;
  for (int k = 1; k < n; ++k) s += ti[k] * tx[k];
  return (1.0 + 2.0 * s) / n;
}

}  // namespace ltei
