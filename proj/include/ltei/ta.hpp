#pragma once

// Tensor-approximation route.  The kernel is written as
//   K(x, y) ~ (w/sqrt(pi)) sum_i w_i prod_l f_i(x_l, y_l),
//   f_i(x, y) = exp(-s_i^2 (x - y)^2) ~ sum A_i(n, m) T_n(x/b) T_m(y/b),
// so a two-electron integral reduces to 1D Chebyshev moments of the pair
// products against the coefficient matrices A_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ltei/basis.hpp"
#include "ltei/chebyshev.hpp"
#include "ltei/errors.hpp"
#include "ltei/quadrature.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

struct TAOptions {
  double omega = 0.5;
  double target_tol = 1e-6;
  double box = 0.0;                 // half-width b of [-b, b]^3
  std::optional<int> n_q1;          // fixed s-quadrature order
  std::optional<int> fixed_order;   // same Chebyshev order N_i for every node
  int max_order = 256;
  int n_q2 = 64;                    // Gauss-Legendre points per moment panel
};

struct TAFactorization {
  double omega = 0.0;
  double box = 0.0;
  KernelRule rule;
  std::vector<int> orders;    // N_i
  std::vector<Matrix> coeffs; // A_i, N_i x N_i, symmetric
  double interp_tol = 0.0;
  int n_q2 = 64;

  int n_nodes() const { return rule.size(); }
  int n_cheb() const { return orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end()); }
  double prefactor() const { return rule.prefactor(); }
};

// Smallest kernel value over the box relative to K(0); the interpolation
// tolerance is scaled by it so that the kernel error is relative everywhere.
inline double kernel_dynamic_range(double omega, double box) {
  if (omega == 0.0) return 1.0;
  const double rmax = 2.0 * std::sqrt(3.0) * box;
  return kernel_eval_reference(omega, rmax) / kernel_eval_reference(omega, 0.0);
}

inline TAFactorization build_ta_plan(const TAOptions& opt) {
  if (opt.omega < 0.0) throw DomainError("build_ta_plan: omega must be >= 0");
  if (!(opt.box > 0.0)) throw DomainError("build_ta_plan: box half-width must be positive");
  if (!(opt.target_tol > 0.0)) throw DomainError("build_ta_plan: target_tol must be positive");
  TAFactorization plan;
  plan.omega = opt.omega;
  plan.box = opt.box;
  plan.n_q2 = opt.n_q2;
  const double rmax = 2.0 * std::sqrt(3.0) * opt.box;
  const int nq1 = opt.n_q1 ? *opt.n_q1 : calibrate_n_q1(opt.omega, rmax, opt.target_tol / 10.0);
  plan.rule = kernel_rule(opt.omega, nq1);
  plan.interp_tol = opt.target_tol * kernel_dynamic_range(opt.omega, opt.box) / 30.0;

  for (int i = 0; i < plan.rule.size(); ++i) {
    const double s2 = plan.rule.s[i] * plan.rule.s[i];
    auto f = [s2](double x, double y) { return std::exp(-s2 * (x - y) * (x - y)); };
    Matrix a;
    int n;
    if (opt.fixed_order) {
      n = *opt.fixed_order;
      a = interp2d_coeffs(f, n, opt.box, GridKind::Lobatto);
    } else {
      auto r = adaptive_order(f, plan.interp_tol, opt.box, opt.max_order, GridKind::Lobatto);
      if (!r.converged)
        throw ToleranceError("build_ta_plan: node " + std::to_string(i) + " (s = " + std::to_string(plan.rule.s[i]) +
                             ") not resolved at order " + std::to_string(r.order) + ", residual " +
                             std::to_string(r.sampled_error));
      n = r.order;
      a = std::move(r.coeffs);
    }
    plan.orders.push_back(n);
    plan.coeffs.push_back(0.5 * (a + a.transpose()));
  }
  return plan;
}

inline double kernel_approx_eval(const TAFactorization& plan, const Vec3& x, const Vec3& y) {
  double sum = 0.0;
  for (int i = 0; i < plan.n_nodes(); ++i) {
    const int n = plan.orders[i];
    double prod = 1.0;
    for (int l = 0; l < 3; ++l) {
      const auto tx = cheb_eval(n, x[l], plan.box);
      const auto ty = cheb_eval(n, y[l], plan.box);
      const Eigen::Map<const Vector> vx(tx.data(), n), vy(ty.data(), n);
      prod *= vx.dot(plan.coeffs[i] * vy);
    }
    sum += plan.rule.weights[i] * prod;
  }
  return plan.prefactor() * sum;
}

// int_{-b}^{b} g(x) T_n(x/b) dx for n < n_max, g the direction-l factor of one
// primitive pair.  Composite Gauss-Legendre: panels uniform in arccos(x/b) so
// each holds a bounded number of T_n oscillations, subdivided again so each
// spans at most a few Gaussian widths.
inline std::vector<double> chebyshev_moments(const PrimitivePair& p, int l, double b, int n_max, int n_q2) {
  std::vector<double> w(std::max(n_max, 0), 0.0);
  if (n_max <= 0) return w;
  const double h = std::sqrt(50.0 / p.exponent);
  const double lo = std::max(-b, p.center[l] - h), hi = std::min(b, p.center[l] + h);
  if (!(lo < hi)) return w;
  const QuadratureRule ref = gauss_legendre(n_q2);
  const double th_lo = std::acos(std::clamp(hi / b, -1.0, 1.0));
  const double th_hi = std::acos(std::clamp(lo / b, -1.0, 1.0));
  const int n_theta = std::max(1, static_cast<int>(std::ceil(4.0 * n_max * (th_hi - th_lo) / (std::numbers::pi * n_q2))));
  std::vector<double> t(n_max);
  for (int a = 0; a < n_theta; ++a) {
    const double x1 = (a == 0) ? hi : b * std::cos(th_lo + (th_hi - th_lo) * a / n_theta);
    const double x0 = (a == n_theta - 1) ? lo : b * std::cos(th_lo + (th_hi - th_lo) * (a + 1) / n_theta);
    const int n_sub = std::max(1, static_cast<int>(std::ceil((x1 - x0) * std::sqrt(p.exponent) / 4.0)));
    for (int s = 0; s < n_sub; ++s) {
      const double u0 = x0 + (x1 - x0) * s / n_sub, u1 = x0 + (x1 - x0) * (s + 1) / n_sub;
      const double c = 0.5 * (u0 + u1), r = 0.5 * (u1 - u0);
      for (std::size_t q = 0; q < ref.size(); ++q) {
        const double x = c + r * ref.nodes[q];
        const double g = r * ref.weights[q] * p.factor(l, x);
        cheb_eval(n_max, x, b, t.data());
        for (int k = 0; k < n_max; ++k) w[k] += g * t[k];
      }
    }
  }
  return w;
}

// Moment matrices of one pair product: w[l](j, n) for primitive pair j.
struct PairMoments {
  std::array<Matrix, 3> w;
  Vector coeff;  // c_j
  int n_max = 0;
  Index size() const { return coeff.size(); }
};

inline PairMoments pair_moments(const PairProduct& pp, double b, int n_max, int n_q2 = 64) {
  PairMoments m;
  m.n_max = n_max;
  const Index np = static_cast<Index>(pp.size());
  m.coeff.resize(np);
  for (int l = 0; l < 3; ++l) m.w[l].resize(np, n_max);
  for (Index j = 0; j < np; ++j) {
    m.coeff(j) = pp.primitives[j].coefficient;
    for (int l = 0; l < 3; ++l) {
      const auto v = chebyshev_moments(pp.primitives[j], l, b, n_max, n_q2);
      for (int n = 0; n < n_max; ++n) m.w[l](j, n) = v[n];
    }
  }
  return m;
}

inline std::vector<PairMoments> all_pair_moments(const std::vector<PairProduct>& pairs, const TAFactorization& plan) {
  std::vector<PairMoments> out(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pairs.size()); ++p)
    out[p] = pair_moments(pairs[p], plan.box, plan.n_cheb(), plan.n_q2);
  return out;
}

// B(mu nu, kappa lambda) one element at a time:
// (w/sqrt(pi)) sum_i w_i c1^T [ hadamard_l W1_l A_i W2_l^T ] c2.
inline double element_integral(const TAFactorization& plan, const PairMoments& m1, const PairMoments& m2) {
  if (m1.n_max < plan.n_cheb() || m2.n_max < plan.n_cheb())
    throw DimensionError("element_integral: moments were built for a smaller Chebyshev order");
  double sum = 0.0;
  for (int i = 0; i < plan.n_nodes(); ++i) {
    const int n = plan.orders[i];
    Matrix f = Matrix::Ones(m1.size(), m2.size());
    for (int l = 0; l < 3; ++l)
      f.array() *= (m1.w[l].leftCols(n) * plan.coeffs[i] * m2.w[l].leftCols(n).transpose()).array();
    sum += plan.rule.weights[i] * m1.coeff.dot(f * m2.coeff);
  }
  return plan.prefactor() * sum;
}

// Element evaluator over a basis; indices are canonicalised so the 8-fold
// permutational symmetry holds bit for bit.
class TAElementEvaluator {
 public:
  TAElementEvaluator(const Basis& basis, TAFactorization plan, double tau_screening = 0.0)
      : plan_(std::move(plan)), table_(static_cast<int>(basis.size())) {
    pairs_ = all_pair_products(basis, table_, tau_screening);
    moments_ = all_pair_moments(pairs_, plan_);
  }

  double operator()(int mu, int nu, int ka, int la) const {
    int p = table_.index(mu, nu), q = table_.index(ka, la);
    if (p > q) std::swap(p, q);
    return element_integral(plan_, moments_[p], moments_[q]);
  }

  // Reduced-pair matrix B(p, q).
  Matrix dense_reduced() const {
    const int np = table_.size();
    Matrix b(np, np);
    for (int q = 0; q < np; ++q)
      for (int p = 0; p <= q; ++p) b(p, q) = b(q, p) = element_integral(plan_, moments_[p], moments_[q]);
    return b;
  }

  const TAFactorization& plan() const { return plan_; }
  const PairTable& table() const { return table_; }
  const std::vector<PairProduct>& pairs() const { return pairs_; }
  const std::vector<PairMoments>& moments() const { return moments_; }

 private:
  TAFactorization plan_;
  PairTable table_;
  std::vector<PairProduct> pairs_;
  std::vector<PairMoments> moments_;
};

// Column of the N_max^3 grid holding (n1, n2, n3) with n_l < n, in the
// n^3 block's own column order.
inline std::vector<Index> prefix_columns(int n, int n_max) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n) * n * n);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) idx.push_back(a + static_cast<Index>(n_max) * (b + static_cast<Index>(n_max) * c));
  return idx;
}

// M_TA(p, n1 + N n2 + N^2 n3) = sum_j c_j prod_l W_l(j, n_l), N = max N_i.
inline Matrix build_m_ta(const std::vector<PairMoments>& moments, int n_max,
                         std::size_t memory_budget = std::size_t(4) << 30) {
  const std::size_t cols = static_cast<std::size_t>(n_max) * n_max * n_max;
  const std::size_t bytes = moments.size() * cols * sizeof(double);
  if (bytes > memory_budget) throw MemoryBudgetError("build_m_ta", bytes, memory_budget);
  for (const auto& pm : moments)
    if (pm.n_max < n_max) throw DimensionError("build_m_ta: moments shorter than n_max");
  Matrix m = Matrix::Zero(static_cast<Index>(moments.size()), static_cast<Index>(cols));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(moments.size()); ++p) {
    const auto& pm = moments[p];
    Vector row = Vector::Zero(static_cast<Index>(cols));
    for (Index j = 0; j < pm.size(); ++j)
      for (int c = 0; c < n_max; ++c) {
        const double wc = pm.coeff(j) * pm.w[2](j, c);
        for (int b = 0; b < n_max; ++b) {
          const double wbc = wc * pm.w[1](j, b);
          double* out = row.data() + static_cast<Index>(n_max) * (b + static_cast<Index>(n_max) * c);
          for (int a = 0; a < n_max; ++a) out[a] += wbc * pm.w[0](j, a);
        }
      }
    m.row(p) = row.transpose();
  }
  return m;
}

// M^{(i)}: the n^3 prefix block of M_TA,max.
inline Matrix extract_block(const Matrix& m_max, int n_max, int n) {
  const auto idx = prefix_columns(n, n_max);
  Matrix out(m_max.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = m_max.col(idx[k]);
  return out;
}

// Full pair space uses row mu + N_b nu; the reduced space the PairTable order.
inline Matrix fold_pairs(const PairTable& t, const Matrix& full) {
  const int nb = t.n_basis();
  if (full.rows() != static_cast<Index>(nb) * nb) throw DimensionError("fold_pairs: expected N_b^2 rows");
  Matrix r = Matrix::Zero(t.size(), full.cols());
  for (int nu = 0; nu < nb; ++nu)
    for (int mu = 0; mu < nb; ++mu) r.row(t.index(mu, nu)) += full.row(mu + nb * nu);
  return r;
}

inline Matrix unfold_pairs(const PairTable& t, const Matrix& reduced) {
  const int nb = t.n_basis();
  if (reduced.rows() != t.size()) throw DimensionError("unfold_pairs: expected one row per unique pair");
  Matrix f(static_cast<Index>(nb) * nb, reduced.cols());
  for (int nu = 0; nu < nb; ++nu)
    for (int mu = 0; mu < nb; ++mu) f.row(mu + nb * nu) = reduced.row(t.index(mu, nu));
  return f;
}

// (w/sqrt(pi)) sum_i w_i x_i (A_i (x) A_i (x) A_i), with x_i the n_i^3 prefix
// columns of x and each term scattered back into the N_max^3 layout.
inline Matrix apply_middle_factor(const TAFactorization& plan, const Matrix& x) {
  const int n_max = plan.n_cheb();
  Matrix t = Matrix::Zero(x.rows(), x.cols());
  for (int i = 0; i < plan.n_nodes(); ++i) {
    const int n = plan.orders[i];
    const auto idx = prefix_columns(n, n_max);
    Matrix xi(x.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) xi.col(static_cast<Index>(k)) = x.col(idx[k]);
    const Matrix yi = kron3_apply(plan.coeffs[i], xi);
    for (std::size_t k = 0; k < idx.size(); ++k) t.col(idx[k]) += plan.rule.weights[i] * yi.col(static_cast<Index>(k));
  }
  return plan.prefactor() * t;
}

// B * rhs without forming B; rhs has N_b^2 rows (full pair space).
inline Matrix apply_factorized_ta(const TAFactorization& plan, const PairTable& table, const Matrix& m_max,
                                  const Matrix& rhs) {
  if (m_max.rows() != table.size()) throw DimensionError("apply_factorized_ta: M_TA rows != unique pairs");
  const Matrix r = fold_pairs(table, rhs);
  const Matrix y = (m_max.transpose() * r).transpose();  // k x N^3
  const Matrix z = apply_middle_factor(plan, y);          // k x N^3
  return unfold_pairs(table, m_max * z.transpose());
}

}  // namespace ltei
