#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace ltei;

namespace {

constexpr double pi = std::numbers::pi;

// Closed form for four unnormalized s primitives with the erf(w r)/r kernel.
double boys0(double t) { return t < 1e-12 ? 1.0 - t / 3.0 : 0.5 * std::sqrt(pi / t) * std::erf(std::sqrt(t)); }

double ssss_erf(double a, const Vec3& A, double b, const Vec3& B, double c, const Vec3& C, double d, const Vec3& D,
                double omega) {
  auto d2 = [](const Vec3& x, const Vec3& y) {
    return (x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) + (x[2] - y[2]) * (x[2] - y[2]);
  };
  const double p = a + b, q = c + d;
  Vec3 P, Q;
  for (int l = 0; l < 3; ++l) P[l] = (a * A[l] + b * B[l]) / p, Q[l] = (c * C[l] + d * D[l]) / q;
  const double rho = p * q / (p + q);
  const double kab = std::exp(-a * b / p * d2(A, B)), kcd = std::exp(-c * d / q * d2(C, D));
  const double att = omega / std::sqrt(omega * omega + rho);
  return 2.0 * std::pow(pi, 2.5) / (p * q * std::sqrt(p + q)) * kab * kcd * att *
         boys0(rho * omega * omega / (omega * omega + rho) * d2(P, Q));
}

Basis two_center_s() {
  Basis basis(2);
  basis[0].center = {0, 0, -0.6};
  basis[0].primitives = {{1.0, 1.0}};
  basis[1].center = {0.2, 0.1, 0.7};
  basis[1].primitives = {{1.0, 1.0}};
  return basis;
}

PrimitivePair centered_unit_gaussian() {
  PrimitivePair p;
  p.a1 = p.a2 = 0.5;
  p.coefficient = 1.0;
  p.exponent = 1.0;
  p.prefactor = 1.0;
  return p;
}

TAFactorization plan_for(double omega, double box, double tol) {
  TAOptions o;
  o.omega = omega;
  o.box = box;
  o.target_tol = tol;
  return build_ta_plan(o);
}

}  // namespace

TEST(TAPlan, OmegaZeroIsZero) {
  const auto plan = plan_for(0.0, 3.0, 1e-6);
  EXPECT_EQ(kernel_approx_eval(plan, {0.1, 0.2, 0.3}, {-1.0, 0.5, 2.0}), 0.0);
}

TEST(TAPlan, KernelApproximationAccuracy) {
  const double b = 3.0;
  const auto plan = plan_for(0.5, b, 1e-7);
  std::mt19937 rng(40);
  std::uniform_real_distribution<double> u(-b, b);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
    const double r = std::sqrt((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) + (x[2] - y[2]) * (x[2] - y[2]));
    const double ref = kernel_eval_reference(0.5, r);
    worst = std::max(worst, std::abs(kernel_approx_eval(plan, x, y) - ref) / ref);
    EXPECT_NEAR(kernel_approx_eval(plan, x, y), kernel_approx_eval(plan, y, x), 1e-12 * ref);
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(kernel_approx_eval(plan, {1, 1, 1}, {1, 1, 1}), 2 * 0.5 / std::sqrt(pi), 1e-7);
}

TEST(TAPlan, OrdersGrowWithNode) {
  const auto plan = plan_for(1.0, 4.0, 1e-8);
  for (int i = 1; i < plan.n_nodes(); ++i) {
    EXPECT_GT(plan.rule.s[i], plan.rule.s[i - 1]);
    EXPECT_GE(plan.orders[i], plan.orders[i - 1]);
  }
  for (const auto& a : plan.coeffs) EXPECT_EQ((a - a.transpose()).norm(), 0.0);
}

TEST(TAPlan, Errors) {
  EXPECT_THROW(plan_for(0.5, 0.0, 1e-6), DomainError);
  EXPECT_THROW(plan_for(-0.5, 1.0, 1e-6), DomainError);
  TAOptions o;
  o.omega = 5.0;
  o.box = 10.0;
  o.target_tol = 1e-10;
  o.max_order = 8;
  EXPECT_THROW(build_ta_plan(o), ToleranceError);
}

TEST(Moments, ClosedFormAndParity) {
  const PrimitivePair g = centered_unit_gaussian();
  const double b = 2.0;
  const auto w = chebyshev_moments(g, 0, b, 6, 64);
  EXPECT_NEAR(w[0], std::sqrt(pi) * std::erf(b), 1e-13);
  EXPECT_NEAR(w[1], 0.0, 1e-14);
  EXPECT_NEAR(w[3], 0.0, 1e-14);
  EXPECT_NEAR(w[5], 0.0, 1e-14);
}

TEST(Moments, SelfConvergenceInNq2) {
  PrimitivePair p = centered_unit_gaussian();
  p.a1 = 2.0;
  p.a2 = 0.3;
  p.ca = {0.4, 0, 0};
  p.cb = {-0.8, 0, 0};
  p.pa = {1, 0, 0};
  p.pb = {2, 0, 0};
  p.exponent = 2.3;
  p.center = {(2.0 * 0.4 - 0.3 * 0.8) / 2.3, 0, 0};
  const auto w1 = chebyshev_moments(p, 0, 4.0, 40, 32);
  const auto w2 = chebyshev_moments(p, 0, 4.0, 40, 64);
  for (int k = 0; k < 40; ++k) EXPECT_NEAR(w1[k], w2[k], 1e-12);
}

TEST(ElementIntegral, ClosedFormTwoCenters) {
  const Basis basis = two_center_s();
  const PairTable t(2);
  const auto pairs = all_pair_products(basis, t, 0.0);
  const double b = box_for_pairs(pairs, 1e-10);
  const TAElementEvaluator ev(basis, plan_for(0.5, b, 1e-8));
  const Matrix ref = reference_dense_tei(pairs, 0.5, b);
  for (int p = 0; p < t.size(); ++p)
    for (int q = 0; q < t.size(); ++q) {
      const auto [i, j] = t[p];
      const auto [k, l] = t[q];
      const double exact = ssss_erf(1.0, basis[i].center, 1.0, basis[j].center, 1.0, basis[k].center, 1.0,
                                    basis[l].center, 0.5);
      EXPECT_NEAR(ev(i, j, k, l), exact, 1e-6 * exact);
      EXPECT_NEAR(ref(p, q), exact, 1e-9 * exact);
    }
}

TEST(ElementIntegral, OmegaZeroAndSymmetry) {
  const Molecule mol = ltei::test::load_toy("triangle.json");
  const Basis basis = build_basis(mol);
  const TAElementEvaluator zero(basis, plan_for(0.0, 6.0, 1e-6));
  EXPECT_EQ(zero(0, 1, 2, 3), 0.0);

  const TAElementEvaluator ev(basis, plan_for(0.5, 6.0, 1e-5));
  const int n = static_cast<int>(basis.size());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double v = ev(a, b, c, d);
          EXPECT_EQ(v, ev(b, a, c, d));
          EXPECT_EQ(v, ev(a, b, d, c));
          EXPECT_EQ(v, ev(c, d, a, b));
        }
}

TEST(MTA, SeparableSinglePrimitive) {
  PairProduct pp;
  PrimitivePair g = centered_unit_gaussian();
  g.coefficient = 0.7;
  pp.primitives = {g};
  const int n = 4;
  const PairMoments m = pair_moments(pp, 2.0, n);
  const Matrix mta = build_m_ta({m}, n);
  const auto w = chebyshev_moments(g, 0, 2.0, n, 64);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) EXPECT_NEAR(mta(0, a + n * b + n * n * c), 0.7 * w[a] * w[b] * w[c], 1e-15);
}

TEST(MTA, PrefixBlocksAndZeroRows) {
  const Molecule mol = ltei::test::load_toy("heh.json");
  const Basis basis = build_basis(mol);
  const PairTable t(static_cast<int>(basis.size()));
  auto pairs = all_pair_products(basis, t, 0.0);
  for (auto& pr : pairs[3].primitives) pr.coefficient = 0.0;
  const double b = box_for_pairs(pairs, 1e-10);
  const int n_max = 12, n = 7;
  std::vector<PairMoments> big, small;
  for (const auto& pp : pairs) {
    big.push_back(pair_moments(pp, b, n_max));
    small.push_back(pair_moments(pp, b, n));
  }
  const Matrix m_max = build_m_ta(big, n_max);
  EXPECT_EQ(m_max.row(3).norm(), 0.0);
  const Matrix direct = build_m_ta(small, n);
  EXPECT_LT(ltei::test::rel_diff(extract_block(m_max, n_max, n), direct), 1e-12);
  EXPECT_THROW(build_m_ta(big, n_max, 1024), MemoryBudgetError);
}

TEST(ApplyFactorized, MatchesDenseB) {
  const Molecule mol = ltei::test::load_toy("triangle.json");
  const Basis basis = build_basis(mol);
  const PairTable t(static_cast<int>(basis.size()));
  TAOptions o;
  o.omega = 0.5;
  o.box = 6.0;
  o.fixed_order = 5;
  o.n_q1 = 6;
  const TAElementEvaluator ev(basis, build_ta_plan(o));
  const Matrix b_full = full_from_reduced(t, ev.dense_reduced());
  const Matrix m = build_m_ta(ev.moments(), ev.plan().n_cheb());
  std::mt19937 rng(41);
  const Matrix rhs = ltei::test::random_matrix(rng, b_full.cols(), 3);
  EXPECT_LT(ltei::test::rel_diff(apply_factorized_ta(ev.plan(), t, m, rhs), b_full * rhs), 1e-10);
  EXPECT_EQ(apply_factorized_ta(ev.plan(), t, m, Matrix::Zero(b_full.cols(), 2)).norm(), 0.0);
  const Matrix bi = apply_factorized_ta(ev.plan(), t, m, Matrix::Identity(b_full.rows(), b_full.cols()));
  EXPECT_LT((bi - bi.transpose()).norm(), 1e-12 * bi.norm());
}

TEST(ApplyFactorized, FoldUnfold) {
  const PairTable t(3);
  std::mt19937 rng(42);
  const Matrix r = ltei::test::random_matrix(rng, t.size(), 2);
  const Matrix f = unfold_pairs(t, r);
  for (int nu = 0; nu < 3; ++nu)
    for (int mu = 0; mu < 3; ++mu) EXPECT_EQ((f.row(mu + 3 * nu) - f.row(nu + 3 * mu)).norm(), 0.0);
  const Matrix back = fold_pairs(t, f);
  for (int p = 0; p < t.size(); ++p) EXPECT_NEAR((back.row(p) - (t[p][0] == t[p][1] ? 1.0 : 2.0) * r.row(p)).norm(), 0.0, 1e-15);
  EXPECT_THROW(fold_pairs(t, Matrix::Zero(8, 1)), DimensionError);
}
