#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "test_util.hpp"

using namespace ltei;
using ltei::test::rel_diff;

namespace {

// B(mu, nu, kappa, lambda) from the full-pair matrix.
double b_at(const Matrix& b, Index nb, Index mu, Index nu, Index ka, Index la) { return b(mu + nb * nu, ka + nb * la); }

Matrix coulomb_loops(const Matrix& b, const Matrix& q) {
  const Index nb = q.cols();
  Matrix j = Matrix::Zero(q.rows(), q.rows());
  for (Index i = 0; i < q.rows(); ++i)
    for (Index k = 0; k < q.rows(); ++k)
      for (Index mu = 0; mu < nb; ++mu)
        for (Index nu = 0; nu < nb; ++nu)
          for (Index ka = 0; ka < nb; ++ka)
            for (Index la = 0; la < nb; ++la)
              j(i, k) += q(i, mu) * q(i, nu) * b_at(b, nb, mu, nu, ka, la) * q(k, ka) * q(k, la);
  return j;
}

Matrix exchange_loops(const Matrix& b, const Matrix& q) {
  const Index nb = q.cols();
  Matrix k = Matrix::Zero(nb, nb);
  for (Index mu = 0; mu < nb; ++mu)
    for (Index nu = 0; nu < nb; ++nu)
      for (Index j = 0; j < q.rows(); ++j)
        for (Index la = 0; la < nb; ++la)
          for (Index ka = 0; ka < nb; ++ka) k(mu, nu) += 2.0 * q(j, la) * q(j, ka) * b_at(b, nb, mu, la, ka, nu);
  return k;
}

struct Toy {
  Basis basis;
  PairTable table;
  std::vector<PairProduct> pairs;
  double box;
  Matrix q;
};

Toy toy(const std::string& name) {
  const Molecule mol = ltei::test::load_toy(name);
  Toy t;
  t.basis = build_basis(mol);
  t.table = PairTable(static_cast<int>(t.basis.size()));
  t.pairs = all_pair_products(t.basis, t.table, 0.0);
  t.box = box_for_pairs(t.pairs, 1e-10);
  t.q = *mol.orbitals;
  return t;
}

}  // namespace

TEST(CoulombDirect, Trivial) {
  const Matrix b = Matrix::Constant(1, 1, 0.37);
  EXPECT_DOUBLE_EQ(coulomb_direct(b, Matrix::Constant(1, 1, 1.0))(0, 0), 0.37);
  std::mt19937 rng(60);
  const Matrix bb = ltei::test::random_matrix(rng, 9, 9);
  EXPECT_EQ(coulomb_direct(bb, Matrix::Zero(2, 3)).norm(), 0.0);
  EXPECT_THROW(coulomb_direct(bb, Matrix::Zero(2, 2)), DimensionError);
}

TEST(CoulombDirect, MatchesQuadrupleLoops) {
  std::mt19937 rng(61);
  const Matrix b = ltei::test::random_matrix(rng, 9, 9);
  const Matrix q = ltei::test::random_matrix(rng, 2, 3);
  EXPECT_LT(rel_diff(coulomb_direct(b, q), coulomb_loops(b, q)), 1e-14);
  EXPECT_LT(rel_diff(exchange_direct(b, q), exchange_loops(b, q)), 1e-14);
}

TEST(ExchangeDirect, SingleFunction) {
  const Matrix b = Matrix::Constant(1, 1, 0.5);
  EXPECT_DOUBLE_EQ(exchange_direct(b, Matrix::Constant(1, 1, 3.0))(0, 0), 2 * 9 * 0.5);
}

TEST(CoulombTA, MatchesDenseAndIsSymmetric) {
  const Toy t = toy("triangle.json");
  TAOptions o;
  o.omega = 0.5;
  o.box = t.box;
  o.target_tol = 1e-6;
  const TAElementEvaluator ev(t.basis, build_ta_plan(o));
  const Matrix b_full = full_from_reduced(t.table, ev.dense_reduced());
  const Matrix m = build_m_ta(ev.moments(), ev.plan().n_cheb());
  const Matrix j = coulomb_ta(ev.plan(), t.table, m, t.q);
  EXPECT_LT(rel_diff(j, coulomb_direct(b_full, t.q)), 1e-8);
  EXPECT_LT((j - j.transpose()).norm(), 1e-12 * j.norm());
  EXPECT_EQ(coulomb_ta(ev.plan(), t.table, m, Matrix::Zero(2, t.q.cols())).norm(), 0.0);

  const Matrix k = exchange_ta(ev.plan(), t.table, m, t.q);
  EXPECT_LT(rel_diff(k, exchange_loops(b_full, t.q)), 1e-8);
  EXPECT_LT((k - k.transpose()).norm(), 1e-10 * k.norm());

  // J scales as alpha^4 under q -> alpha q
  const double alpha = 1.7;
  EXPECT_LT(rel_diff(coulomb_ta(ev.plan(), t.table, m, alpha * t.q), std::pow(alpha, 4) * j), 1e-14);

  // positive semidefinite for random Q
  std::mt19937 rng(62);
  const Matrix qr = ltei::test::random_matrix(rng, 5, t.q.cols());
  const Matrix jr = coulomb_ta(ev.plan(), t.table, m, qr);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (jr + jr.transpose())).eigenvalues().minCoeff();
  EXPECT_GE(lmin, -1e-8 * jr.norm());
}

TEST(ExchangeTA, SingleFunctionCollapse) {
  Basis basis(1);
  basis[0].primitives = {{1.0, 1.0}};
  const PairTable t(1);
  TAOptions o;
  o.omega = 0.5;
  o.box = 4.0;
  const TAElementEvaluator ev(basis, build_ta_plan(o));
  const Matrix m = build_m_ta(ev.moments(), ev.plan().n_cheb());
  const Matrix q = Matrix::Constant(1, 1, 0.8);
  EXPECT_NEAR(exchange_ta(ev.plan(), t, m, q)(0, 0), 2 * 0.64 * ev(0, 0, 0, 0), 1e-13);
}

TEST(CoulombFMM, AgreesWithTAAndOracle) {
  const Toy t = toy("heh.json");
  TAOptions o;
  o.omega = 0.5;
  o.box = t.box;
  o.target_tol = 1e-6;
  const TAFactorization plan = build_ta_plan(o);
  const Matrix m = build_m_ta(all_pair_moments(t.pairs, plan), plan.n_cheb());
  const Matrix j_ta = coulomb_ta(plan, t.table, m, t.q);

  const int n = 16;
  const Points grid = chebyshev_grid(n, t.box);
  const Matrix z = build_z_matrix(t.pairs, n, t.box);
  const FMMPlan fmm(grid, grid, 0.5);
  const Matrix j_fmm = coulomb_fmm(z, fmm, t.table, t.q);
  const Matrix j_dense = coulomb_dense_kernel(z, kernel_matrix(grid, grid, 0.5), t.table, t.q);
  const Matrix j_ref = coulomb_direct(full_from_reduced(t.table, reference_dense_tei(t.pairs, 0.5, t.box)), t.q);

  EXPECT_LT(rel_diff(j_fmm, j_dense), 1e-6);
  EXPECT_LT(rel_diff(j_fmm, j_ta), 1e-5);
  EXPECT_LT(rel_diff(j_fmm, j_ref), 1e-5);
  EXPECT_LT(rel_diff(j_ta, j_ref), 1e-6);
  EXPECT_EQ(coulomb_fmm(z, fmm, t.table, Matrix::Zero(1, 4)).norm(), 0.0);
}

TEST(Assembly, ReducedPairMatrix) {
  std::mt19937 rng(63);
  const Matrix q = ltei::test::random_matrix(rng, 2, 4);
  const PairTable t(4);
  const Matrix qq = orbital_pair_matrix(q);
  const Matrix qr = reduced_orbital_pair_matrix(q, t);
  // Q_red fold = Q on symmetric pair vectors
  const Matrix v = ltei::test::random_matrix(rng, t.size(), 1);
  EXPECT_LT(rel_diff(qr * v, qq * unfold_pairs(t, v)), 1e-14);
  EXPECT_THROW(reduced_orbital_pair_matrix(q, PairTable(3)), DimensionError);
}
