#pragma once

// Coulomb and exchange matrices from the element matrix B, from the TA
// factorization and from the FMM factorization.  Orbital coefficients q are
// N_orb x N_b; B in the full pair space has rows mu + N_b nu.

#include <vector>

#include "ltei/basis.hpp"
#include "ltei/errors.hpp"
#include "ltei/fmm.hpp"
#include "ltei/ta.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

// Q(i, mu + N_b nu) = q(i, mu) q(i, nu)
inline Matrix orbital_pair_matrix(const Matrix& q) {
  const Index nb = q.cols();
  Matrix out(q.rows(), nb * nb);
  for (Index nu = 0; nu < nb; ++nu)
    for (Index mu = 0; mu < nb; ++mu) out.col(mu + nb * nu) = q.col(mu).cwiseProduct(q.col(nu));
  return out;
}

// Q folded onto unique pairs, so that Q_red M_red = Q M_full.
inline Matrix reduced_orbital_pair_matrix(const Matrix& q, const PairTable& t) {
  if (q.cols() != t.n_basis()) throw DimensionError("orbital coefficients must have N_b columns");
  Matrix out(q.rows(), t.size());
  for (int p = 0; p < t.size(); ++p) {
    const auto [mu, nu] = t[p];
    out.col(p) = (mu == nu ? 1.0 : 2.0) * q.col(mu).cwiseProduct(q.col(nu));
  }
  return out;
}

inline Matrix full_from_reduced(const PairTable& t, const Matrix& b_red) {
  const int nb = t.n_basis();
  const Index n2 = static_cast<Index>(nb) * nb;
  Matrix b(n2, n2);
  for (int la = 0; la < nb; ++la)
    for (int ka = 0; ka < nb; ++ka) {
      const int q = t.index(ka, la);
      for (int nu = 0; nu < nb; ++nu)
        for (int mu = 0; mu < nb; ++mu) b(mu + nb * nu, ka + nb * la) = b_red(t.index(mu, nu), q);
    }
  return b;
}

// J = Q B Q^T
inline Matrix coulomb_direct(const Matrix& b_full, const Matrix& q) {
  const Matrix qq = orbital_pair_matrix(q);
  if (b_full.rows() != qq.cols() || b_full.cols() != qq.cols()) throw DimensionError("coulomb_direct: B must be N_b^2 square");
  return qq * b_full * qq.transpose();
}

// K(mu, nu) = 2 sum_j sum_{lambda, kappa} q(j, lambda) q(j, kappa) B(mu lambda, kappa nu)
inline Matrix exchange_direct(const Matrix& b_full, const Matrix& q) {
  const Index nb = q.cols();
  if (b_full.rows() != nb * nb || b_full.cols() != nb * nb) throw DimensionError("exchange_direct: B must be N_b^2 square");
  Matrix k = Matrix::Zero(nb, nb);
  for (Index j = 0; j < q.rows(); ++j) {
    // row (mu lambda) contracted with q_j over lambda, column (kappa nu) over kappa
    Matrix left(nb, nb * nb);  // left(mu, kappa + nb nu) = sum_lambda q_j(lambda) B(mu + nb lambda, .)
    left.setZero();
    for (Index la = 0; la < nb; ++la) left += q(j, la) * b_full.middleRows(nb * la, nb);
    for (Index nu = 0; nu < nb; ++nu) k.col(nu) += 2.0 * left.middleCols(nb * nu, nb) * q.row(j).transpose();
  }
  return k;
}

// J = sum_i w_i (Q M_i) (x)A_i (Q M_i)^T with the i-sum folded into one
// padded middle factor.
inline Matrix coulomb_ta(const TAFactorization& plan, const PairTable& t, const Matrix& m_max, const Matrix& q) {
  if (m_max.rows() != t.size()) throw DimensionError("coulomb_ta: M_TA rows != unique pairs");
  const Matrix qm = reduced_orbital_pair_matrix(q, t) * m_max;
  return apply_middle_factor(plan, qm) * qm.transpose();
}

// K = 2 sum_j P_j mid P_j^T with P_j(mu, :) = sum_lambda q(j, lambda) M(mu lambda, :).
inline Matrix exchange_ta(const TAFactorization& plan, const PairTable& t, const Matrix& m_max, const Matrix& q) {
  if (m_max.rows() != t.size()) throw DimensionError("exchange_ta: M_TA rows != unique pairs");
  const int nb = t.n_basis();
  if (q.cols() != nb) throw DimensionError("exchange_ta: orbital coefficients must have N_b columns");
  Matrix k = Matrix::Zero(nb, nb);
  for (Index j = 0; j < q.rows(); ++j) {
    Matrix pj = Matrix::Zero(nb, m_max.cols());
    for (int mu = 0; mu < nb; ++mu)
      for (int la = 0; la < nb; ++la) pj.row(mu) += q(j, la) * m_max.row(t.index(mu, la));
    k += 2.0 * apply_middle_factor(plan, pj) * pj.transpose();
  }
  return k;
}

// J = (Q Z) K (Q Z)^T, one FMM pass per orbital.
inline Matrix coulomb_fmm(const Matrix& z, const FMMPlan& plan, const PairTable& t, const Matrix& q) {
  if (z.rows() != t.size()) throw DimensionError("coulomb_fmm: Z rows != unique pairs");
  const Matrix qz = reduced_orbital_pair_matrix(q, t) * z;
  Matrix kq(qz.cols(), qz.rows());
  for (Index i = 0; i < qz.rows(); ++i) kq.col(i) = plan.apply(qz.row(i).transpose());
  return qz * kq;
}

// Same contraction with an explicit kernel matrix, for small grids.
inline Matrix coulomb_dense_kernel(const Matrix& z, const Matrix& kernel, const PairTable& t, const Matrix& q) {
  const Matrix qz = reduced_orbital_pair_matrix(q, t) * z;
  return qz * kernel * qz.transpose();
}

}  // namespace ltei
