#pragma once

// Truncated SVD of the stacked moment matrices, the compressed operator
// B ~ (w/sqrt(pi)) sum_i w_i U_i ((x)_l V_il^T A_i V_il) U_i^T, and the
// adaptive-box pipeline that gives each support cluster its own plan.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ltei/assembly.hpp"
#include "ltei/basis.hpp"
#include "ltei/errors.hpp"
#include "ltei/ta.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

// a ~ u v^T
struct LowRankFactor {
  Matrix u;
  Matrix v;
  Index rank() const { return u.cols(); }
};

// Smallest rank r with ||a - u v^T||_F <= eps ||a||_F.
inline LowRankFactor truncated_svd(const Matrix& a, double eps) {
  if (eps < 0.0) throw DomainError("truncated_svd: eps must be >= 0");
  LowRankFactor f;
  if (a.size() == 0) {
    f.u.resize(a.rows(), 0);
    f.v.resize(a.cols(), 0);
    return f;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double total = s.squaredNorm();
  Index r = s.size();
  double tail = 0.0;
  while (r > 0 && tail + s(r - 1) * s(r - 1) <= eps * eps * total) {
    tail += s(r - 1) * s(r - 1);
    --r;
  }
  f.u = svd.matrixU().leftCols(r) * s.head(r).asDiagonal();
  f.v = svd.matrixV().leftCols(r);
  return f;
}

struct KRCompressed {
  double prefactor = 0.0;
  std::vector<double> weights;
  std::vector<Matrix> u;                   // per node, pairs x R1 R2 R3
  std::vector<std::array<Matrix, 3>> core; // V^T A V per node and direction
  std::vector<std::array<Index, 3>> ranks;
  std::size_t bytes() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      n += static_cast<std::size_t>(u[i].size());
      for (const auto& c : core[i]) n += static_cast<std::size_t>(c.size());
    }
    return n * sizeof(double);
  }
  Index max_rank() const {
    Index r = 0;
    for (const auto& rk : ranks) r = std::max({r, rk[0], rk[1], rk[2]});
    return r;
  }
};

// Rows of the stacked moment matrix: pair p, primitive j -> p * I_max + j.
inline Matrix stacked_moments(const std::vector<PairMoments>& moments, int l, int n) {
  Index i_max = 0;
  for (const auto& m : moments) i_max = std::max(i_max, m.size());
  Matrix w = Matrix::Zero(static_cast<Index>(moments.size()) * i_max, n);
  for (std::size_t p = 0; p < moments.size(); ++p)
    w.middleRows(static_cast<Index>(p) * i_max, moments[p].size()) = moments[p].w[l].leftCols(n);
  return w;
}

inline KRCompressed compress_kr(const TAFactorization& plan, const std::vector<PairMoments>& moments, double eps) {
  KRCompressed c;
  c.prefactor = plan.prefactor();
  c.weights = plan.rule.weights;
  Index i_max = 0;
  for (const auto& m : moments) i_max = std::max(i_max, m.size());
  const Index np = static_cast<Index>(moments.size());
  for (int i = 0; i < plan.n_nodes(); ++i) {
    const int n = plan.orders[i];
    std::array<LowRankFactor, 3> f;
    std::array<Matrix, 3> core;
    std::array<Index, 3> r{};
    for (int l = 0; l < 3; ++l) {
      f[l] = truncated_svd(stacked_moments(moments, l, n), eps);
      core[l] = f[l].v.transpose() * plan.coeffs[i] * f[l].v;
      r[l] = f[l].rank();
    }
    Matrix u = Matrix::Zero(np, r[0] * r[1] * r[2]);
    for (Index p = 0; p < np; ++p)
      for (Index j = 0; j < moments[p].size(); ++j) {
        const Index row = p * i_max + j;
        const double cj = moments[p].coeff(j);
        for (Index c3 = 0; c3 < r[2]; ++c3)
          for (Index c2 = 0; c2 < r[1]; ++c2) {
            const double w23 = cj * f[2].u(row, c3) * f[1].u(row, c2);
            for (Index c1 = 0; c1 < r[0]; ++c1) u(p, c1 + r[0] * (c2 + r[1] * c3)) += w23 * f[0].u(row, c1);
          }
      }
    c.u.push_back(std::move(u));
    c.core.push_back(std::move(core));
    c.ranks.push_back(r);
  }
  return c;
}

// B * rhs on the full pair space.
inline Matrix apply_compressed(const KRCompressed& c, const PairTable& t, const Matrix& rhs) {
  const Matrix r = fold_pairs(t, rhs);
  Matrix out = Matrix::Zero(r.rows(), r.cols());
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    const Matrix y = (c.u[i].transpose() * r).transpose();
    const Matrix z = kron3_apply(c.core[i][0], c.core[i][1], c.core[i][2], y);
    out += c.weights[i] * c.u[i] * z.transpose();
  }
  return unfold_pairs(t, c.prefactor * out);
}

inline Matrix coulomb_compressed(const KRCompressed& c, const PairTable& t, const Matrix& q) {
  const Matrix qr = reduced_orbital_pair_matrix(q, t);
  Matrix j = Matrix::Zero(q.rows(), q.rows());
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    const Matrix qu = qr * c.u[i];
    j += c.weights[i] * kron3_apply(c.core[i][0], c.core[i][1], c.core[i][2], qu) * qu.transpose();
  }
  return c.prefactor * j;
}

inline double compression_rate(std::size_t compressed_bytes, std::size_t original_bytes) {
  if (original_bytes == 0) throw DomainError("compression_rate: original size is zero");
  return (1.0 - static_cast<double>(compressed_bytes) / static_cast<double>(original_bytes)) * 100.0;
}

struct CompressionRow {
  std::string method;
  double eps = 0.0;
  Index rank = 0;
  std::size_t bytes = 0;
  double rate = 0.0;
  double matvec_error = 0.0;
};

// One row per eps: compressed operator against the uncompressed M_TA
// factorization on a fixed random right-hand side.
inline std::vector<CompressionRow> compression_report(const TAFactorization& plan, const PairTable& t,
                                                      const std::vector<PairMoments>& moments, const Matrix& m_max,
                                                      const std::vector<double>& eps_list, const Matrix& rhs) {
  const Matrix exact = apply_factorized_ta(plan, t, m_max, rhs);
  const std::size_t original = static_cast<std::size_t>(m_max.size()) * sizeof(double);
  std::vector<CompressionRow> rows;
  for (double eps : eps_list) {
    const KRCompressed c = compress_kr(plan, moments, eps);
    const Matrix approx = apply_compressed(c, t, rhs);
    CompressionRow r;
    r.method = "kr-svd";
    r.eps = eps;
    r.rank = c.max_rank();
    r.bytes = c.bytes();
    r.rate = compression_rate(r.bytes, original);
    r.matvec_error = (approx - exact).norm() / exact.norm();
    rows.push_back(r);
  }
  return rows;
}

// Adaptive box: pairs are clustered by support, each cluster u gets a plan
// on its own box b_u, and a block between clusters s, t uses the plan of the
// larger box.  Summing over u the blocks with max(s, t) = u gives
//   J = sum_u [ J_u(clusters <= u) - J_u(clusters < u) ].
struct AdaptiveOptions {
  double omega = 0.5;
  double target_tol = 1e-6;
  double tau = 1e-10;          // support threshold
  double margin = 1.1;         // box inflation over the largest support
  int n_partitions = 2;
  double tau_screening = 0.0;
  std::optional<int> n_q1;
  std::optional<int> fixed_order;
};

struct AdaptiveResult {
  Matrix j;
  std::vector<SupportPartition> partitions;
  std::vector<int> orders;  // max Chebyshev order per partition plan
};

// J over explicit partitions of the reduced pairs, given in any order.  Every
// pair must belong to exactly one partition.
inline AdaptiveResult coulomb_partitioned(const std::vector<PairProduct>& pairs, const PairTable& t, const Matrix& q,
                                          std::vector<SupportPartition> partitions, const AdaptiveOptions& opt) {
  std::vector<int> owner(pairs.size(), 0);
  for (const auto& part : partitions)
    for (int m : part.members) {
      if (m < 0 || m >= static_cast<int>(pairs.size())) throw DimensionError("partition member out of range");
      ++owner[m];
    }
  for (std::size_t p = 0; p < owner.size(); ++p)
    if (owner[p] != 1)
      throw DimensionError("pair " + std::to_string(p) + (owner[p] ? " is in several partitions" : " is not covered"));
  for (auto& part : partitions) std::sort(part.members.begin(), part.members.end());
  std::sort(partitions.begin(), partitions.end(), [](const SupportPartition& a, const SupportPartition& b) {
    if (a.box != b.box) return a.box < b.box;
    return a.members < b.members;
  });

  AdaptiveResult res;
  res.partitions = partitions;
  const Matrix qr = reduced_orbital_pair_matrix(q, t);
  res.j = Matrix::Zero(q.rows(), q.rows());

  std::vector<int> below;
  for (const auto& part : partitions) {
    TAOptions o;
    o.omega = opt.omega;
    o.target_tol = opt.target_tol;
    o.box = opt.margin * part.box;
    o.n_q1 = opt.n_q1;
    o.fixed_order = opt.fixed_order;
    const TAFactorization plan = build_ta_plan(o);
    res.orders.push_back(plan.n_cheb());

    std::vector<int> upto = below;
    upto.insert(upto.end(), part.members.begin(), part.members.end());
    std::sort(upto.begin(), upto.end());
    auto block = [&](const std::vector<int>& members) -> Matrix {
      if (members.empty()) return Matrix::Zero(q.rows(), q.rows());
      std::vector<PairProduct> sub;
      Matrix qs(q.rows(), static_cast<Index>(members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) {
        sub.push_back(pairs[members[k]]);
        qs.col(static_cast<Index>(k)) = qr.col(members[k]);
      }
      const Matrix qm = qs * build_m_ta(all_pair_moments(sub, plan), plan.n_cheb());
      return apply_middle_factor(plan, qm) * qm.transpose();
    };
    res.j += block(upto) - block(below);
    below = std::move(upto);
  }
  return res;
}

inline AdaptiveResult coulomb_adaptive(const Basis& basis, const Matrix& q, const AdaptiveOptions& opt) {
  const PairTable t(static_cast<int>(basis.size()));
  const auto pairs = all_pair_products(basis, t, opt.tau_screening);
  std::vector<double> supports(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) supports[p] = numerical_support(pairs[p], opt.tau);
  return coulomb_partitioned(pairs, t, q, cluster_supports(supports, opt.n_partitions), opt);
}

}  // namespace ltei
