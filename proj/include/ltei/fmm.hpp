#pragma once

// Black-box Chebyshev FMM for the kernel erf(w r)/r, plus the grid moment
// matrix Z that turns pair products into charges on a tensor Chebyshev grid.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "ltei/basis.hpp"
#include "ltei/chebyshev.hpp"
#include "ltei/errors.hpp"
#include "ltei/quadrature.hpp"
#include "ltei/ta.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

using Points = std::vector<Vec3>;

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// O(N M) reference sum p(x_i) = sum_j K(x_i, y_j) q_j.
inline Vector direct_nbody(const Points& targets, const Points& sources, const Vector& charges, double omega) {
  if (charges.size() != static_cast<Index>(sources.size())) throw DimensionError("direct_nbody: one charge per source");
  Vector p = Vector::Zero(static_cast<Index>(targets.size()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(targets.size()); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < sources.size(); ++j)
      s += kernel_eval_reference(omega, distance(targets[i], sources[j])) * charges(static_cast<Index>(j));
    p(i) = s;
  }
  return p;
}

inline Matrix kernel_matrix(const Points& targets, const Points& sources, double omega) {
  Matrix k(static_cast<Index>(targets.size()), static_cast<Index>(sources.size()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(sources.size()); ++j)
    for (std::size_t i = 0; i < targets.size(); ++i)
      k(static_cast<Index>(i), j) = kernel_eval_reference(omega, distance(targets[i], sources[j]));
  return k;
}

// First-kind tensor grid on [-b, b]^3, point i1 + n i2 + n^2 i3.
inline Points chebyshev_grid(int n, double b) {
  const auto x = cheb_nodes(GridKind::Gauss, n, b);
  Points pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) pts.push_back({x[i], x[j], x[k]});
  return pts;
}

struct Cell {
  Vec3 center{};
  double half = 0.0;
  int level = 0;
  std::array<std::int64_t, 3> coord{};  // lattice position at this level
  int begin = 0, end = 0;               // range in Octree::order
  int parent = -1;
  int octant = 0;
  std::array<int, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
  bool leaf = true;
  int count() const { return end - begin; }
  double radius() const { return std::sqrt(3.0) * half; }
};

// Adaptive octree; cells are stored parents-before-children.
class Octree {
 public:
  Octree() = default;
  Octree(const Points& pts, const Vec3& center, double half, int leaf_size, int max_depth = 20) {
    if (leaf_size < 1) throw DomainError("Octree: leaf size must be >= 1");
    order_.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order_[i] = static_cast<int>(i);
    Cell root;
    root.center = center;
    root.half = half;
    root.begin = 0;
    root.end = static_cast<int>(pts.size());
    cells_.push_back(root);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      if (cells_[c].count() <= leaf_size || cells_[c].level >= max_depth) continue;
      split(pts, static_cast<int>(c));
    }
  }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<int>& order() const { return order_; }
  int depth() const {
    int d = 0;
    for (const auto& c : cells_) d = std::max(d, c.level);
    return d;
  }

 private:
  void split(const Points& pts, int ci) {
    const Cell parent = cells_[ci];
    auto oct = [&](int p) {
      const Vec3& x = pts[p];
      return (x[0] >= parent.center[0] ? 1 : 0) | (x[1] >= parent.center[1] ? 2 : 0) | (x[2] >= parent.center[2] ? 4 : 0);
    };
    auto first = order_.begin() + parent.begin, last = order_.begin() + parent.end;
    std::stable_sort(first, last, [&](int a, int b) { return oct(a) < oct(b); });
    int pos = parent.begin;
    cells_[ci].leaf = false;
    for (int o = 0; o < 8; ++o) {
      int e = pos;
      while (e < parent.end && oct(order_[e]) == o) ++e;
      if (e == pos) continue;
      Cell c;
      c.half = 0.5 * parent.half;
      c.level = parent.level + 1;
      for (int l = 0; l < 3; ++l) {
        const int bit = (o >> l) & 1;
        c.center[l] = parent.center[l] + (bit ? c.half : -c.half);
        c.coord[l] = 2 * parent.coord[l] + bit;
      }
      c.begin = pos;
      c.end = e;
      c.parent = ci;
      c.octant = o;
      cells_[ci].child[o] = static_cast<int>(cells_.size());
      cells_.push_back(c);
      pos = e;
    }
  }

  std::vector<Cell> cells_;
  std::vector<int> order_;
};

struct FMMOptions {
  int order = 6;        // Chebyshev points per dimension and cell
  double eta = 1.5;     // far field when dist(c1, c2) >= eta (r1 + r2)
  int leaf_size = 8;
  int max_depth = 20;
  // Admissible pairs with count_t * count_s at or below this are summed
  // directly; small cells would otherwise pay a full p^6 M2L.
  double direct_pair_limit = 64;
};

namespace detail {

// 1D first-kind Lagrange basis on [-1, 1]: out[m] = L(t_m, t).
inline void cheb_lagrange_1d(int p, double t, const std::vector<double>& tnodes, double* out) {
  t = std::clamp(t, -1.0, 1.0);
  std::vector<double> tk(p);
  cheb_eval(p, t, 1.0, tk.data());
  for (int m = 0; m < p; ++m) {
    double s = 0.0, tm_prev = 1.0, tm = tnodes[m];
    for (int k = 1; k < p; ++k) {
      s += tm * tk[k];
      const double next = 2.0 * tnodes[m] * tm - tm_prev;
      tm_prev = tm;
      tm = next;
    }
    out[m] = (1.0 + 2.0 * s) / p;
  }
}

// Tensor Lagrange weights S(xbar_m, x) for m = m1 + p m2 + p^2 m3.
inline void cheb_lagrange_3d(int p, const Vec3& t, const std::vector<double>& tnodes, double* out) {
  std::vector<double> l0(p), l1(p), l2(p);
  cheb_lagrange_1d(p, t[0], tnodes, l0.data());
  cheb_lagrange_1d(p, t[1], tnodes, l1.data());
  cheb_lagrange_1d(p, t[2], tnodes, l2.data());
  for (int c = 0; c < p; ++c)
    for (int b = 0; b < p; ++b)
      for (int a = 0; a < p; ++a) out[a + p * (b + p * c)] = l0[a] * l1[b] * l2[c];
}

struct M2LKey {
  int lt, ls;
  std::int64_t dx, dy, dz;
  bool operator==(const M2LKey&) const = default;
};

struct M2LKeyHash {
  std::size_t operator()(const M2LKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.lt) * 1315423911u + static_cast<std::size_t>(k.ls);
    for (std::int64_t v : {k.dx, k.dy, k.dz}) h = h * 2654435761u + static_cast<std::size_t>(v + (1 << 20));
    return h;
  }
};

}  // namespace detail

// Everything that depends on geometry, kernel and order but not on charges.
class FMMPlan {
  using Clock = std::chrono::steady_clock;
  struct M2LEntry {
    int target, source;
    const Matrix* kernel;
    const std::vector<int>* map;
  };
  struct M2LGroup {
    const Matrix* kernel;
    std::vector<M2LEntry> entries;
  };

 public:
  FMMPlan(const Points& targets, const Points& sources, double omega, const FMMOptions& opt = {})
      : omega_(omega), opt_(opt), targets_(targets), sources_(sources) {
    if (opt.order < 1) throw DomainError("FMMPlan: order must be >= 1");
    if (omega < 0.0) throw DomainError("FMMPlan: omega must be >= 0");
    const int p = opt.order, p3 = p * p * p;
    tnodes_ = cheb_nodes(GridKind::Gauss, p, 1.0);

    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const Points* set : {&targets, &sources})
      for (const auto& x : *set)
        for (int l = 0; l < 3; ++l) lo[l] = std::min(lo[l], x[l]), hi[l] = std::max(hi[l], x[l]);
    Vec3 center{};
    double half = 0.0;
    for (int l = 0; l < 3; ++l) {
      center[l] = (targets.empty() && sources.empty()) ? 0.0 : 0.5 * (lo[l] + hi[l]);
      half = std::max(half, 0.5 * (hi[l] - lo[l]));
    }
    half = half * (1.0 + 1e-10) + 1e-300;
    ttree_ = Octree(targets, center, half, opt.leaf_size, opt.max_depth);
    stree_ = Octree(sources, center, half, opt.leaf_size, opt.max_depth);

    // child-to-parent interpolation, one matrix per octant, level independent
    for (int o = 0; o < 8; ++o) {
      m2m_[o].resize(p3, p3);
      std::vector<double> w(p3);
      for (int c = 0; c < p; ++c)
        for (int b = 0; b < p; ++b)
          for (int a = 0; a < p; ++a) {
            const Vec3 t{0.5 * tnodes_[a] + ((o & 1) ? 0.5 : -0.5), 0.5 * tnodes_[b] + ((o & 2) ? 0.5 : -0.5),
                         0.5 * tnodes_[c] + ((o & 4) ? 0.5 : -0.5)};
            detail::cheb_lagrange_3d(p, t, tnodes_, w.data());
            for (int m = 0; m < p3; ++m) m2m_[o](m, a + p * (b + p * c)) = w[m];
          }
    }

    p2m_ = leaf_interpolation(stree_, sources_);
    l2p_ = leaf_interpolation(ttree_, targets_);

    p2p_.assign(ttree_.cells().size(), {});
    if (!targets.empty() && !sources.empty()) traverse(0, 0);
  }

  double omega() const { return omega_; }
  const FMMOptions& options() const { return opt_; }
  const Octree& target_tree() const { return ttree_; }
  const Octree& source_tree() const { return stree_; }
  std::size_t n_m2l_pairs() const {
    std::size_t n = 0;
    for (const auto& g : m2l_groups_) n += g.entries.size();
    return n;
  }
  std::size_t n_m2l_matrices() const { return m2l_cache_.size(); }
  std::size_t n_p2p_pairs() const {
    std::size_t n = 0;
    for (const auto& v : p2p_) n += v.size();
    return n;
  }

  Vector apply(const Vector& q) const {
    if (q.size() != static_cast<Index>(sources_.size())) throw DimensionError("fmm_apply: one charge per source");
    const int p3 = opt_.order * opt_.order * opt_.order;
    const auto& sc = stree_.cells();
    const auto& tc = ttree_.cells();

    const auto t0 = Clock::now();
    std::vector<Vector> mult(sc.size(), Vector::Zero(p3));
    for (std::ptrdiff_t c = static_cast<std::ptrdiff_t>(sc.size()) - 1; c >= 0; --c) {
      const Cell& cell = sc[c];
      if (cell.leaf) {
        Vector qs(cell.count());
        for (int k = 0; k < cell.count(); ++k) qs(k) = q(stree_.order()[cell.begin + k]);
        mult[c] = p2m_[c] * qs;
      } else {
        for (int o = 0; o < 8; ++o)
          if (cell.child[o] >= 0) mult[c].noalias() += m2m_[o] * mult[cell.child[o]];
      }
    }

    const auto t1 = Clock::now();
    // M2L batched per canonical kernel block: gather, one GEMM, scatter.
    std::vector<Vector> local(tc.size(), Vector::Zero(p3));
    for (const auto& g : m2l_groups_) {
      const Index cnt = static_cast<Index>(g.entries.size());
      Matrix w(p3, cnt);
      for (Index c = 0; c < cnt; ++c) {
        const auto& e = g.entries[c];
        const auto& map = *e.map;
        const Vector& m = mult[e.source];
        for (int k = 0; k < p3; ++k) w(map[k], c) = m(k);
      }
      const Matrix y = *g.kernel * w;
      for (Index c = 0; c < cnt; ++c) {
        const auto& e = g.entries[c];
        const auto& map = *e.map;
        Vector& l = local[e.target];
        for (int k = 0; k < p3; ++k) l(k) += y(map[k], c);
      }
    }
    const auto t2 = Clock::now();

    Vector out = Vector::Zero(static_cast<Index>(targets_.size()));
    for (std::size_t t = 0; t < tc.size(); ++t) {
      const Cell& cell = tc[t];
      if (cell.parent >= 0) local[t].noalias() += m2m_[cell.octant].transpose() * local[cell.parent];
    }
    const auto t3 = Clock::now();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tc.size()); ++t) {
      const Cell& cell = tc[t];
      if (!cell.leaf) continue;
      const Vector far = l2p_[t].transpose() * local[t];
      for (int k = 0; k < cell.count(); ++k) {
        const int i = ttree_.order()[cell.begin + k];
        const Vec3& x = targets_[i];
        double s = far(k);
        for (int sidx : p2p_[t]) {
          const Cell& src = sc[sidx];
          for (int m = src.begin; m < src.end; ++m) {
            const int j = stree_.order()[m];
            s += kernel_eval_reference(omega_, distance(x, sources_[j])) * q(j);
          }
        }
        out(i) = s;
      }
    }
    const auto t4 = Clock::now();
    auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
    timings_ = {ms(t0, t1), ms(t1, t2), ms(t2, t3), ms(t3, t4)};
    return out;
  }

  // Wall time of the phases of the last apply(), in milliseconds.
  struct Timings {
    double upward = 0, m2l = 0, downward = 0, leaves = 0;
  };
  const Timings& last_timings() const { return timings_; }

 private:
  // p^3 x count interpolation weights for every leaf.
  std::vector<Matrix> leaf_interpolation(const Octree& tree, const Points& pts) const {
    const int p = opt_.order, p3 = p * p * p;
    std::vector<Matrix> out(tree.cells().size());
    std::vector<double> w(p3);
    for (std::size_t c = 0; c < tree.cells().size(); ++c) {
      const Cell& cell = tree.cells()[c];
      if (!cell.leaf) continue;
      out[c].resize(p3, cell.count());
      for (int k = 0; k < cell.count(); ++k) {
        const Vec3& x = pts[tree.order()[cell.begin + k]];
        Vec3 t;
        for (int l = 0; l < 3; ++l) t[l] = (x[l] - cell.center[l]) / cell.half;
        detail::cheb_lagrange_3d(p, t, tnodes_, w.data());
        for (int m = 0; m < p3; ++m) out[c](m, k) = w[m];
      }
    }
    return out;
  }

  // Direct interaction of source cell s with every target leaf under t.
  void add_near(int t, int s) {
    const Cell& a = ttree_.cells()[t];
    if (a.leaf) {
      p2p_[t].push_back(s);
      return;
    }
    for (int c : a.child)
      if (c >= 0) add_near(c, s);
  }

  bool admissible(const Cell& a, const Cell& b) const {
    return distance(a.center, b.center) >= opt_.eta * (a.radius() + b.radius());
  }

  void traverse(int t, int s) {
    const Cell& a = ttree_.cells()[t];
    const Cell& b = stree_.cells()[s];
    if (admissible(a, b) && static_cast<double>(a.count()) * b.count() <= opt_.direct_pair_limit) {
      add_near(t, s);
    } else if (admissible(a, b)) {
      const M2LEntry e = m2l_entry(a, b, t, s);
      auto [it, fresh] = group_index_.emplace(e.kernel, m2l_groups_.size());
      if (fresh) m2l_groups_.push_back({e.kernel, {}});
      m2l_groups_[it->second].entries.push_back(e);
    } else if (a.leaf && b.leaf) {
      add_near(t, s);
    } else if (a.leaf || (!b.leaf && b.half > a.half)) {
      for (int c : b.child)
        if (c >= 0) traverse(t, c);
    } else {
      for (int c : a.child)
        if (c >= 0) traverse(c, s);
    }
  }

  // Kernel blocks are stored once per offset up to the 48 signed axis
  // permutations, which map the Chebyshev nodes onto themselves.  With R the
  // transform taking the offset to canonical form (non-negative, ascending),
  // block(m, k) = canonical(phi(m), phi(k)) where phi is R acting on node
  // indices.
  M2LEntry m2l_entry(const Cell& a, const Cell& b, int t, int s) {
    const int lf = std::max(a.level, b.level);
    auto scaled = [lf](const Cell& c, int l) { return (2 * c.coord[l] + 1) << (lf - c.level); };
    std::array<std::int64_t, 3> d{};
    std::array<int, 3> sign{}, sigma{0, 1, 2};
    for (int l = 0; l < 3; ++l) {
      d[l] = scaled(a, l) - scaled(b, l);
      sign[l] = d[l] < 0 ? -1 : 1;
      d[l] = d[l] < 0 ? -d[l] : d[l];
    }
    std::stable_sort(sigma.begin(), sigma.end(), [&](int x, int y) { return d[x] < d[y]; });
    const detail::M2LKey key{a.level, b.level, d[sigma[0]], d[sigma[1]], d[sigma[2]]};

    const int p = opt_.order, p3 = p * p * p;
    auto it = m2l_cache_.find(key);
    if (it == m2l_cache_.end()) {
      Vec3 off;
      for (int j = 0; j < 3; ++j) off[j] = std::abs(a.center[sigma[j]] - b.center[sigma[j]]);
      Points xa(p3), xb(p3);
      for (int c = 0; c < p; ++c)
        for (int bb = 0; bb < p; ++bb)
          for (int aa = 0; aa < p; ++aa) {
            const int m = aa + p * (bb + p * c);
            const int idx[3] = {aa, bb, c};
            for (int l = 0; l < 3; ++l) {
              xa[m][l] = off[l] + a.half * tnodes_[idx[l]];
              xb[m][l] = b.half * tnodes_[idx[l]];
            }
          }
      it = m2l_cache_.emplace(key, kernel_matrix(xa, xb, omega_)).first;
    }

    const int code = ((sign[0] < 0) | (sign[1] < 0) << 1 | (sign[2] < 0) << 2) | (sigma[0] + 3 * sigma[1] + 9 * sigma[2]) << 3;
    auto mit = node_maps_.find(code);
    if (mit == node_maps_.end()) {
      std::vector<int> map(p3);
      for (int c = 0; c < p; ++c)
        for (int bb = 0; bb < p; ++bb)
          for (int aa = 0; aa < p; ++aa) {
            const int idx[3] = {aa, bb, c};
            int r[3];
            for (int j = 0; j < 3; ++j) r[j] = sign[sigma[j]] > 0 ? idx[sigma[j]] : p - 1 - idx[sigma[j]];
            map[aa + p * (bb + p * c)] = r[0] + p * (r[1] + p * r[2]);
          }
      mit = node_maps_.emplace(code, std::move(map)).first;
    }
    return {t, s, &it->second, &mit->second};
  }

  double omega_;
  FMMOptions opt_;
  Points targets_, sources_;
  std::vector<double> tnodes_;
  Octree ttree_, stree_;
  std::array<Matrix, 8> m2m_;
  std::vector<Matrix> p2m_, l2p_;
  std::unordered_map<detail::M2LKey, Matrix, detail::M2LKeyHash> m2l_cache_;
  std::unordered_map<int, std::vector<int>> node_maps_;
  std::vector<M2LGroup> m2l_groups_;
  std::unordered_map<const Matrix*, std::size_t> group_index_;
  mutable Timings timings_;
  std::vector<std::vector<int>> p2p_;
};

inline Vector fmm_apply(const FMMPlan& plan, const Vector& charges) { return plan.apply(charges); }

// Z(p, i1 + n i2 + n^2 i3) = int g_p(x) L_i(x) dx over [-b, b]^3, with L_i the
// first-kind Lagrange basis.  Built from the Chebyshev moments, since
// int g L_i = W(0)/n + 2/n sum_{k>=1} T_k(x_i) W(k).
inline Matrix build_z_matrix(const std::vector<PairProduct>& pairs, int n, double b, int n_q2 = 64) {
  const auto x = cheb_nodes(GridKind::Gauss, n, b);
  const Matrix t = cheb_vandermonde(n, x, b);  // t(i, k) = T_k(x_i)
  Vector scale = Vector::Constant(n, 2.0 / n);
  scale(0) = 1.0 / n;
  std::vector<PairMoments> lag(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pairs.size()); ++p) {
    PairMoments m = pair_moments(pairs[p], b, n, n_q2);
    for (int l = 0; l < 3; ++l) m.w[l] = m.w[l] * scale.asDiagonal() * t.transpose();
    lag[p] = std::move(m);
  }
  return build_m_ta(lag, n);
}

inline double element_integral_fmm(const Matrix& z, int p, int q, const Matrix& kernel) {
  return z.row(p).dot(kernel * z.row(q).transpose());
}

// B * rhs = unfold(Z K Z^T fold(rhs)), one FMM pass per column.
inline Matrix apply_factorized_fmm(const Matrix& z, const FMMPlan& plan, const PairTable& table, const Matrix& rhs) {
  if (z.rows() != table.size()) throw DimensionError("apply_factorized_fmm: Z rows != unique pairs");
  const Matrix v = z.transpose() * fold_pairs(table, rhs);
  Matrix kv(v.rows(), v.cols());
  for (Index c = 0; c < v.cols(); ++c) kv.col(c) = plan.apply(v.col(c));
  return unfold_pairs(table, z * kv);
}

}  // namespace ltei
