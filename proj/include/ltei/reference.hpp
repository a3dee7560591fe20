#pragma once

// Brute-force reference for long-range integrals on a box, independent of
// the Chebyshev machinery:
//   B = 2/sqrt(pi) int_0^w ds sum_{j,j'} c_j c_j' prod_l
//       int int g_j(x) g_j'(y) exp(-s^2 (x - y)^2) dx dy
// with composite Gauss-Legendre in x, y and Gauss-Legendre in s.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ltei/basis.hpp"
#include "ltei/quadrature.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

struct ReferenceOptions {
  int n_s = 48;
  int points_per_panel = 16;
  double panel_widths = 0.5;  // panel length in units of the narrowest length scale
};

inline std::vector<double> composite_nodes(double lo, double hi, int panels, int per_panel, std::vector<double>& weights) {
  const QuadratureRule ref = gauss_legendre(per_panel);
  std::vector<double> x;
  weights.clear();
  for (int p = 0; p < panels; ++p) {
    const double a = lo + (hi - lo) * p / panels, b = lo + (hi - lo) * (p + 1) / panels;
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      x.push_back(c + r * ref.nodes[q]);
      weights.push_back(r * ref.weights[q]);
    }
  }
  return x;
}

// Reduced-pair matrix B(p, q) over [-b, b]^3 for the given pair products.
inline Matrix reference_dense_tei(const std::vector<PairProduct>& pairs, double omega, double b,
                                  const ReferenceOptions& opt = {}) {
  const Index np = static_cast<Index>(pairs.size());
  Matrix out = Matrix::Zero(np, np);
  if (omega == 0.0 || np == 0) return out;

  double a_max = 0.0;
  std::vector<Index> offset(pairs.size() + 1, 0);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    offset[p + 1] = offset[p] + static_cast<Index>(pairs[p].size());
    for (const auto& pr : pairs[p].primitives) a_max = std::max({a_max, pr.a1, pr.a2});
  }
  const Index nprim = offset.back();
  const double scale = std::min(1.0 / std::sqrt(2.0 * a_max), 1.0 / omega);
  const int panels = std::max(2, static_cast<int>(std::ceil(2.0 * b / (opt.panel_widths * scale))));
  std::vector<double> w;
  const std::vector<double> x = composite_nodes(-b, b, panels, opt.points_per_panel, w);
  const Index ng = static_cast<Index>(x.size());

  std::array<Matrix, 3> g;
  Vector c(nprim);
  for (int l = 0; l < 3; ++l) g[l].resize(ng, nprim);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t j = 0; j < pairs[p].size(); ++j) {
      const auto& pr = pairs[p].primitives[j];
      const Index col = offset[p] + static_cast<Index>(j);
      c(col) = pr.coefficient;
      for (int l = 0; l < 3; ++l)
        for (Index a = 0; a < ng; ++a) g[l](a, col) = w[a] * pr.factor(l, x[a]);
    }

  const QuadratureRule sq = gauss_legendre(opt.n_s, 0.0, omega);
  Matrix e(ng, ng);
  for (std::size_t k = 0; k < sq.size(); ++k) {
    const double s2 = sq.nodes[k] * sq.nodes[k];
    for (Index j = 0; j < ng; ++j)
      for (Index i = 0; i < ng; ++i) e(i, j) = std::exp(-s2 * (x[i] - x[j]) * (x[i] - x[j]));
    Matrix prod = Matrix::Ones(nprim, nprim);
    for (int l = 0; l < 3; ++l) prod.array() *= (g[l].transpose() * (e * g[l])).array();
    for (Index q = 0; q < np; ++q)
      for (Index p = 0; p <= q; ++p) {
        const Index np_ = offset[p + 1] - offset[p], nq_ = offset[q + 1] - offset[q];
        const double v = c.segment(offset[p], np_).dot(prod.block(offset[p], offset[q], np_, nq_) *
                                                        c.segment(offset[q], nq_));
        out(p, q) += sq.weights[k] * v;
      }
  }
  out *= 2.0 / std::sqrt(std::numbers::pi);
  out.triangularView<Eigen::StrictlyLower>() = out.transpose().triangularView<Eigen::StrictlyLower>();
  return out;
}

}  // namespace ltei
