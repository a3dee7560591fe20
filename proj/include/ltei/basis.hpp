#pragma once

// Contracted Cartesian Gaussians, their pair products, screening and the
// box half-widths derived from numerical support.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ltei/errors.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

using Vec3 = std::array<double, 3>;
using Powers = std::array<int, 3>;

struct Primitive {
  double exponent = 0.0;
  double coefficient = 0.0;
};

// sum_j c_j prod_l (x_l - r_l)^{p_l} exp(-a_j (x_l - r_l)^2); primitives are
// not normalized, the coefficients are used as given.
struct BasisFunction {
  Vec3 center{};
  Powers powers{};
  std::vector<Primitive> primitives;
  int atom = -1;

  double operator()(const Vec3& x) const {
    double poly = 1.0, r2 = 0.0;
    for (int l = 0; l < 3; ++l) {
      const double d = x[l] - center[l];
      poly *= std::pow(d, powers[l]);
      r2 += d * d;
    }
    double s = 0.0;
    for (const auto& p : primitives) s += p.coefficient * std::exp(-p.exponent * r2);
    return poly * s;
  }
};

struct Shell {
  std::vector<Powers> powers;  // one basis function per entry
  std::vector<double> exponents;
  std::vector<double> coefficients;
};

struct Atom {
  std::string element;
  Vec3 coords{};
  std::vector<Shell> shells;
};

struct Molecule {
  std::string name;
  std::vector<Atom> atoms;
  std::optional<Matrix> orbitals;  // N_orb x N_b
};

using Basis = std::vector<BasisFunction>;

inline Basis build_basis(const Molecule& mol) {
  Basis basis;
  for (std::size_t a = 0; a < mol.atoms.size(); ++a)
    for (const auto& sh : mol.atoms[a].shells) {
      if (sh.exponents.size() != sh.coefficients.size())
        throw DimensionError("shell exponents and coefficients differ in length");
      for (const auto& p : sh.powers) {
        BasisFunction f;
        f.center = mol.atoms[a].coords;
        f.powers = p;
        f.atom = static_cast<int>(a);
        for (std::size_t j = 0; j < sh.exponents.size(); ++j) f.primitives.push_back({sh.exponents[j], sh.coefficients[j]});
        basis.push_back(std::move(f));
      }
    }
  return basis;
}

// Shift coordinates so the atom centroid sits at the origin.
inline void recenter(Molecule& mol) {
  if (mol.atoms.empty()) return;
  Vec3 c{0, 0, 0};
  for (const auto& a : mol.atoms)
    for (int l = 0; l < 3; ++l) c[l] += a.coords[l] / static_cast<double>(mol.atoms.size());
  for (auto& a : mol.atoms)
    for (int l = 0; l < 3; ++l) a.coords[l] -= c[l];
}

// Product of one primitive of mu with one primitive of nu.  Per direction the
// factor is (x - A)^pa (x - B)^pb exp(-a1 (x - A)^2 - a2 (x - B)^2), which
// equals prefactor_l * poly * exp(-exponent (x - center)^2).
struct PrimitivePair {
  double a1 = 0.0, a2 = 0.0;
  Vec3 ca{}, cb{};
  Powers pa{}, pb{};
  double coefficient = 0.0;  // c_j1 c_j2
  double exponent = 0.0;     // a1 + a2
  Vec3 center{};             // (a1 A + a2 B) / (a1 + a2)
  double prefactor = 0.0;    // exp(-a1 a2 / (a1 + a2) |A - B|^2)

  double factor(int l, double x) const {
    const double da = x - ca[l], db = x - cb[l];
    double poly = 1.0;
    for (int k = 0; k < pa[l]; ++k) poly *= da;
    for (int k = 0; k < pb[l]; ++k) poly *= db;
    return poly * std::exp(-a1 * da * da - a2 * db * db);
  }

  double operator()(const Vec3& x) const { return coefficient * factor(0, x[0]) * factor(1, x[1]) * factor(2, x[2]); }
};

struct PairProduct {
  int mu = 0, nu = 0;
  std::vector<PrimitivePair> primitives;
  std::size_t size() const { return primitives.size(); }

  double operator()(const Vec3& x) const {
    double s = 0.0;
    for (const auto& p : primitives) s += p(x);
    return s;
  }
};

// Primitive pairs whose Gaussian prefactor is <= tau are dropped (tau = 0
// keeps everything).
inline PairProduct pair_product(const BasisFunction& f, const BasisFunction& g, double tau_screening = 0.0) {
  if (tau_screening < 0.0) throw DomainError("pair_product: screening threshold must be >= 0");
  PairProduct pp;
  double d2 = 0.0;
  for (int l = 0; l < 3; ++l) d2 += (f.center[l] - g.center[l]) * (f.center[l] - g.center[l]);
  for (const auto& p : f.primitives)
    for (const auto& q : g.primitives) {
      PrimitivePair s;
      s.a1 = p.exponent;
      s.a2 = q.exponent;
      s.ca = f.center;
      s.cb = g.center;
      s.pa = f.powers;
      s.pb = g.powers;
      s.coefficient = p.coefficient * q.coefficient;
      s.exponent = p.exponent + q.exponent;
      for (int l = 0; l < 3; ++l) s.center[l] = (p.exponent * f.center[l] + q.exponent * g.center[l]) / s.exponent;
      s.prefactor = std::exp(-p.exponent * q.exponent / s.exponent * d2);
      if (tau_screening > 0.0 && s.prefactor <= tau_screening) continue;
      pp.primitives.push_back(s);
    }
  return pp;
}

inline PairProduct pair_product(const Basis& basis, int mu, int nu, double tau_screening = 0.0) {
  const int n = static_cast<int>(basis.size());
  if (mu < 0 || nu < 0 || mu >= n || nu >= n) throw DimensionError("pair_product: basis index out of range");
  PairProduct pp = pair_product(basis[mu], basis[nu], tau_screening);
  pp.mu = mu;
  pp.nu = nu;
  return pp;
}

// Half-width b of the origin-centred cube outside which every Gaussian factor
// of the pair is below tau: max over primitives and directions of
// |center_l| + sqrt(ln(1/tau) / exponent).  Polynomial factors are ignored.
inline double numerical_support(const PairProduct& pp, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("numerical_support: tau must lie in (0, 1)");
  const double lt = std::log(1.0 / tau);
  double b = 0.0;
  for (const auto& p : pp.primitives)
    for (int l = 0; l < 3; ++l) b = std::max(b, std::abs(p.center[l]) + std::sqrt(lt / p.exponent));
  return b;
}

// Fixed-box half-width: the largest pair support times a safety margin.
inline double box_for_pairs(const std::vector<PairProduct>& pairs, double tau, double margin = 1.1) {
  double b = 0.0;
  for (const auto& pp : pairs) b = std::max(b, numerical_support(pp, tau));
  return margin * b;
}

// Unordered pairs mu <= nu, numbered nu-major: (0,0), (0,1), (1,1), (0,2), ...
class PairTable {
 public:
  PairTable() = default;
  explicit PairTable(int n_basis) : n_(n_basis) {
    if (n_basis < 0) throw DimensionError("PairTable: negative basis size");
    for (int nu = 0; nu < n_; ++nu)
      for (int mu = 0; mu <= nu; ++mu) pairs_.push_back({mu, nu});
  }
  int n_basis() const { return n_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  const std::array<int, 2>& operator[](int p) const { return pairs_[p]; }
  int index(int mu, int nu) const {
    if (mu > nu) std::swap(mu, nu);
    if (mu < 0 || nu >= n_) throw DimensionError("PairTable: index out of range");
    return nu * (nu + 1) / 2 + mu;
  }

 private:
  int n_ = 0;
  std::vector<std::array<int, 2>> pairs_;
};

inline std::vector<PairProduct> all_pair_products(const Basis& basis, const PairTable& table, double tau_screening) {
  std::vector<PairProduct> out;
  out.reserve(table.size());
  for (int p = 0; p < table.size(); ++p) out.push_back(pair_product(basis, table[p][0], table[p][1], tau_screening));
  return out;
}

struct SupportPartition {
  double box = 0.0;          // max member support
  std::vector<int> members;  // indices into the input support list
};

// Split the sorted supports into n contiguous groups of near-equal count.
// Groups never separate equal supports, so n is clamped to the number of
// distinct values.  Partitions come back sorted by box.
inline std::vector<SupportPartition> cluster_supports(const std::vector<double>& supports, int n) {
  if (n < 1) throw DomainError("cluster_supports: need at least one partition");
  std::vector<int> order(supports.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return supports[a] < supports[b]; });
  std::vector<double> distinct;
  for (int i : order)
    if (distinct.empty() || supports[i] != distinct.back()) distinct.push_back(supports[i]);
  n = std::min<int>(n, static_cast<int>(distinct.size()));
  std::vector<SupportPartition> parts;
  if (order.empty()) return parts;

  const std::size_t total = order.size();
  std::size_t start = 0;
  for (int g = 0; g < n && start < total; ++g) {
    std::size_t end = (g == n - 1) ? total : std::max(start + 1, total * (g + 1) / n);
    while (end < total && supports[order[end]] == supports[order[end - 1]]) ++end;
    SupportPartition part;
    for (std::size_t k = start; k < end; ++k) part.members.push_back(order[k]);
    part.box = supports[order[end - 1]];
    parts.push_back(std::move(part));
    start = end;
  }
  return parts;
}

}  // namespace ltei
