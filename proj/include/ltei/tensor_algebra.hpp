#pragma once

// Dense matrices, 4-way tensors and the Kronecker/Khatri-Rao family.
// Everything is column-major: the first index runs fastest.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ltei/errors.hpp"

namespace ltei {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::array<Index, 4> dims) : dims_(dims), data_(dims[0] * dims[1] * dims[2] * dims[3], 0.0) {
    for (Index d : dims)
      if (d < 0) throw DimensionError("Tensor4: negative dimension");
  }

  const std::array<Index, 4>& dims() const { return dims_; }
  Index dim(int j) const { return dims_[j]; }
  std::size_t size() const { return data_.size(); }

  double& operator()(Index i1, Index i2, Index i3, Index i4) { return data_[offset(i1, i2, i3, i4)]; }
  double operator()(Index i1, Index i2, Index i3, Index i4) const { return data_[offset(i1, i2, i3, i4)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t offset(Index i1, Index i2, Index i3, Index i4) const {
    return static_cast<std::size_t>(i1 + dims_[0] * (i2 + dims_[1] * (i3 + dims_[2] * i4)));
  }
  std::array<Index, 4> dims_{0, 0, 0, 0};
  std::vector<double> data_;
};

namespace detail {

inline void check_mode(int j) {
  if (j < 0 || j > 3) throw DimensionError("mode index must be in [0, 3], got " + std::to_string(j));
}

// Column of the mode-j unfolding holding multi-index i (zero-based).
inline Index unfolding_column(const std::array<Index, 4>& dims, const std::array<Index, 4>& i, int j) {
  Index col = 0, stride = 1;
  for (int k = 0; k < 4; ++k) {
    if (k == j) continue;
    col += i[k] * stride;
    stride *= dims[k];
  }
  return col;
}

}  // namespace detail

// Mode-j unfolding: I_j x prod_{k != j} I_k, remaining indices in increasing
// order with the lowest one fastest.
inline Matrix mode_matricize(const Tensor4& t, int j) {
  detail::check_mode(j);
  const auto& d = t.dims();
  const Index cols = static_cast<Index>(t.size()) / (d[j] == 0 ? 1 : d[j]);
  Matrix m(d[j], d[j] == 0 ? 0 : cols);
  std::array<Index, 4> i{};
  for (i[3] = 0; i[3] < d[3]; ++i[3])
    for (i[2] = 0; i[2] < d[2]; ++i[2])
      for (i[1] = 0; i[1] < d[1]; ++i[1])
        for (i[0] = 0; i[0] < d[0]; ++i[0])
          m(i[j], detail::unfolding_column(d, i, j)) = t(i[0], i[1], i[2], i[3]);
  return m;
}

inline Tensor4 mode_unmatricize(const Matrix& m, int j, const std::array<Index, 4>& dims) {
  detail::check_mode(j);
  Index other = 1;
  for (int k = 0; k < 4; ++k)
    if (k != j) other *= dims[k];
  if (m.rows() != dims[j] || m.cols() != other)
    throw DimensionError("mode_unmatricize: matrix shape does not match tensor dims");
  Tensor4 t(dims);
  std::array<Index, 4> i{};
  for (i[3] = 0; i[3] < dims[3]; ++i[3])
    for (i[2] = 0; i[2] < dims[2]; ++i[2])
      for (i[1] = 0; i[1] < dims[1]; ++i[1])
        for (i[0] = 0; i[0] < dims[0]; ++i[0])
          t(i[0], i[1], i[2], i[3]) = m(i[j], detail::unfolding_column(dims, i, j));
  return t;
}

// (I1 I2) x (I3 I4) unfolding; row i1 + I1 i2, column i3 + I3 i4.  With the
// column-major layout this is a pure reinterpretation of storage.
inline Matrix mode12_matricize(const Tensor4& t) {
  const auto& d = t.dims();
  return Eigen::Map<const Matrix>(t.data(), d[0] * d[1], d[2] * d[3]);
}

inline Tensor4 mode12_unmatricize(const Matrix& m, const std::array<Index, 4>& dims) {
  if (m.rows() != dims[0] * dims[1] || m.cols() != dims[2] * dims[3])
    throw DimensionError("mode12_unmatricize: matrix shape does not match tensor dims");
  Tensor4 t(dims);
  Eigen::Map<Matrix>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

// Block matrix [a_ij B].
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Face-splitting product: row k of the result is A[k,:] (x) B[k,:].
inline Matrix khatri_rao_row(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw DimensionError("khatri_rao_row: row counts differ (" + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()) + ")");
  Matrix k(a.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.cols(); ++i)
    k.middleCols(i * b.cols(), b.cols()) = b.array().colwise() * a.col(i).array();
  return k;
}

// Column k of the result is A[:,k] (x) B[:,k].
inline Matrix khatri_rao_col(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw DimensionError("khatri_rao_col: column counts differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  Matrix k(a.rows() * b.rows(), a.cols());
  for (Index c = 0; c < a.cols(); ++c)
    for (Index i = 0; i < a.rows(); ++i) k.col(c).segment(i * b.rows(), b.rows()) = a(i, c) * b.col(c);
  return k;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("hadamard: shapes differ");
  return a.cwiseProduct(b);
}

// out = m * (a3 (x) a2 (x) a1)^T.  Column index of m is c1 + m1 c2 + m1 m2 c3,
// a_l is n_l x m_l.  Three GEMM passes; each contracts the slowest index and
// rotates the new one to the front, so no explicit permutation is needed.
inline Matrix kron3_apply(const Matrix& a1, const Matrix& a2, const Matrix& a3, const Matrix& m) {
  const Index m1 = a1.cols(), m2 = a2.cols(), m3 = a3.cols();
  if (m.cols() != m1 * m2 * m3)
    throw DimensionError("kron3_apply: input has " + std::to_string(m.cols()) + " columns, expected " +
                         std::to_string(m1 * m2 * m3));
  const Index rows = m.rows();
  // layout (r, c1, c2 | c3)
  Matrix y = (m.reshaped(rows * m1 * m2, m3) * a3.transpose()).transpose();
  // layout (k3, r, c1 | c2)
  y = (y.reshaped(a3.rows() * rows * m1, m2) * a2.transpose()).transpose();
  // layout (k2, k3, r | c1)
  y = (y.reshaped(a2.rows() * a3.rows() * rows, m1) * a1.transpose()).transpose();
  // layout (k1, k2, k3 | r)
  return y.reshaped(a1.rows() * a2.rows() * a3.rows(), rows).transpose();
}

inline Matrix kron3_apply(const Matrix& a, const Matrix& m) { return kron3_apply(a, a, a, m); }

}  // namespace ltei
