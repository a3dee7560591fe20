#pragma once

#include <random>
#include <string>

#include "ltei/ltei.hpp"

namespace ltei::test {

inline Matrix random_matrix(std::mt19937& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double n = b.norm();
  return n == 0.0 ? (a - b).norm() : (a - b).norm() / n;
}

inline std::string data_path(const std::string& name) { return std::string(LTEI_DATA_DIR) + "/" + name; }

inline Molecule load_toy(const std::string& name) {
  Molecule m = load_molecule(data_path(name));
  recenter(m);
  return m;
}

}  // namespace ltei::test
