#pragma once

// Molecule JSON schema, matrix files (CSV and the "LTEI" binary format),
// particle files and the benchmark report CSV.
//
// Molecule schema:
//   { "name": str (optional),
//     "atoms": [ { "element": str,
//                  "coords": [x, y, z],          // Bohr
//                  "shells": [ { "l": int  or  "powers": [[px, py, pz], ...],
//                                "exponents": [a_1, ...],
//                                "coefficients": [c_1, ...] } ] } ],
//     "orbitals": [[q_11, ..., q_1Nb], ...]     // optional, N_orb x N_b }
// "l" expands to all Cartesian powers of total degree l, x-major.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltei/basis.hpp"
#include "ltei/compression.hpp"
#include "ltei/errors.hpp"
#include "ltei/fmm.hpp"
#include "ltei/tensor_algebra.hpp"

namespace ltei {

inline std::vector<Powers> cartesian_powers(int l) {
  std::vector<Powers> out;
  for (int px = l; px >= 0; --px)
    for (int py = l - px; py >= 0; --py) out.push_back({px, py, l - px - py});
  return out;
}

namespace detail {

using nlohmann::json;

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key, "missing field");
  return *it;
}

inline double finite_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "not finite");
  return v;
}

inline std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(finite_number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

inline int nonneg_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw SchemaError(path, "expected a non-negative integer");
  return static_cast<int>(j.get<long long>());
}

inline Shell parse_shell(const json& j, const std::string& path) {
  Shell sh;
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  if (j.contains("powers")) {
    const json& p = j["powers"];
    if (!p.is_array() || p.empty()) throw SchemaError(path + ".powers", "expected a non-empty array");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const std::string pk = path + ".powers[" + std::to_string(k) + "]";
      if (!p[k].is_array() || p[k].size() != 3) throw SchemaError(pk, "expected three integers");
      Powers pw{};
      for (int l = 0; l < 3; ++l) pw[l] = nonneg_int(p[k][l], pk + "[" + std::to_string(l) + "]");
      sh.powers.push_back(pw);
    }
  } else if (j.contains("l")) {
    sh.powers = cartesian_powers(nonneg_int(j["l"], path + ".l"));
  } else {
    throw SchemaError(path + ".l", "missing field (or give \"powers\")");
  }
  sh.exponents = number_array(field(j, "exponents", path), path + ".exponents");
  sh.coefficients = number_array(field(j, "coefficients", path), path + ".coefficients");
  if (sh.exponents.empty()) throw SchemaError(path + ".exponents", "a shell needs at least one primitive");
  if (sh.coefficients.size() != sh.exponents.size())
    throw SchemaError(path + ".coefficients", "length differs from exponents");
  for (std::size_t k = 0; k < sh.exponents.size(); ++k)
    if (sh.exponents[k] <= 0.0) throw SchemaError(path + ".exponents[" + std::to_string(k) + "]", "must be positive");
  return sh;
}

}  // namespace detail

inline Molecule parse_molecule(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  Molecule mol;
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw SchemaError("name", "expected a string");
    mol.name = j["name"].get<std::string>();
  }
  const json& atoms = detail::field(j, "atoms", "$");
  if (!atoms.is_array() || atoms.empty()) throw SchemaError("atoms", "expected a non-empty array");
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const std::string path = "atoms[" + std::to_string(a) + "]";
    Atom atom;
    const json& el = detail::field(atoms[a], "element", path);
    if (!el.is_string()) throw SchemaError(path + ".element", "expected a string");
    atom.element = el.get<std::string>();
    const auto c = detail::number_array(detail::field(atoms[a], "coords", path), path + ".coords");
    if (c.size() != 3) throw SchemaError(path + ".coords", "expected three numbers");
    atom.coords = {c[0], c[1], c[2]};
    const json& shells = detail::field(atoms[a], "shells", path);
    if (!shells.is_array()) throw SchemaError(path + ".shells", "expected an array");
    for (std::size_t s = 0; s < shells.size(); ++s)
      atom.shells.push_back(detail::parse_shell(shells[s], path + ".shells[" + std::to_string(s) + "]"));
    mol.atoms.push_back(std::move(atom));
  }
  if (j.contains("orbitals")) {
    const json& o = j["orbitals"];
    const Index nb = static_cast<Index>(build_basis(mol).size());
    if (!o.is_array() || o.empty()) throw SchemaError("orbitals", "expected a non-empty array of rows");
    Matrix q(static_cast<Index>(o.size()), nb);
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string path = "orbitals[" + std::to_string(i) + "]";
      const auto row = detail::number_array(o[i], path);
      if (static_cast<Index>(row.size()) != nb)
        throw SchemaError(path, "expected " + std::to_string(nb) + " coefficients (one per basis function)");
      for (Index k = 0; k < nb; ++k) q(static_cast<Index>(i), k) = row[k];
    }
    mol.orbitals = std::move(q);
  }
  return mol;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Molecule load_molecule(const std::string& path) { return parse_molecule(read_text_file(path)); }

// Occupied orbitals when none are given: the first n_orb rows of the identity.
inline Matrix default_orbitals(Index n_basis, Index n_orb = 1) {
  return Matrix::Identity(std::min(n_orb, n_basis), n_basis);
}

// %.17g round-trips doubles exactly through strtod.
inline void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) std::fprintf(f, j ? ",%.17g" : "%.17g", m(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = std::min(line.find(',', pos), line.size());
      r.push_back(std::strtod(line.substr(pos, next - pos).c_str(), nullptr));
      pos = next + 1;
    }
    if (!rows.empty() && r.size() != rows.front().size()) throw DimensionError(path + ": ragged CSV");
    rows.push_back(std::move(r));
  }
  Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

// "LTEI", u32 rows, u32 cols, f64 row-major, all little endian.
inline void save_matrix_binary(const std::string& path, const Matrix& m) {
  static_assert(std::endian::native == std::endian::little, "binary matrix I/O assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  out.write("LTEI", 4);
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

inline Matrix load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  std::uint32_t dims[2];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "LTEI") throw SchemaError(path, "bad magic");
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dims[0], dims[1]);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!in) throw SchemaError(path, "truncated data");
  return rm;
}

// One "x y z" per line; blank lines and lines starting with '#' are skipped.
inline void save_points(const std::string& path, const Points& pts) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const auto& p : pts) std::fprintf(f, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
  std::fclose(f);
}

inline Points load_points(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Points pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p[0] >> p[1] >> p[2])) throw SchemaError(path + ":" + std::to_string(lineno), "expected three numbers");
    pts.push_back(p);
  }
  return pts;
}

struct ReportRow {
  std::string method;
  double omega = 0.0;
  int n_cheb_per_dim = 0;
  int n_q1 = 0;
  double rel_err = 0.0;
  double wall_ms = 0.0;
  std::size_t bytes = 0;
};

inline const char* report_header() { return "method,omega,N_cheb_per_dim,N_q1,rel_err,wall_ms,bytes"; }

inline void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  std::fprintf(f, "%s\n", report_header());
  for (const auto& r : rows)
    std::fprintf(f, "%s,%.17g,%d,%d,%.17g,%.17g,%zu\n", r.method.c_str(), r.omega, r.n_cheb_per_dim, r.n_q1, r.rel_err,
                 r.wall_ms, r.bytes);
  std::fclose(f);
}

inline std::vector<ReportRow> read_report_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  if (line != report_header()) throw SchemaError(path, "unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != 7) throw SchemaError(path, "expected 7 columns");
    rows.push_back({c[0], std::strtod(c[1].c_str(), nullptr), std::stoi(c[2]), std::stoi(c[3]),
                    std::strtod(c[4].c_str(), nullptr), std::strtod(c[5].c_str(), nullptr),
                    static_cast<std::size_t>(std::stoull(c[6]))});
  }
  return rows;
}

inline const char* compression_header() { return "method,eps,rank,bytes,rate,matvec_err"; }

inline void write_compression_csv(const std::string& path, const std::vector<CompressionRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  std::fprintf(f, "%s\n", compression_header());
  for (const auto& r : rows)
    std::fprintf(f, "%s,%.17g,%ld,%zu,%.17g,%.17g\n", r.method.c_str(), r.eps, static_cast<long>(r.rank), r.bytes, r.rate,
                 r.matvec_error);
  std::fclose(f);
}

inline std::vector<CompressionRow> read_compression_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  if (line != compression_header()) throw SchemaError(path, "unexpected header");
  std::vector<CompressionRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != 6) throw SchemaError(path, "expected 6 columns");
    rows.push_back({c[0], std::strtod(c[1].c_str(), nullptr), static_cast<Index>(std::stol(c[2])),
                    static_cast<std::size_t>(std::stoull(c[3])), std::strtod(c[4].c_str(), nullptr),
                    std::strtod(c[5].c_str(), nullptr)});
  }
  return rows;
}

}  // namespace ltei
