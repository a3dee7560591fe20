#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>

#include "test_util.hpp"

using namespace ltei;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("ltei_test_" + name); }

std::string schema_path(const std::string& json) {
  try {
    parse_molecule(json);
  } catch (const SchemaError& e) {
    return e.path;
  }
  return "<no error>";
}

bool bit_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

int run(const std::string& args) { return std::system((std::string(LTEI_CLI) + " " + args).c_str()); }

Matrix awkward_matrix() {
  std::mt19937 rng(80);
  Matrix m = ltei::test::random_matrix(rng, 5, 4);
  m(0, 0) = -0.0;
  m(1, 0) = std::numeric_limits<double>::denorm_min();
  m(2, 0) = std::numeric_limits<double>::max();
  m(3, 0) = 1.0 / 3.0;
  m(4, 0) = -1e-300;
  return m;
}

}  // namespace

TEST(MoleculeSchema, ParsesShellForms) {
  const Molecule m = parse_molecule(R"({"atoms": [{"element": "C", "coords": [0, 0, 1],
      "shells": [{"l": 2, "exponents": [1.0], "coefficients": [1.0]},
                 {"powers": [[0, 0, 0], [1, 1, 0]], "exponents": [0.5, 2.0], "coefficients": [0.3, 0.4]}]}]})");
  ASSERT_EQ(m.atoms.size(), 1u);
  EXPECT_EQ(m.atoms[0].shells[0].powers.size(), 6u);
  EXPECT_EQ(build_basis(m).size(), 8u);
  EXPECT_FALSE(m.orbitals.has_value());
  EXPECT_EQ(cartesian_powers(1), (std::vector<Powers>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(MoleculeSchema, FieldPathsInErrors) {
  EXPECT_EQ(schema_path("{"), "$");
  EXPECT_EQ(schema_path("{}"), "$.atoms");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, "x", 0], "shells": []}]})"), "atoms[0].coords[1]");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0], "shells": []}]})"), "atoms[0].coords");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0, 0],
      "shells": [{"l": 0, "exponents": [], "coefficients": []}]}]})"),
            "atoms[0].shells[0].exponents");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0, 0],
      "shells": [{"l": 0, "exponents": [1.0, 2.0], "coefficients": [1.0]}]}]})"),
            "atoms[0].shells[0].coefficients");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0, 0],
      "shells": [{"exponents": [1.0], "coefficients": [1.0]}]}]})"),
            "atoms[0].shells[0].l");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0, 0],
      "shells": [{"l": 0, "exponents": [1.0], "coefficients": [1.0]}]}], "orbitals": [[1.0, 2.0]]})"),
            "orbitals[0]");
  EXPECT_EQ(schema_path(R"({"atoms": [{"element": "H", "coords": [0, 0, 0],
      "shells": [{"l": -1, "exponents": [1.0], "coefficients": [1.0]}]}]})"),
            "atoms[0].shells[0].l");
}

TEST(MoleculeSchema, ToyCorpusLoads) {
  for (const char* name : {"h1.json", "h2.json", "heh.json", "triangle.json", "spread.json", "glycine_like.json"}) {
    const Molecule m = load_molecule(ltei::test::data_path(name));
    EXPECT_FALSE(m.atoms.empty()) << name;
  }
  EXPECT_THROW(load_molecule(ltei::test::data_path("malformed.json")), SchemaError);
}

TEST(MatrixFiles, RoundTripsAreBitIdentical) {
  const Matrix m = awkward_matrix();
  const auto csv = temp_file("m.csv"), bin = temp_file("m.bin");
  save_matrix_csv(csv.string(), m);
  save_matrix_binary(bin.string(), m);
  EXPECT_TRUE(bit_identical(load_matrix_csv(csv.string()), m));
  EXPECT_TRUE(bit_identical(load_matrix_binary(bin.string()), m));
  EXPECT_EQ(fs::file_size(bin), 12u + 20u * 8u);
  fs::remove(csv);
  fs::remove(bin);
}

TEST(MatrixFiles, BinaryRejectsBadMagic) {
  const auto p = temp_file("bad.bin");
  { std::ofstream(p) << "NOPE12345678"; }
  EXPECT_THROW(load_matrix_binary(p.string()), SchemaError);
  fs::remove(p);
}

TEST(PointsFile, RoundTrip) {
  const Points pts = chebyshev_grid(3, 1.7);
  const auto p = temp_file("pts.txt");
  save_points(p.string(), pts);
  const Points back = load_points(p.string());
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(back[i], pts[i]);
  fs::remove(p);
}

TEST(ReportCsv, RoundTripAndHeader) {
  const std::vector<ReportRow> rows{{"ta", 0.5, 16, 24, 1.0 / 7.0, 12.25, 4096}, {"fmm", 0.1, 20, 0, 3e-9, 0.5, 1}};
  const auto p = temp_file("report.csv");
  write_report_csv(p.string(), rows);
  EXPECT_EQ(read_text_file(p.string()).substr(0, std::strlen(report_header())), report_header());
  const auto back = read_report_csv(p.string());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].method, rows[k].method);
    EXPECT_EQ(back[k].omega, rows[k].omega);
    EXPECT_EQ(back[k].n_cheb_per_dim, rows[k].n_cheb_per_dim);
    EXPECT_EQ(back[k].n_q1, rows[k].n_q1);
    EXPECT_EQ(back[k].rel_err, rows[k].rel_err);
    EXPECT_EQ(back[k].wall_ms, rows[k].wall_ms);
    EXPECT_EQ(back[k].bytes, rows[k].bytes);
  }
  fs::remove(p);
}

TEST(Cli, MalformedInputExitsNonZero) {
  EXPECT_NE(run("coulomb -m " + ltei::test::data_path("malformed.json") + " > /dev/null 2>&1"), 0);
}

TEST(Cli, DeterministicCoulombOutput) {
  const auto a = temp_file("j1.bin"), b = temp_file("j2.bin");
  const std::string args = "coulomb -m " + ltei::test::data_path("heh.json") + " --threads 1 -o ";
  ASSERT_EQ(run(args + a.string()), 0);
  ASSERT_EQ(run(args + b.string()), 0);
  EXPECT_TRUE(bit_identical(load_matrix_binary(a.string()), load_matrix_binary(b.string())));
  fs::remove(a);
  fs::remove(b);
}

TEST(Cli, CompareTaAndFmmAgree) {
  const auto p = temp_file("compare.csv");
  ASSERT_EQ(run("compare -m " + ltei::test::data_path("heh.json") + " --fmm-grid 16 -o " + p.string()), 0);
  const auto rows = read_report_csv(p.string());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].method, "oracle");
  EXPECT_LT(rows[1].rel_err, 1e-6);  // ta, target 1e-6
  EXPECT_LT(rows[2].rel_err, 1e-5);  // fmm
  EXPECT_LT(std::abs(rows[1].rel_err - rows[2].rel_err), 1e-6 + 1e-5);
  fs::remove(p);
}
