// Builds J for a toy molecule three ways and prints the differences.
//   coulomb_demo [molecule.json] [omega]

#include <chrono>
#include <cstdio>
#include <string>

#include "ltei/ltei.hpp"

using namespace ltei;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(LTEI_DATA_DIR) + "/heh.json";
  const double omega = argc > 2 ? std::stod(argv[2]) : 0.5;

  Molecule mol = load_molecule(path);
  recenter(mol);
  const Basis basis = build_basis(mol);
  const PairTable t(static_cast<int>(basis.size()));
  const auto pairs = all_pair_products(basis, t, 0.0);
  const double b = box_for_pairs(pairs, 1e-10);
  const Matrix q = mol.orbitals ? *mol.orbitals : default_orbitals(static_cast<Index>(basis.size()));
  std::printf("%s: %zu basis functions, %d pairs, box half-width %.3f\n", mol.name.c_str(), basis.size(), t.size(), b);

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const Matrix j_ref = coulomb_direct(full_from_reduced(t, reference_dense_tei(pairs, omega, b)), q);
  const double ms_ref = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  t0 = clock::now();
  TAOptions opt;
  opt.omega = omega;
  opt.target_tol = 1e-6;
  opt.box = b;
  const TAFactorization plan = build_ta_plan(opt);
  const Matrix m = build_m_ta(all_pair_moments(pairs, plan), plan.n_cheb());
  const Matrix j_ta = coulomb_ta(plan, t, m, q);
  const double ms_ta = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  t0 = clock::now();
  const int n = 20;
  const Points grid = chebyshev_grid(n, b);
  const FMMPlan fmm(grid, grid, omega);
  const Matrix j_fmm = coulomb_fmm(build_z_matrix(pairs, n, b), fmm, t, q);
  const double ms_fmm = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  std::printf("oracle  %8.1f ms\n", ms_ref);
  std::printf("ta      %8.1f ms  N=%d  N_q1=%d  rel diff %.2e\n", ms_ta, plan.n_cheb(), plan.n_nodes(),
              (j_ta - j_ref).norm() / j_ref.norm());
  std::printf("fmm     %8.1f ms  grid %d^3  rel diff %.2e\n", ms_fmm, n, (j_fmm - j_ref).norm() / j_ref.norm());
  return 0;
}
