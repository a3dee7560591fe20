// Command-line front end: single integrals, Coulomb/exchange matrices,
// cross-method comparison and convergence sweeps.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "ltei/ltei.hpp"

using namespace ltei;

namespace {

struct Config {
  std::string molecule;
  double omega = 0.5;
  double tol = 1e-6;
  double tau_support = 1e-10;
  double tau_screening = 0.0;
  double box = 0.0;  // 0: derived from supports
  std::string box_mode = "fixed";
  int partitions = 2;
  int n_q1 = 0;
  int n_q2 = 64;
  int order = 0;
  int fmm_order = 6;
  int fmm_grid = 24;
  double fmm_eta = 1.5;
  double eps_svd = 1e-8;
  int threads = 0;
  bool no_recenter = false;
  std::string method = "ta";
  std::string out;
};

struct System {
  Molecule mol;
  Basis basis;
  PairTable table;
  std::vector<PairProduct> pairs;
  double box = 0.0;
  Matrix q;
};

System load_system(const Config& c) {
  System s;
  s.mol = load_molecule(c.molecule);
  if (!c.no_recenter) recenter(s.mol);
  s.basis = build_basis(s.mol);
  s.table = PairTable(static_cast<int>(s.basis.size()));
  s.pairs = all_pair_products(s.basis, s.table, c.tau_screening);
  s.box = c.box > 0.0 ? c.box : box_for_pairs(s.pairs, c.tau_support);
  s.q = s.mol.orbitals ? *s.mol.orbitals : default_orbitals(static_cast<Index>(s.basis.size()));
  return s;
}

TAOptions ta_options(const Config& c, double box) {
  TAOptions o;
  o.omega = c.omega;
  o.target_tol = c.tol;
  o.box = box;
  o.n_q2 = c.n_q2;
  if (c.n_q1 > 0) o.n_q1 = c.n_q1;
  if (c.order > 0) o.fixed_order = c.order;
  return o;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void write_matrix(const std::string& path, const Matrix& m) {
  if (path.empty()) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) std::printf(j ? " %.12e" : "%.12e", m(i, j));
      std::printf("\n");
    }
  } else if (path.size() > 4 && path.substr(path.size() - 4) == ".bin") {
    save_matrix_binary(path, m);
  } else {
    save_matrix_csv(path, m);
  }
}

struct CoulombRun {
  Matrix j;
  std::size_t bytes = 0;
  int n_cheb = 0;
  int n_q1 = 0;
};

CoulombRun coulomb_with(const std::string& method, const Config& c, const System& s) {
  CoulombRun r;
  if (method == "oracle") {
    r.j = coulomb_direct(full_from_reduced(s.table, reference_dense_tei(s.pairs, c.omega, s.box)), s.q);
    r.bytes = static_cast<std::size_t>(s.table.size()) * s.table.size() * sizeof(double);
    return r;
  }
  if (method == "fmm") {
    const Points grid = chebyshev_grid(c.fmm_grid, s.box);
    FMMOptions fo;
    fo.order = c.fmm_order;
    fo.eta = c.fmm_eta;
    const FMMPlan plan(grid, grid, c.omega, fo);
    const Matrix z = build_z_matrix(s.pairs, c.fmm_grid, s.box, c.n_q2);
    r.j = coulomb_fmm(z, plan, s.table, s.q);
    r.bytes = static_cast<std::size_t>(z.size()) * sizeof(double);
    r.n_cheb = c.fmm_grid;
    return r;
  }
  if (method == "ta" && c.box_mode == "adaptive") {
    AdaptiveOptions ao;
    ao.omega = c.omega;
    ao.target_tol = c.tol;
    ao.tau = c.tau_support;
    ao.n_partitions = c.partitions;
    ao.tau_screening = c.tau_screening;
    if (c.n_q1 > 0) ao.n_q1 = c.n_q1;
    if (c.order > 0) ao.fixed_order = c.order;
    const AdaptiveResult a = coulomb_adaptive(s.basis, s.q, ao);
    r.j = a.j;
    r.n_cheb = *std::max_element(a.orders.begin(), a.orders.end());
    return r;
  }
  const TAFactorization plan = build_ta_plan(ta_options(c, s.box));
  const auto moments = all_pair_moments(s.pairs, plan);
  r.n_cheb = plan.n_cheb();
  r.n_q1 = plan.n_nodes();
  if (method == "ta") {
    const Matrix m = build_m_ta(moments, plan.n_cheb());
    r.j = coulomb_ta(plan, s.table, m, s.q);
    r.bytes = static_cast<std::size_t>(m.size()) * sizeof(double);
  } else if (method == "compressed") {
    const KRCompressed kr = compress_kr(plan, moments, c.eps_svd);
    r.j = coulomb_compressed(kr, s.table, s.q);
    r.bytes = kr.bytes();
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  return r;
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("-m,--molecule", c.molecule, "molecule JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("-w,--omega", c.omega, "range-separation parameter")->check(CLI::NonNegativeNumber);
  sub->add_option("-t,--tol", c.tol, "target relative tolerance")->check(CLI::Range(1e-15, 1.0));
  sub->add_option("--tau-support", c.tau_support, "threshold defining pair supports");
  sub->add_option("--tau-screening", c.tau_screening, "primitive-pair screening threshold");
  sub->add_option("--box", c.box, "fixed box half-width (default: from supports)");
  sub->add_option("--box-mode", c.box_mode, "fixed or adaptive")->check(CLI::IsMember({"fixed", "adaptive"}));
  sub->add_option("--partitions", c.partitions, "support clusters in adaptive mode");
  sub->add_option("--nq1", c.n_q1, "s-quadrature points (default: calibrated)");
  sub->add_option("--nq2", c.n_q2, "Gauss-Legendre points per moment panel");
  sub->add_option("--order", c.order, "fixed Chebyshev order per dimension (default: adaptive)");
  sub->add_option("--fmm-order", c.fmm_order, "FMM Chebyshev points per cell and dimension");
  sub->add_option("--fmm-grid", c.fmm_grid, "interpolation points per dimension for the FMM route");
  sub->add_option("--fmm-eta", c.fmm_eta, "FMM admissibility parameter");
  sub->add_option("--eps-svd", c.eps_svd, "truncation tolerance for the compressed method");
  sub->add_option("--threads", c.threads, "OpenMP threads (0: runtime default)");
  sub->add_flag("--no-recenter", c.no_recenter, "keep input coordinates");
}

int cmd_integral(const Config& c, const std::vector<int>& idx) {
  const System s = load_system(c);
  const int nb = static_cast<int>(s.basis.size());
  for (int i : idx)
    if (i < 1 || i > nb) throw DimensionError("basis index " + std::to_string(i) + " outside 1.." + std::to_string(nb));
  const int p = s.table.index(idx[0] - 1, idx[1] - 1), q = s.table.index(idx[2] - 1, idx[3] - 1);
  double v;
  if (c.method == "oracle") {
    v = reference_dense_tei({s.pairs[p], s.pairs[q]}, c.omega, s.box)(0, 1);
  } else if (c.method == "fmm") {
    const Points grid = chebyshev_grid(c.fmm_grid, s.box);
    const Matrix z = build_z_matrix({s.pairs[p], s.pairs[q]}, c.fmm_grid, s.box, c.n_q2);
    FMMOptions fo;
    fo.order = c.fmm_order;
    fo.eta = c.fmm_eta;
    const FMMPlan plan(grid, grid, c.omega, fo);
    v = z.row(0).dot(plan.apply(z.row(1).transpose()));
  } else {
    const TAFactorization plan = build_ta_plan(ta_options(c, s.box));
    v = element_integral(plan, pair_moments(s.pairs[p], s.box, plan.n_cheb(), c.n_q2),
                         pair_moments(s.pairs[q], s.box, plan.n_cheb(), c.n_q2));
  }
  std::printf("%.15e\n", v);
  return 0;
}

int cmd_coulomb(const Config& c) {
  const System s = load_system(c);
  write_matrix(c.out, coulomb_with(c.method, c, s).j);
  return 0;
}

int cmd_exchange(const Config& c) {
  const System s = load_system(c);
  Matrix k;
  if (c.method == "oracle") {
    k = exchange_direct(full_from_reduced(s.table, reference_dense_tei(s.pairs, c.omega, s.box)), s.q);
  } else if (c.method == "ta") {
    const TAFactorization plan = build_ta_plan(ta_options(c, s.box));
    k = exchange_ta(plan, s.table, build_m_ta(all_pair_moments(s.pairs, plan), plan.n_cheb()), s.q);
  } else {
    throw std::invalid_argument("exchange supports --method ta or oracle");
  }
  write_matrix(c.out, k);
  return 0;
}

int cmd_compare(const Config& c) {
  const System s = load_system(c);
  std::vector<ReportRow> rows;
  Matrix ref;
  for (const std::string method : {"oracle", "ta", "fmm"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const CoulombRun r = coulomb_with(method, c, s);
    const double ms = elapsed_ms(t0);
    if (method == "oracle") ref = r.j;
    rows.push_back({method, c.omega, r.n_cheb, r.n_q1, (r.j - ref).norm() / ref.norm(), ms, r.bytes});
  }
  if (c.out.empty()) {
    std::printf("%s\n", report_header());
    for (const auto& r : rows)
      std::printf("%s,%g,%d,%d,%.3e,%.1f,%zu\n", r.method.c_str(), r.omega, r.n_cheb_per_dim, r.n_q1, r.rel_err,
                  r.wall_ms, r.bytes);
  } else {
    write_report_csv(c.out, rows);
  }
  return 0;
}

// Mean relative element error over random quadruples, per (omega, N, N_q1).
int cmd_bench(Config c, const std::vector<double>& omegas, const std::vector<int>& orders,
              const std::vector<int>& nq1s, int samples, const std::string& compression_out) {
  const System s = load_system(c);
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> pick(0, s.table.size() - 1);
  std::vector<std::array<int, 2>> quads(samples);
  for (auto& qd : quads) qd = {pick(rng), pick(rng)};

  std::vector<ReportRow> rows;
  for (double w : omegas) {
    c.omega = w;
    const Matrix ref = reference_dense_tei(s.pairs, w, s.box);
    for (int n : orders)
      for (int nq1 : nq1s) {
        c.order = n;
        c.n_q1 = nq1;
        const auto t0 = std::chrono::steady_clock::now();
        const TAFactorization plan = build_ta_plan(ta_options(c, s.box));
        const auto mom = all_pair_moments(s.pairs, plan);
        double err = 0.0;
        for (const auto& qd : quads) {
          const double v = element_integral(plan, mom[qd[0]], mom[qd[1]]);
          err += std::abs(v - ref(qd[0], qd[1])) / std::abs(ref(qd[0], qd[1]));
        }
        const double ms = elapsed_ms(t0);
        const std::size_t bytes = static_cast<std::size_t>(s.table.size()) * n * n * n * sizeof(double);
        rows.push_back({"ta", w, n, nq1, err / samples, ms, bytes});
        std::fprintf(stderr, "omega=%g N=%d Nq1=%d err=%.3e\n", w, n, nq1, err / samples);
      }
  }
  write_report_csv(c.out.empty() ? "bench.csv" : c.out, rows);

  if (!compression_out.empty()) {
    c.order = 0;
    c.n_q1 = 0;
    c.omega = omegas.front();
    const TAFactorization plan = build_ta_plan(ta_options(c, s.box));
    const auto mom = all_pair_moments(s.pairs, plan);
    const Matrix m = build_m_ta(mom, plan.n_cheb());
    const Matrix rhs = orbital_pair_matrix(s.q).transpose();
    const auto crows = compression_report(plan, s.table, mom, m, {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}, rhs);
    write_compression_csv(compression_out, crows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-range two-electron integrals via tensor approximation and FMM"};
  app.require_subcommand(1);
  Config c;

  std::vector<int> idx;
  auto* integral = app.add_subcommand("integral", "print one element (mu nu | kappa lambda), 1-based");
  add_common(integral, c);
  integral->add_option("indices", idx, "mu nu kappa lambda")->required()->expected(4);
  integral->add_option("--method", c.method)->check(CLI::IsMember({"ta", "fmm", "oracle"}));

  auto* coulomb = app.add_subcommand("coulomb", "Coulomb matrix J");
  add_common(coulomb, c);
  coulomb->add_option("--method", c.method)->check(CLI::IsMember({"ta", "fmm", "oracle", "compressed"}));
  coulomb->add_option("-o,--out", c.out, "output (.csv or .bin; stdout if empty)");

  auto* exchange = app.add_subcommand("exchange", "exchange matrix K");
  add_common(exchange, c);
  exchange->add_option("--method", c.method)->check(CLI::IsMember({"ta", "oracle"}));
  exchange->add_option("-o,--out", c.out, "output (.csv or .bin; stdout if empty)");

  auto* compare = app.add_subcommand("compare", "J from oracle, TA and FMM with errors and timings");
  add_common(compare, c);
  compare->add_option("-o,--out", c.out, "report CSV (stdout if empty)");

  std::vector<double> omegas{0.5};
  std::vector<int> orders{4, 8, 12, 16, 20};
  std::vector<int> nq1s{24};
  int samples = 100;
  std::string compression_out;
  auto* bench = app.add_subcommand("bench", "element error sweep over omega, N and N_q1");
  add_common(bench, c);
  bench->add_option("--omegas", omegas, "omega values to sweep")->expected(1, -1);
  bench->add_option("--orders", orders, "Chebyshev points per dimension to sweep")->expected(1, -1);
  bench->add_option("--nq1s", nq1s, "s-quadrature sizes to sweep")->expected(1, -1);
  bench->add_option("--samples", samples, "random quadruples per setting");
  bench->add_option("-o,--out", c.out, "report CSV (default bench.csv)");
  bench->add_option("--compression-out", compression_out, "also write a compression report CSV");

  CLI11_PARSE(app, argc, argv);
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
  try {
    if (*integral) return cmd_integral(c, idx);
    if (*coulomb) return cmd_coulomb(c);
    if (*exchange) return cmd_exchange(c);
    if (*compare) return cmd_compare(c);
    if (*bench) return cmd_bench(c, omegas, orders, nq1s, samples, compression_out);
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error at %s\n", e.what());
    return 2;
  } catch (const MemoryBudgetError& e) {
    std::fprintf(stderr, "memory budget exceeded: %s\n", e.what());
    return 3;
  } catch (const ToleranceError& e) {
    std::fprintf(stderr, "tolerance unreachable: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
