#include "msuq/msfem.hpp"
#include "msuq/pod.hpp"
#include "msuq/sampling.hpp"
#include "msuq/uq.hpp"
#include "specsolve/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace msuq;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
}

void info(int id, const std::string& detail) {
  std::printf("[INFO] criterion %d: %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string num(double x) { return specsolve::format_double(x); }

std::string list(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", xs[i]);
    out += (i ? ", " : "") + std::string(buf);
  }
  return out + "]";
}

bool within(const std::vector<double>& xs, double lo, double hi) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x >= lo && x <= hi; });
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
  double at(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(col(name))); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  for (std::string cell; std::getline(is, cell, ',');) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Csv read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Csv csv;
  std::string line;
  std::getline(in, line);
  csv.header = split(line);
  while (std::getline(in, line)) csv.rows.push_back(split(line));
  return csv;
}

fs::path workdir() {
  static const fs::path dir = fs::temp_directory_path() / "specsolve_acceptance";
  return dir;
}

fs::path run_config(const std::string& file, specsolve::Study study, const std::string& name) {
  auto cfg = specsolve::load_config(fs::path(SPECSOLVE_CONFIG_DIR) / file, study);
  cfg.out_dir = workdir() / name;
  cfg.emit.fields = false;
  cfg.emit.pod_modes = false;
  fs::remove_all(cfg.out_dir);
  specsolve::run_study(cfg);
  return cfg.out_dir;
}

// Per-k error columns of eigenvalues.csv, keyed by N_H.
std::map<double, double> column_by_level(const Csv& csv, int k, const std::string& name) {
  std::map<double, double> out;
  for (std::size_t r = 0; r < csv.rows.size(); ++r)
    if (std::stoi(csv.rows[r][csv.col("k")]) == k) out[csv.at(r, "N_H")] = csv.at(r, name);
  return out;
}

double fit_levels(const std::map<double, double>& errors, double min_level) {
  std::vector<double> res, err;
  for (const auto& [level, e] : errors)
    if (level >= min_level) {
      res.push_back(level);
      err.push_back(e);
    }
  return fit_order(res, err);
}

UqConfig rational_potential(Index fine, Index coarse, std::size_t s) {
  UqConfig cfg;
  cfg.potential.v0 = BasePotential::constant_value(1.0);
  cfg.potential.form = ModeForm::rational_1d;
  cfg.potential.s = s;
  cfg.potential.sigma = 1.0;
  cfg.potential.q = 0.0;
  cfg.mesh.dim = 1;
  cfg.mesh.domain = Box{{-1.0, 0.0}, {1.0, 0.0}};
  cfg.mesh.fine = {fine, 1};
  cfg.mesh.coarse = {coarse, 1};
  cfg.admissibility_cap = 1e9;
  return cfg;
}

// ---------------------------------------------------------------------------

void criteria_1_2() {
  const auto dir = run_config("double_well_evp.json", specsolve::Study::solve_evp, "double_well");
  const auto csv = read_csv(dir / "eigenvalues.csv");

  const auto lambda = column_by_level(csv, 1, "lambda_fem");
  const double ref = lambda.begin()->second;
  const double ref_err = std::abs(ref - 2.762420126423838);
  const auto err = column_by_level(csv, 1, "abs_error");
  const std::map<double, double> table{{16, 4.9166e-04}, {32, 4.2144e-06}, {64, 4.7839e-08}, {128, 6.8088e-10}};
  std::vector<double> ratios;
  for (const auto& [level, t] : table) ratios.push_back(err.at(level) / t);
  const double order = fit_levels(err, 16);
  const bool ok = ref_err <= 1e-9 && within(ratios, 0.5, 2.0) && order >= -7.0 && order <= -6.0;
  report(1, ok, "double-well reference errors, N_H 16..128",
         "lambda_1 = " + num(ref) + " (|diff| " + num(ref_err) + " <= 1e-9), error/table ratios " + list(ratios) +
             " in [0.5, 2], order " + num(order) + " in [-7, -6]");

  std::vector<double> l2, h1, l2_all, h1_all;
  for (int k = 1; k <= 5; ++k) {
    l2.push_back(fit_levels(column_by_level(csv, k, "l2_error"), 16));
    h1.push_back(fit_levels(column_by_level(csv, k, "h1_error"), 16));
    l2_all.push_back(fit_levels(column_by_level(csv, k, "l2_error"), 0));
    h1_all.push_back(fit_levels(column_by_level(csv, k, "h1_error"), 0));
  }
  report(2, within(l2, -4.6, -3.6) && within(h1, -3.4, -2.6), "eigenfunction orders k = 1..5, N_H 16..128",
         "L2 " + list(l2) + " in [-4.6, -3.6], H1 " + list(h1) + " in [-3.4, -2.6]");
  info(2, "fit including N_H = 8: L2 " + list(l2_all) + ", H1 " + list(h1_all));
}

void criterion_3() {
  const std::vector<double> levels{8, 16, 32, 64, 128};
  double worst = 0.0;
  std::vector<double> fits;
  for (double p : {-6.0, -4.0, -3.0}) {
    std::vector<double> e;
    for (double n : levels) e.push_back(3.7 * std::pow(n, p));
    const double f = fit_order(levels, e, 0.0);
    fits.push_back(f);
    worst = std::max(worst, std::abs(f - p));
  }
  report(3, worst <= 1e-12, "order fit on exact powers", "fits " + list(fits) + ", max |fit - p| = " + num(worst) + " <= 1e-12");
}

void criterion_4() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> qd(2, 64), nd(16, 256);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index q = qd(rng), nh = nd(rng);
    auto space = build_space(1, Box{{0.0, 0.0}, {1.0, 0.0}}, {nh, 1});
    const auto m = assemble_mass(space).matrix;
    Matrix u(nh, q);
    for (Index j = 0; j < q; ++j)
      for (Index i = 0; i < nh; ++i) u(i, j) = g(rng) / (1.0 + 0.2 * static_cast<double>(j));
    const auto dec = pod_decompose(u, m);
    double total = 0.0;
    for (Index j = 0; j < q; ++j) total += u.col(j).dot(m * u.col(j));
    const double sigma_total = dec.sigma.sum();
    for (Index l = 0; l < dec.rank(); ++l) {
      const Matrix coef = dec.modes.leftCols(l).transpose() * (m * u);
      const Matrix r = u - dec.modes.leftCols(l) * coef;
      double err = 0.0;
      for (Index j = 0; j < q; ++j) err += r.col(j).dot(m * r.col(j));
      const double lhs = err / total, rhs = dec.sigma.tail(q - l).sum() / sigma_total;
      worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
  }
  report(4, worst <= 1e-10, "projection-error ratio = sigma-tail ratio, 50 sets",
         "max relative deviation " + num(worst) + " <= 1e-10");
}

void criterion_5() {
  const auto dir = run_config("n_study.json", specsolve::Study::n_study, "n_study");
  std::ifstream in(dir / "slopes.json");
  const auto doc = nlohmann::json::parse(in);
  const double qmc = doc.at("slopes").at("qmc").at(0).get<double>();
  const double mc = doc.at("slopes").at("mc").at(0).get<double>();
  report(5, qmc <= -0.8 && mc >= -0.65 && mc <= -0.35, "qMC vs MC RMS slopes, N 127..1009, R = 8",
         "qMC slope " + num(qmc) + " <= -0.8, MC slope " + num(mc) + " in [-0.65, -0.35]");
}

void criterion_6() {
  const auto dir = run_config("s_study.json", specsolve::Study::s_study, "s_study");
  const auto csv = read_csv(dir / "s_study.csv");
  std::vector<double> e;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) e.push_back(csv.at(r, "abs_error"));
  const double floor = 1e-7;
  bool monotone = true;
  for (std::size_t i = 1; i < e.size(); ++i) monotone = monotone && (e[i] < e[i - 1] || e[i] <= floor);
  const bool ok = monotone && !e.empty() && e.back() < floor;
  report(6, ok, "s-truncation decay, q = 3, N_H = 64, s = 2..16",
         "errors " + list(e) + " decreasing until saturation, floor " + num(e.empty() ? NAN : e.back()) + " < 1e-7");
}

void criterion_7() {
  {
    auto cfg = rational_potential(256, 16, 16);
    cfg.k = 2;
    cfg.sampler.kind = SamplerKind::qmc;
    cfg.sampler.n = 61;
    cfg.sampler.shifts = 1;
    cfg.sampler.seed = 4;
    cfg.offline.sampler = SamplerKind::online;
    cfg.offline.q = 61;
    cfg.offline.m.reset();
    cfg.offline.rho = 0.0;
    cfg.solver = SolverKind::msfem;
    const auto a1 = run_algorithm1(cfg);
    cfg.solver = SolverKind::msfem_pod;
    const auto a2 = run_algorithm2(cfg);
    const double diff = (a1.mean - a2.mean).cwiseAbs().maxCoeff();
    report(7, diff <= 1e-8, "(a) MsFEM-POD with Q = N, rho = 0 equals MsFEM",
           "max |E[lambda_pod] - E[lambda_ms]| = " + num(diff) + " <= 1e-8");
  }
  {
    auto cfg = rational_potential(2048, 32, 64);
    cfg.k = 1;
    cfg.sampler.kind = SamplerKind::qmc;
    cfg.sampler.n = next_prime(500);
    cfg.sampler.shifts = 1;
    cfg.sampler.seed = 1;
    cfg.offline.sampler = SamplerKind::qmc;
    cfg.offline.q = 200;
    cfg.offline.m = 3;
    cfg.offline.seed = 7;
    cfg.solver = SolverKind::msfem_pod;
    const auto pod = run_algorithm2(cfg);
    cfg.solver = SolverKind::fem;
    const auto fem = run_fem_reference(cfg);
    const double diff = std::abs(pod.mean[0] - fem.mean[0]);
    report(7, diff <= 5e-3, "(b) rational potential, m = 3, Q = 200, N = " + std::to_string(cfg.sampler.n),
           "|E[lambda_pod] - E[lambda_fem]| = " + num(diff) + " <= 5e-3 (E_fem " + num(fem.mean[0]) + ")");
  }
}

// Golub-Welsch nodes and weights on [-1/2, 1/2].
std::pair<Vector, Vector> gauss_legendre(Index n) {
  Matrix j = Matrix::Zero(n, n);
  for (Index i = 1; i < n; ++i) {
    const double b = static_cast<double>(i) / std::sqrt(4.0 * static_cast<double>(i * i) - 1.0);
    j(i, i - 1) = j(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  Vector x = 0.5 * es.eigenvalues();
  Vector w = es.eigenvectors().row(0).transpose().cwiseAbs2();
  return {x, w};
}

void criterion_8() {
  {
    RandomPotentialSpec spec;
    spec.v0 = BasePotential::constant_value(2.0);
    spec.form = ModeForm::rational_1d;
    spec.s = 3;
    spec.q = 1.0;
    const Box box{{0.0, 0.0}, {1.0, 0.0}};
    auto coarse = build_space(1, box, {4, 1});
    auto fine = build_space(1, box, {16, 1});
    auto map = nest(coarse, fine);
    const auto a = constraint_cross(fine, coarse, map).matrix;
    const auto alpha = hat_integrals(coarse);
    const auto op = affine_operator(spec, fine, 0.7);
    const std::vector<double> omega{0.3, -0.45, 0.2};
    const SparseMatrix g = op.materialize(omega);
    const auto basis = build_basis(g, a, alpha);
    const Index nh = 16, nc = 4;
    Matrix kkt = Matrix::Zero(nh + nc, nh + nc);
    kkt.topLeftCorner(nh, nh) = Matrix(g);
    kkt.topRightCorner(nh, nc) = Matrix(a).transpose();
    kkt.bottomLeftCorner(nc, nh) = Matrix(a);
    Eigen::FullPivLU<Matrix> lu(kkt);
    double worst = 0.0;
    for (Index i = 0; i < nc; ++i) {
      Vector rhs = Vector::Zero(nh + nc);
      rhs[nh + i] = alpha[i];
      const Vector sol = lu.solve(rhs);
      worst = std::max(worst, (sol.head(nh) - basis.coefficients.col(i)).cwiseAbs().maxCoeff());
    }
    report(8, worst <= 1e-10, "(a) KKT basis vs dense constrained QP, N_H = 4, N_h = 16",
           "max coefficient deviation " + num(worst) + " <= 1e-10");
  }
  {
    auto cfg = rational_potential(64, 8, 2);
    cfg.potential.q = 4.0 / 3.0;
    cfg.k = 1;
    cfg.solver = SolverKind::fem;
    cfg.sampler.kind = SamplerKind::qmc;
    cfg.sampler.n = 8191;
    cfg.sampler.shifts = 4;
    cfg.sampler.seed = 9;
    const auto qmc = run_fem_reference(cfg);
    const auto disc = Discretization::build(cfg, false);
    const auto [x, w] = gauss_legendre(32);
    double oracle = 0.0;
    for (Index i = 0; i < 32; ++i)
      for (Index j = 0; j < 32; ++j) {
        const std::vector<double> omega{x[i], x[j]};
        oracle += w[i] * w[j] * solve_sample(disc, SolverKind::fem, omega, 1).lambda[0];
      }
    const double diff = std::abs(qmc.mean[0] - oracle);
    report(8, diff <= 1e-6, "(b) 2D expectation, qMC N = 8191 x 4 shifts vs 32^2 Gauss-Legendre",
           "|qMC - quadrature| = " + num(diff) + " <= 1e-6 (E = " + num(oracle) + ")");
  }
  {
    const std::uint64_t n = 31;
    const auto weights = product_weights(2);
    const auto cbc = cbc_generating_vector(n, 2, weights);
    std::uint64_t best = 0;
    double best_err = INFINITY;
    for (std::uint64_t z2 = 1; z2 < n; ++z2) {
      const std::vector<std::uint64_t> z{1, z2};
      const double e = shift_averaged_error_squared(n, z, weights);
      if (e < best_err) {
        best_err = e;
        best = z2;
      }
    }
    report(8, cbc.size() == 2 && cbc[0] == 1 && cbc[1] == best, "(c) CBC vs exhaustive search, s = 2, N = 31",
           "CBC z = (" + std::to_string(cbc[0]) + ", " + std::to_string(cbc[1]) + "), exhaustive argmin z_2 = " +
               std::to_string(best));
  }
}

void criterion_9() {
  UqConfig cfg;
  cfg.potential.v0 = BasePotential::constant_value(1.0);
  cfg.potential.form = ModeForm::power_2d;
  cfg.potential.s = 32;
  cfg.potential.sigma = 1.0;
  cfg.potential.q = 0.0;
  cfg.mesh.dim = 2;
  cfg.mesh.domain = Box{{0.0, 0.0}, {1.0, 1.0}};
  cfg.mesh.fine = {40, 40};
  cfg.mesh.coarse = {10, 10};
  cfg.admissibility_cap = 1e9;
  cfg.k = 5;
  cfg.sampler.kind = SamplerKind::mc;
  cfg.sampler.n = 8;
  cfg.sampler.shifts = 1;
  cfg.sampler.seed = 11;
  cfg.keep_samples = true;
  const auto disc = Discretization::build(cfg, true);
  const auto bounds = potential_bounds(cfg.potential, cfg.mesh.domain, 2);
  const SparseMatrix kinetic = 0.5 * cfg.eps * cfg.eps * disc.stiffness;
  // lambda_k(0) from the SPD pencil (kinetic + M, M), shifted back by 1.
  const Vector free = sparse_smallest_gevp(SparseMatrix(kinetic + disc.mass), disc.mass, 5).values.array() - 1.0;
  const double shift = 2.5;

  double sandwich = 0.0, invariance = 0.0, ordering = 0.0;
  const auto sets = sample_sets(cfg.sampler, cfg.potential.s);
  for (const auto& omega : sets.front()) {
    const SparseMatrix g = disc.op.materialize(omega);
    const auto p = sparse_smallest_gevp(g, disc.mass, 5);
    const auto ps = sparse_smallest_gevp(SparseMatrix(g + shift * disc.mass), disc.mass, 5);
    for (Index i = 0; i < 5; ++i) {
      sandwich = std::max({sandwich, free[i] + bounds.v_min - p.values[i], p.values[i] - free[i] - bounds.v_max});
      invariance = std::max(invariance, std::abs(ps.values[i] - p.values[i] - shift) / std::abs(p.values[i] + shift));
    }
    const auto ms = solve_sample(disc, SolverKind::msfem, omega, 5);
    for (Index i = 0; i < 5; ++i) ordering = std::max(ordering, (p.values[i] - ms.lambda[i]) / p.values[i]);
  }
  report(9, sandwich <= 1e-10, "(a) min-max sandwich, 2D s = 32, q = 0, k <= 5",
         "max violation " + num(std::max(sandwich, 0.0)) + " <= 1e-10 (bounds [" + num(bounds.v_min) + ", " +
             num(bounds.v_max) + "])");
  report(9, invariance <= 1e-10, "(b) shift invariance V -> V + 2.5", "max relative deviation " + num(invariance) + " <= 1e-10");
  report(9, ordering <= 1e-10, "(c) lambda_fem <= lambda_ms per sample, k <= 5",
         "max relative violation " + num(std::max(ordering, 0.0)) + " <= 1e-10");

  const auto dir = run_config("localization_2d.json", specsolve::Study::localization, "localization_2d");
  const auto csv = read_csv(dir / "localization.csv");
  std::vector<double> rel;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) rel.push_back(csv.at(r, "rel_error"));
  const double worst = rel.empty() ? INFINITY : *std::max_element(rel.begin(), rel.end());
  report(9, rel.size() == 5 && worst <= 3e-2, "(d) 2D FEM vs MsFEM-POD, h = 1/200, H = 1/20, s = 32, q = 0",
         "relative errors " + list(rel) + ", max " + num(worst) + " <= 3e-2");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<void()>>> all{
      {1, criteria_1_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6},  {7, criterion_7}, {8, criterion_8}, {9, criterion_9}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  fs::create_directories(workdir());
  for (const auto& [id, run] : all) {
    if (!wanted.empty() && !wanted.count(id) && !(id == 1 && wanted.count(2))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run();
    } catch (const std::exception& e) {
      report(id, false, "error", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[TIME] criterion %d%s: %.1f s\n", id, id == 1 ? "-2" : "", secs);
  }
  std::printf("%d failing check(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
