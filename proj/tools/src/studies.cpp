#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace specsolve {

using msuq::ConfigError;
using msuq::Matrix;
using msuq::SparseMatrix;
using msuq::Vector;
using nlohmann::json;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::filesystem::path prepare(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

std::string tag(const std::array<Index, 2>& cells, int dim) {
  return dim == 2 ? std::to_string(cells[0]) + "x" + std::to_string(cells[1]) : std::to_string(cells[0]);
}

double resolution(const std::array<Index, 2>& cells) { return static_cast<double>(cells[0]); }

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Least-squares order, or NaN when too few errors lie above the floor.
double order_or_nan(const std::vector<double>& res, const std::vector<double>& err) {
  try {
    return msuq::fit_order(res, err);
  } catch (const ConfigError&) {
    return kNan;
  }
}

Cell level_order(const std::vector<double>& res, const std::vector<double>& err, std::size_t l) {
  if (l == 0 || !(err[l] > 0.0) || !(err[l - 1] > 0.0)) return std::monostate{};
  return std::log(err[l] / err[l - 1]) / std::log(res[l] / res[l - 1]);
}

bool in_cluster(double a, double b) { return std::abs(a - b) <= 1e-8 * std::abs(b); }

struct FnError {
  double l2 = 0.0;
  double h1 = 0.0;
};

// Distance of u to the reference eigenvector i, or to the reference eigenspace when lambda_i is degenerate.
FnError eigenfunction_error(const msuq::EigenPairs& ref, Index i, const Vector& u, const SparseMatrix& mass,
                            const SparseMatrix& stiffness) {
  const double li = ref.values[i];
  std::vector<Index> cluster;
  for (Index j = 0; j < ref.count(); ++j)
    if (in_cluster(ref.values[j], li)) cluster.push_back(j);
  Vector d;
  if (cluster.size() == 1) {
    const double c = u.dot(mass * ref.vectors.col(i));
    d = u - (c < 0.0 ? -1.0 : 1.0) * ref.vectors.col(i);
  } else {
    d = u;
    for (Index j : cluster) d -= u.dot(mass * ref.vectors.col(j)) * ref.vectors.col(j);
  }
  return {msuq::l2_norm(mass, d), msuq::h1_norm(mass, stiffness, d)};
}

msuq::UqConfig with_coarse(const msuq::UqConfig& uq, const std::array<Index, 2>& level) {
  auto c = uq;
  c.mesh.coarse = level;
  return c;
}

void run_solve_evp(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  const auto dir = prepare(cfg.out_dir);
  const int dim = uq.mesh.dim;
  const Index k = uq.k;

  const auto fine = msuq::build_space(dim, uq.mesh.domain, uq.mesh.fine);
  const SparseMatrix mass = msuq::assemble_mass(fine).matrix;
  const auto op = msuq::affine_operator(uq.potential, fine, uq.eps);
  const std::vector<double> omega = cfg.omega.empty() ? std::vector<double>(uq.potential.s, 0.0) : cfg.omega;
  const SparseMatrix g = op.materialize(omega);
  // Extra pairs until the eigenspace of lambda_k is complete, so degenerate errors are measured against the whole cluster.
  Index kref = std::min<Index>(k + 1, fine.dof_count());
  msuq::EigenPairs ref = msuq::sparse_smallest_gevp(g, mass, kref);
  while (kref < fine.dof_count() && in_cluster(ref.values[kref - 1], ref.values[k - 1])) {
    kref = std::min<Index>(kref + 4, fine.dof_count());
    ref = msuq::sparse_smallest_gevp(g, mass, kref);
  }
  ref = msuq::fix_gauge(std::move(ref), mass);

  if (cfg.emit.fields) {
    prepare(dir / "fields");
    for (Index i = 0; i < k; ++i) write_field(dir / "fields" / ("fem_k" + std::to_string(i + 1) + ".csv"), fine, ref.vectors.col(i));
  }

  const std::size_t nl = cfg.coarse_levels.size();
  std::vector<double> res(nl);
  // [k][level]
  std::vector<std::vector<double>> ev(k, std::vector<double>(nl)), l2(ev), h1(ev), lam(ev);
  std::vector<std::vector<double>> cev(k, std::vector<double>(nl, kNan)), cl2(cev), ch1(cev), clam(cev);

  for (std::size_t l = 0; l < nl; ++l) {
    const auto& level = cfg.coarse_levels[l];
    msuq::check_admissibility(with_coarse(uq, level));
    res[l] = resolution(level);
    const auto coarse = msuq::build_space(dim, uq.mesh.domain, level);
    if (coarse.dof_count() < k) throw ConfigError("params.coarse_levels: coarse space smaller than k");
    const auto nm = msuq::nest(coarse, fine);
    const SparseMatrix a = msuq::constraint_cross(fine, coarse, nm).matrix;
    const Vector alpha = msuq::hat_integrals(coarse);
    const auto basis = msuq::build_basis(g, a, alpha, uq.basis);
    const auto sol = msuq::galerkin_evp(basis.coefficients, g, mass, k);
    for (Index i = 0; i < k; ++i) {
      lam[i][l] = sol.fine.values[i];
      ev[i][l] = std::abs(sol.fine.values[i] - ref.values[i]);
      const auto e = eigenfunction_error(ref, i, sol.fine.vectors.col(i), mass, op.stiffness());
      l2[i][l] = e.l2;
      h1[i][l] = e.h1;
      if (cfg.emit.fields)
        write_field(dir / "fields" / ("ms_NH" + tag(level, dim) + "_k" + std::to_string(i + 1) + ".csv"), fine,
                    sol.fine.vectors.col(i));
    }
    if (cfg.coarse_fem) {
      const auto cop = msuq::affine_operator(uq.potential, coarse, uq.eps);
      const SparseMatrix cm = msuq::assemble_mass(coarse).matrix;
      const auto cp = msuq::sparse_smallest_gevp(cop.materialize(omega), cm, k);
      msuq::EigenPairs pro;
      pro.values = cp.values;
      pro.vectors.resize(fine.dof_count(), k);
      for (Index i = 0; i < k; ++i) {
        Vector u = nm.prolong(cp.vectors.col(i));
        pro.vectors.col(i) = u / msuq::l2_norm(mass, u);
      }
      pro = msuq::fix_gauge(std::move(pro), mass);
      for (Index i = 0; i < k; ++i) {
        clam[i][l] = cp.values[i];
        cev[i][l] = std::abs(cp.values[i] - ref.values[i]);
        const auto e = eigenfunction_error(ref, i, pro.vectors.col(i), mass, op.stiffness());
        cl2[i][l] = e.l2;
        ch1[i][l] = e.h1;
      }
    }
  }

  if (cfg.emit.csv) {
    CsvWriter csv(dir / "eigenvalues.csv", kEigenvaluesHeader);
    for (std::size_t l = 0; l < nl; ++l)
      for (Index i = 0; i < k; ++i) {
        auto opt = [&](double v) -> Cell { return cfg.coarse_fem ? Cell(v) : Cell(std::monostate{}); };
        csv.row({static_cast<long long>(cfg.coarse_levels[l][0]), static_cast<long long>(i + 1), ref.values[i], lam[i][l],
                 ev[i][l], ev[i][l] / std::abs(ref.values[i]), l2[i][l], h1[i][l], level_order(res, ev[i], l),
                 opt(clam[i][l]), opt(cev[i][l]), opt(cl2[i][l]), opt(ch1[i][l])});
      }
  }

  auto fits = [&](const std::vector<std::vector<double>>& errs) {
    json arr = json::array();
    for (const auto& e : errs) arr.push_back(nullable(order_or_nan(res, e)));
    return arr;
  };
  json orders;
  orders["resolution"] = "coarse cells per axis";
  orders["levels"] = res;
  std::vector<double> refs(ref.values.data(), ref.values.data() + k);
  orders["lambda_fem"] = refs;
  orders["eigenvalue"] = fits(ev);
  orders["l2"] = fits(l2);
  orders["h1"] = fits(h1);
  if (cfg.coarse_fem) orders["coarse_fem"] = {{"eigenvalue", fits(cev)}, {"l2", fits(cl2)}, {"h1", fits(ch1)}};
  if (cfg.emit.json_summary) write_json(dir / "orders.json", orders);
}

void run_uq_study(const ExperimentConfig& cfg) {
  const auto dir = prepare(cfg.out_dir);
  auto uq = cfg.uq;
  const auto res = msuq::run_uq(uq);
  if (cfg.emit.json_summary) write_json(dir / "summary.json", summary_to_json(cfg, res));
  if (cfg.emit.csv && uq.keep_samples) {
    CsvWriter csv(dir / "samples.csv", kSamplesHeader);
    for (const auto& s : res.samples) {
      std::string om;
      for (std::size_t j = 0; j < s.omega.size(); ++j) om += (j ? ";" : "") + format_double(s.omega[j]);
      for (Index i = 0; i < s.lambda.size(); ++i)
        csv.row({static_cast<long long>(s.shift), static_cast<long long>(s.index), static_cast<long long>(i + 1), s.lambda[i],
                 s.functional, om});
    }
  }
  if (cfg.emit.fields) {
    prepare(dir / "fields");
    const auto fine = msuq::build_space(uq.mesh.dim, uq.mesh.domain, uq.mesh.fine);
    for (Index i = 0; i < res.mean_eigenvectors.cols(); ++i)
      write_field(dir / "fields" / ("mean_psi_k" + std::to_string(i + 1) + ".csv"), fine, res.mean_eigenvectors.col(i));
  }
  if (cfg.emit.pod_modes && res.pod_model) write_pod_modes(dir / "pod", *res.pod_model, uq);
}

void run_h_study(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  if (uq.solver == msuq::SolverKind::fem) throw ConfigError("solver: h-study compares a multiscale solver against fem");
  const auto dir = prepare(cfg.out_dir);
  auto rc = uq;
  rc.solver = msuq::SolverKind::fem;
  const auto ref = msuq::run_fem_reference(rc);
  const std::size_t nl = cfg.coarse_levels.size();
  std::vector<double> res(nl);
  std::vector<std::vector<double>> err(uq.k, std::vector<double>(nl)), mean(err);
  for (std::size_t l = 0; l < nl; ++l) {
    res[l] = resolution(cfg.coarse_levels[l]);
    const auto r = msuq::run_uq(with_coarse(uq, cfg.coarse_levels[l]));
    for (Index i = 0; i < uq.k; ++i) {
      mean[i][l] = r.mean[i];
      err[i][l] = std::abs(r.mean[i] - ref.mean[i]);
    }
  }
  if (cfg.emit.csv) {
    CsvWriter csv(dir / "h_study.csv", kHStudyHeader);
    for (std::size_t l = 0; l < nl; ++l)
      for (Index i = 0; i < uq.k; ++i)
        csv.row({static_cast<long long>(cfg.coarse_levels[l][0]), static_cast<long long>(i + 1), ref.mean[i], mean[i][l],
                 err[i][l], err[i][l] / std::abs(ref.mean[i]), level_order(res, err[i], l)});
  }
  if (cfg.emit.json_summary) {
    json orders;
    orders["levels"] = res;
    json arr = json::array();
    for (const auto& e : err) arr.push_back(nullable(order_or_nan(res, e)));
    orders["mean_eigenvalue"] = arr;
    write_json(dir / "orders.json", orders);
  }
}

void run_s_study(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  const auto dir = prepare(cfg.out_dir);
  auto rc = uq;
  rc.solver = msuq::SolverKind::fem;
  rc.truncation.reset();
  const auto ref = msuq::run_fem_reference(rc);
  std::unique_ptr<CsvWriter> csv;
  if (cfg.emit.csv) csv = std::make_unique<CsvWriter>(dir / "s_study.csv", kSStudyHeader);
  for (auto s : cfg.s_values) {
    auto c = uq;
    c.truncation = s;
    const auto r = msuq::run_uq(c);
    for (Index i = 0; i < uq.k; ++i)
      if (csv)
        csv->row({static_cast<long long>(s), static_cast<long long>(i + 1), r.mean[i], ref.mean[i],
                  std::abs(r.mean[i] - ref.mean[i])});
  }
}

void run_n_study(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  const auto dir = prepare(cfg.out_dir);
  std::vector<double> reference = cfg.reference;
  if (reference.empty()) {
    auto rc = uq;
    rc.sampler.kind = msuq::SamplerKind::qmc;
    rc.sampler.n = cfg.reference_n;
    const auto r = msuq::run_uq(rc);
    reference.assign(r.mean.data(), r.mean.data() + r.mean.size());
  }
  std::unique_ptr<CsvWriter> csv;
  if (cfg.emit.csv) csv = std::make_unique<CsvWriter>(dir / "n_study.csv", kNStudyHeader);
  json slopes;
  for (auto kind : cfg.n_samplers) {
    std::vector<double> ns;
    std::vector<std::vector<double>> rms(uq.k);
    for (auto n : cfg.n_values) {
      auto c = uq;
      c.sampler.kind = kind;
      c.sampler.n = n;
      const auto r = msuq::run_uq(c);
      ns.push_back(static_cast<double>(n));
      for (Index i = 0; i < uq.k; ++i) {
        std::vector<double> est;
        for (const auto& sm : r.shift_means) est.push_back(sm[i]);
        const double e = msuq::rms_over_shifts(est, reference[static_cast<std::size_t>(i)]);
        rms[static_cast<std::size_t>(i)].push_back(e);
        if (csv)
          csv->row({msuq::to_string(kind), static_cast<long long>(n), static_cast<long long>(i + 1), r.mean[i],
                    reference[static_cast<std::size_t>(i)], e});
      }
    }
    json arr = json::array();
    for (const auto& e : rms) arr.push_back(nullable(order_or_nan(ns, e)));
    slopes[msuq::to_string(kind)] = arr;
  }
  if (cfg.emit.json_summary) write_json(dir / "slopes.json", {{"reference", reference}, {"slopes", slopes}});
}

std::string rank_range(const msuq::PodModel& model) {
  Index lo = std::numeric_limits<Index>::max(), hi = 0;
  for (const auto& p : model.pods) {
    lo = std::min(lo, p.rank());
    hi = std::max(hi, p.rank());
  }
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

void run_q_study(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  const auto dir = prepare(cfg.out_dir);
  auto rc = uq;
  rc.solver = msuq::SolverKind::fem;
  const auto ref = msuq::run_fem_reference(rc);
  std::unique_ptr<CsvWriter> csv;
  if (cfg.emit.csv) csv = std::make_unique<CsvWriter>(dir / "q_study.csv", kQStudyHeader);
  for (auto q : cfg.q_values) {
    auto c = uq;
    c.solver = msuq::SolverKind::msfem_pod;
    c.offline.q = q;
    const auto r = msuq::run_algorithm2(c);
    for (Index i = 0; i < uq.k; ++i)
      if (csv)
        csv->row({static_cast<long long>(q), static_cast<long long>(i + 1), r.mean[i], ref.mean[i],
                  std::abs(r.mean[i] - ref.mean[i]), rank_range(*r.pod_model), r.offline_seconds, r.online_seconds});
  }
}

void run_localization(const ExperimentConfig& cfg) {
  const auto& uq = cfg.uq;
  const auto dir = prepare(cfg.out_dir);
  const auto omega = cfg.omega.empty() ? msuq::mc_points(uq.sampler.seed, 1, uq.potential.s).front() : cfg.omega;
  const double adm = msuq::check_admissibility(uq);
  const auto disc = msuq::Discretization::build(uq, uq.solver != msuq::SolverKind::fem);
  const auto fem = msuq::solve_sample(disc, msuq::SolverKind::fem, omega, uq.k);

  std::optional<msuq::PodModel> model;
  if (uq.solver == msuq::SolverKind::msfem_pod) {
    const auto snapshots = msuq::offline_samples(uq.offline, uq.potential.s, {msuq::PointSet{omega}});
    msuq::PodOptions opts;
    opts.rho = uq.offline.rho;
    opts.fixed_rank = uq.offline.m;
    model = msuq::build_pod_model(disc.op, disc.constraint, disc.alpha, disc.mass, snapshots, opts, uq.basis);
  }
  const auto approx = msuq::solve_sample(disc, uq.solver, omega, uq.k, model ? &*model : nullptr, uq.basis);

  if (cfg.emit.csv) {
    CsvWriter csv(dir / "localization.csv", kLocalizationHeader);
    for (Index i = 0; i < uq.k; ++i) {
      const double lf = fem.lambda[i];
      const double la = approx.lambda[i];
      Cell ipr_f = std::monostate{}, ipr_a = std::monostate{};
      if (cfg.ipr) {
        ipr_f = msuq::inverse_participation_ratio(disc.fine, fem.psi.col(i));
        ipr_a = msuq::inverse_participation_ratio(disc.fine, approx.psi.col(i));
      }
      csv.row({static_cast<long long>(i + 1), lf, la, std::abs(la - lf), std::abs(la - lf) / std::abs(lf), ipr_f, ipr_a});
    }
  }
  if (cfg.emit.fields) {
    prepare(dir / "fields");
    for (Index i = 0; i < uq.k; ++i) {
      write_field(dir / "fields" / ("fem_k" + std::to_string(i + 1) + ".csv"), disc.fine, fem.psi.col(i));
      write_field(dir / "fields" / ("approx_k" + std::to_string(i + 1) + ".csv"), disc.fine, approx.psi.col(i));
    }
    const Vector v = disc.fine.interpolate([&](const msuq::Point& x) { return uq.potential.eval(omega, x); });
    write_field(dir / "fields" / "potential.csv", disc.fine, v);
  }
  if (cfg.emit.json_summary) {
    json doc;
    doc["study"] = "localization";
    doc["solver"] = msuq::to_string(uq.solver);
    doc["omega"] = omega;
    doc["admissibility"] = adm;
    doc["domain_measure_inverse"] = 1.0 / disc.mass.sum();
    doc["potential_hash"] = potential_hash(uq.potential);
    doc["config"] = cfg.source;
    write_json(dir / "localization.json", doc);
  }
  if (cfg.emit.pod_modes && model) write_pod_modes(dir / "pod", *model, uq);
}

}  // namespace

void run_study(const ExperimentConfig& cfg) {
  switch (cfg.study) {
    case Study::solve_evp: return run_solve_evp(cfg);
    case Study::uq: return run_uq_study(cfg);
    case Study::h_study: return run_h_study(cfg);
    case Study::s_study: return run_s_study(cfg);
    case Study::n_study: return run_n_study(cfg);
    case Study::q_study: return run_q_study(cfg);
    case Study::localization: return run_localization(cfg);
  }
}

}  // namespace specsolve
