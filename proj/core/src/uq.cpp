#include "msuq/uq.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace msuq {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_omega(std::span<const double> omega) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < omega.size(); ++i) os << (i ? ", " : "") << omega[i];
  os << ')';
  return os.str();
}

// Runs body(i) for i in [0, n) on `threads` workers; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::fem: return "fem";
    case SolverKind::msfem: return "msfem";
    case SolverKind::msfem_pod: return "msfem-pod";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "fem") return SolverKind::fem;
  if (name == "msfem") return SolverKind::msfem;
  if (name == "msfem-pod") return SolverKind::msfem_pod;
  throw ConfigError("unknown solver '" + name + "' (expected fem | msfem | msfem-pod)");
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::qmc: return "qmc";
    case SamplerKind::mc: return "mc";
    case SamplerKind::online: return "online";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "qmc") return SamplerKind::qmc;
  if (name == "mc") return SamplerKind::mc;
  if (name == "online") return SamplerKind::online;
  throw ConfigError("unknown sampler '" + name + "' (expected qmc | mc | online)");
}

Discretization Discretization::build(const UqConfig& cfg, bool with_coarse) {
  const auto& mc = cfg.mesh;
  Discretization d{build_space(mc.dim, mc.domain, mc.fine), std::nullopt, std::nullopt, {}, {}, {}, {}, {}};
  d.mass = assemble_mass(d.fine).matrix;
  d.op = affine_operator(cfg.potential, d.fine, cfg.eps);
  d.stiffness = d.op.stiffness();
  if (with_coarse) {
    d.coarse = build_space(mc.dim, mc.domain, mc.coarse);
    d.nesting = nest(*d.coarse, d.fine);
    d.constraint = constraint_cross(d.fine, *d.coarse, *d.nesting).matrix;
    d.alpha = hat_integrals(*d.coarse);
  }
  return d;
}

double admissibility_number(const UqConfig& cfg) {
  double h = 0.0;
  for (int k = 0; k < cfg.mesh.dim; ++k)
    h = std::max(h, (cfg.mesh.domain.hi[k] - cfg.mesh.domain.lo[k]) / static_cast<double>(cfg.mesh.coarse[k]));
  const auto bounds = potential_bounds(cfg.potential, cfg.mesh.domain, cfg.mesh.dim);
  return h * std::sqrt(std::max(0.0, bounds.v_max)) / cfg.eps;
}

double check_admissibility(const UqConfig& cfg) {
  const double a = admissibility_number(cfg);
  if (a > cfg.admissibility_cap) {
    std::ostringstream os;
    os << "coarse mesh admissibility H*sqrt(V_max)/eps = " << a << " exceeds cap " << cfg.admissibility_cap;
    if (cfg.admissibility_hard_fail) throw AdmissibilityError(os.str());
    std::cerr << "warning: " << os.str() << '\n';
  }
  return a;
}

std::vector<PointSet> sample_sets(const SamplerConfig& cfg, std::size_t s) {
  std::vector<PointSet> sets;
  if (cfg.shifts == 0) throw ConfigError("sampler needs at least one shift/replicate");
  if (cfg.kind == SamplerKind::qmc) {
    std::vector<std::uint64_t> z = cfg.generating_vector;
    if (z.empty()) {
      z = cbc_generating_vector(cfg.n, s, product_weights(s, cfg.weight_decay));
    } else if (z.size() < s) {
      throw ConfigError("generating vector has " + std::to_string(z.size()) + " components, need " + std::to_string(s));
    } else {
      z.resize(s);
    }
    const auto rule = make_lattice_rule(cfg.n, std::move(z), cfg.shifts, cfg.seed);
    for (std::size_t r = 0; r < cfg.shifts; ++r) sets.push_back(lattice_points(rule, static_cast<long>(r)));
  } else if (cfg.kind == SamplerKind::mc) {
    for (std::size_t r = 0; r < cfg.shifts; ++r)
      sets.push_back(mc_points(splitmix64(cfg.seed + r), static_cast<std::size_t>(cfg.n), s));
  } else {
    throw ConfigError("online sampler is only valid for the offline stage");
  }
  return sets;
}

PointSet offline_samples(const OfflineConfig& cfg, std::size_t s, const std::vector<PointSet>& online) {
  const auto q = static_cast<std::size_t>(cfg.q);
  if (q < 2) throw ConfigError("offline stage needs Q >= 2");
  switch (cfg.sampler) {
    case SamplerKind::online: {
      PointSet out;
      for (const auto& set : online)
        for (const auto& p : set) {
          if (out.size() == q) return out;
          out.push_back(p);
        }
      if (out.size() < q) throw ConfigError("offline sampler 'online': fewer online samples than Q");
      return out;
    }
    case SamplerKind::mc: return mc_points(splitmix64(cfg.seed), q, s);
    case SamplerKind::qmc: {
      // First Q points of a shifted CBC lattice with the next prime size.
      const auto n = next_prime(std::max<std::uint64_t>(q, 2));
      auto rule = make_lattice_rule(n, cbc_generating_vector(n, s, product_weights(s)), 1, cfg.seed);
      auto pts = lattice_points(rule, 0);
      pts.resize(q);
      return pts;
    }
  }
  return {};
}

SampleSolution solve_sample(const Discretization& disc, SolverKind solver, std::span<const double> omega, Index k,
                            const PodModel* pod, BasisOptions basis_options) {
  SampleSolution out;
  switch (solver) {
    case SolverKind::fem: {
      auto pairs = fix_gauge(sparse_smallest_gevp(disc.op.materialize(omega), disc.mass, k), disc.mass);
      out.lambda = pairs.values;
      out.psi = std::move(pairs.vectors);
      break;
    }
    case SolverKind::msfem: {
      if (!disc.coarse) throw ConfigError("msfem solver needs a coarse mesh");
      const auto g = disc.op.materialize(omega);
      const auto basis = build_basis(g, disc.constraint, disc.alpha, basis_options);
      auto sol = galerkin_evp(basis.coefficients, g, disc.mass, k);
      out.lambda = sol.fine.values;
      out.psi = std::move(sol.fine.vectors);
      break;
    }
    case SolverKind::msfem_pod: {
      if (pod == nullptr) throw ConfigError("msfem-pod solver needs an offline POD model");
      const Matrix basis = online_basis(pod->pods, pod->tensors, omega);
      auto sol = reduced_evp_pod(basis, disc.op, omega, disc.mass, k);
      out.lambda = sol.fine.values;
      out.psi = std::move(sol.fine.vectors);
      break;
    }
  }
  return out;
}

double functional_of_ground_state(const FeSpace& space, const SparseMatrix& mass, const ScalarField& g, const Vector& psi) {
  const Vector gn = space.interpolate(g);
  return l2_inner(mass, gn, psi);
}

UqResult run_samples(const Discretization& disc, const UqConfig& cfg, const std::vector<PointSet>& sets,
                     const PodModel* pod) {
  const Index k = cfg.k;
  UqResult res;
  res.k = k;
  const Index nh = disc.fine.dof_count();
  res.mean_eigenvectors = Matrix::Zero(nh, k);
  const Vector g_weights = disc.mass * disc.fine.interpolate(cfg.functional);

  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t r = 0; r < sets.size(); ++r)
    for (std::size_t i = 0; i < sets[r].size(); ++i) work.emplace_back(r, i);
  const std::size_t total = work.size();
  if (total == 0) throw ConfigError("no samples to run");

  std::vector<Vector> sums(sets.size(), Vector::Zero(k));
  std::vector<double> fsums(sets.size(), 0.0);
  std::vector<std::size_t> counts(sets.size(), 0);
  Vector sum_all = Vector::Zero(k);
  Vector sumsq_all = Vector::Zero(k);
  double fsum_all = 0.0;

  const auto t0 = Clock::now();
  const std::size_t chunk = std::max<std::size_t>(16, 4 * static_cast<std::size_t>(std::max(1u, cfg.threads)));
  std::vector<SampleSolution> buffer(chunk);
  std::vector<std::vector<double>> omegas(chunk);
  for (std::size_t begin = 0; begin < total; begin += chunk) {
    const std::size_t len = std::min(chunk, total - begin);
    parallel_for(len, cfg.threads, [&](std::size_t t) {
      const auto [r, i] = work[begin + t];
      auto omega = sets[r][i];
      if (cfg.truncation)
        for (std::size_t j = *cfg.truncation; j < omega.size(); ++j) omega[j] = 0.0;
      try {
        buffer[t] = solve_sample(disc, cfg.solver, omega, k, pod, cfg.basis);
      } catch (const AdmissibilityError& e) {
        throw AdmissibilityError(std::string(e.what()) + " at omega = " + format_omega(omega));
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at omega = " + format_omega(omega));
      }
      omegas[t] = std::move(omega);
    });
    // Ordered reduction keeps results independent of the thread count.
    for (std::size_t t = 0; t < len; ++t) {
      const auto [r, i] = work[begin + t];
      const auto& sol = buffer[t];
      const double fval = g_weights.dot(sol.psi.col(0));
      sums[r] += sol.lambda;
      fsums[r] += fval;
      ++counts[r];
      sum_all += sol.lambda;
      sumsq_all += sol.lambda.cwiseProduct(sol.lambda);
      fsum_all += fval;
      res.mean_eigenvectors += sol.psi;
      if (cfg.keep_samples) res.samples.push_back({r, i, omegas[t], sol.lambda, fval});
    }
  }
  res.online_seconds = seconds_since(t0);

  const auto n_all = static_cast<double>(total);
  res.sample_count = total;
  res.mean = Vector::Zero(k);
  for (std::size_t r = 0; r < sets.size(); ++r) {
    const auto c = static_cast<double>(counts[r]);
    res.shift_means.push_back(sums[r] / c);
    res.functional_shift_means.push_back(fsums[r] / c);
    res.mean += res.shift_means.back();
    res.functional_mean += res.functional_shift_means.back();
  }
  res.mean /= static_cast<double>(sets.size());
  res.functional_mean /= static_cast<double>(sets.size());
  const Vector pooled = sum_all / n_all;
  res.variance = (sumsq_all / n_all - pooled.cwiseProduct(pooled)).cwiseMax(0.0);
  res.mean_eigenvectors /= n_all;
  return res;
}

UqResult run_fem_reference(const UqConfig& cfg) {
  if (cfg.solver != SolverKind::fem) throw ConfigError("run_fem_reference expects solver = fem");
  const auto disc = Discretization::build(cfg, false);
  const auto sets = sample_sets(cfg.sampler, cfg.potential.s);
  return run_samples(disc, cfg, sets, nullptr);
}

UqResult run_algorithm1(const UqConfig& cfg) {
  if (cfg.solver != SolverKind::msfem) throw ConfigError("run_algorithm1 expects solver = msfem");
  const double adm = check_admissibility(cfg);
  const auto disc = Discretization::build(cfg, true);
  const auto sets = sample_sets(cfg.sampler, cfg.potential.s);
  auto res = run_samples(disc, cfg, sets, nullptr);
  res.admissibility = adm;
  return res;
}

UqResult run_algorithm2(const UqConfig& cfg) {
  if (cfg.solver != SolverKind::msfem_pod) throw ConfigError("run_algorithm2 expects solver = msfem-pod");
  const double adm = check_admissibility(cfg);
  const auto disc = Discretization::build(cfg, true);
  const auto sets = sample_sets(cfg.sampler, cfg.potential.s);

  const auto t0 = Clock::now();
  auto snapshots = offline_samples(cfg.offline, cfg.potential.s, sets);
  if (cfg.truncation)
    for (auto& p : snapshots)
      for (std::size_t j = *cfg.truncation; j < p.size(); ++j) p[j] = 0.0;
  PodOptions opts;
  opts.rho = cfg.offline.rho;
  opts.fixed_rank = cfg.offline.m;
  auto model = std::make_shared<const PodModel>(
      build_pod_model(disc.op, disc.constraint, disc.alpha, disc.mass, snapshots, opts, cfg.basis));
  const double offline = seconds_since(t0);

  auto res = run_samples(disc, cfg, sets, model.get());
  res.offline_seconds = offline;
  res.pod_model = std::move(model);
  res.admissibility = adm;
  return res;
}

UqResult run_uq(const UqConfig& cfg) {
  switch (cfg.solver) {
    case SolverKind::fem: return run_fem_reference(cfg);
    case SolverKind::msfem: return run_algorithm1(cfg);
    case SolverKind::msfem_pod: return run_algorithm2(cfg);
  }
  throw ConfigError("unknown solver");
}

double rms_over_shifts(std::span<const double> estimates, double reference) {
  if (estimates.size() < 2) throw ConfigError("rms_over_shifts: need at least 2 shifts");
  double acc = 0.0;
  for (double e : estimates) acc += (e - reference) * (e - reference);
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double inverse_participation_ratio(const FeSpace& space, const Vector& psi) {
  const double p4 = integrate_fe(space, psi, [](double u, const Point&) { return u * u * u * u; });
  const double p2 = integrate_fe(space, psi, [](double u, const Point&) { return u * u; });
  return p4 / (p2 * p2);
}

}  // namespace msuq
