#pragma once

#include "msuq/assembly.hpp"
#include "msuq/eigensolve.hpp"
#include "msuq/mesh.hpp"
#include "msuq/msfem.hpp"
#include "msuq/pod.hpp"
#include "msuq/potentials.hpp"
#include "msuq/sampling.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msuq {

enum class SolverKind { fem, msfem, msfem_pod };
enum class SamplerKind { qmc, mc, online };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);
std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

struct MeshConfig {
  int dim = 1;
  Box domain;
  std::array<Index, 2> coarse{16, 1};
  std::array<Index, 2> fine{2048, 1};
};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::qmc;
  std::uint64_t n = 127;
  std::size_t shifts = 8;  // R
  std::uint64_t seed = 1;
  double weight_decay = 2.0;  // CBC product weights j^-decay
  std::vector<std::uint64_t> generating_vector;  // empty: CBC
};

struct OfflineConfig {
  Index q = 200;
  std::optional<Index> m = 3;
  double rho = 1e-3;
  SamplerKind sampler = SamplerKind::qmc;
  std::uint64_t seed = 7;
};

struct UqConfig {
  RandomPotentialSpec potential;
  double eps = 1.0;
  MeshConfig mesh;
  SamplerConfig sampler;
  SolverKind solver = SolverKind::msfem;
  Index k = 1;
  OfflineConfig offline;
  ScalarField functional = [](const Point&) { return 1.0; };  // g in G(psi) = (g, psi)
  double admissibility_cap = 1.0;
  bool admissibility_hard_fail = false;
  /// Components omega_j with j > truncation are set to 0 (dimension truncation study).
  std::optional<std::size_t> truncation;
  bool keep_samples = false;
  unsigned threads = 1;
  BasisOptions basis;
};

/// Spaces and matrices shared by every sample.
struct Discretization {
  FeSpace fine;
  std::optional<FeSpace> coarse;
  std::optional<NestingMap> nesting;
  SparseMatrix mass;
  SparseMatrix stiffness;
  AffineOperator op;
  SparseMatrix constraint;  // N_H x N_h, empty without a coarse space
  Vector alpha;

  static Discretization build(const UqConfig& cfg, bool with_coarse);
};

/// H sqrt(V_max) / eps with H the largest coarse spacing.
double admissibility_number(const UqConfig& cfg);
/// Warns on stderr or throws AdmissibilityError (hard-fail mode) when the number exceeds the cap.
double check_admissibility(const UqConfig& cfg);

/// One point set per shift (qMC) or per independent replicate (MC).
std::vector<PointSet> sample_sets(const SamplerConfig& cfg, std::size_t s);
/// Snapshot parameters for the offline stage.
PointSet offline_samples(const OfflineConfig& cfg, std::size_t s, const std::vector<PointSet>& online);

struct SampleSolution {
  Vector lambda;
  Matrix psi;  // fine vectors, gauge-fixed, M-normalized
};

SampleSolution solve_sample(const Discretization& disc, SolverKind solver, std::span<const double> omega, Index k,
                            const PodModel* pod = nullptr, BasisOptions basis = {});

struct SampleRecord {
  std::size_t shift = 0;
  std::size_t index = 0;
  std::vector<double> omega;
  Vector lambda;
  double functional = 0.0;
};

struct UqResult {
  Index k = 0;
  std::vector<Vector> shift_means;  // per shift: E_N[lambda_1..k]
  Vector mean;                      // mean of the shift means
  Vector variance;                  // over all samples
  std::vector<double> functional_shift_means;
  double functional_mean = 0.0;
  Matrix mean_eigenvectors;  // nodal average of gauge-fixed psi_1..k
  std::vector<SampleRecord> samples;
  std::size_t sample_count = 0;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
  double admissibility = 0.0;
  std::shared_ptr<const PodModel> pod_model;  // offline stage of Algorithm 2
};

/// Sample loop shared by all three pipelines.
UqResult run_samples(const Discretization& disc, const UqConfig& cfg, const std::vector<PointSet>& sets,
                     const PodModel* pod);

UqResult run_algorithm1(const UqConfig& cfg);
UqResult run_algorithm2(const UqConfig& cfg);
UqResult run_fem_reference(const UqConfig& cfg);
/// Dispatches on cfg.solver.
UqResult run_uq(const UqConfig& cfg);

/// G(psi) = (g, psi) with g interpolated nodally.
double functional_of_ground_state(const FeSpace& space, const SparseMatrix& mass, const ScalarField& g, const Vector& psi);

/// sqrt(mean_r (estimate_r - reference)^2); needs at least two shifts.
double rms_over_shifts(std::span<const double> estimates, double reference);

/// int psi^4 / (int psi^2)^2, with both integrals from the P1 interpolant by quadrature.
double inverse_participation_ratio(const FeSpace& space, const Vector& psi);

}  // namespace msuq
