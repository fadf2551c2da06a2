#pragma once

#include "msuq/assembly.hpp"
#include "msuq/eigensolve.hpp"
#include "msuq/msfem.hpp"
#include "msuq/types.hpp"

#include <Eigen/SparseCholesky>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msuq {

/// Snapshots phi_i(., omega^j), j = 1..Q, of one coarse node i (columns).
struct SnapshotSet {
  Index node = 0;
  Matrix snapshots;  // N_h x Q
};

/// Runs build_basis for every sample and regroups the columns per node.
std::vector<SnapshotSet> collect_snapshots(const AffineOperator& op, const SparseMatrix& constraint, const Vector& alpha,
                                           std::span<const std::vector<double>> samples, BasisOptions options = {});

/// POD of a snapshot matrix in the inner product induced by `mass`.
///
/// sigma are the eigenvalues of K = (1/n) U^T M U, obtained from a thin SVD of
/// the mass-weighted snapshots; the modes equal (1/sqrt(n sigma_k)) U v_k and
/// are M-orthonormal. Singular values below a relative 1e-13 of the largest
/// are treated as zero.
struct PodDecomposition {
  Vector sigma;  // all correlation eigenvalues, descending (clamped at 0)
  Matrix modes;  // N_h x rank, M-orthonormal
  Index rank() const { return modes.cols(); }
};

/// Sparse Cholesky factor P M P^T = L L^T of the mass matrix, reusable across nodes.
class MassFactor {
 public:
  explicit MassFactor(const SparseMatrix& mass);
  const SparseMatrix& mass() const { return mass_; }
  /// L^T P u
  Matrix weight(const Matrix& u) const;
  /// P^T L^{-T} b
  Matrix unweight(const Matrix& b) const;

 private:
  SparseMatrix mass_;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  SparseMatrix upper_;
};

/// With max_modes set, only that many leading modes are formed; sigma stays complete.
PodDecomposition pod_decompose(const Matrix& snapshots, const MassFactor& mass, std::optional<Index> max_modes);
PodDecomposition pod_decompose(const Matrix& snapshots, const SparseMatrix& mass);

/// Smallest l with sum_{k>l} sigma_k / sum_k sigma_k < rho (0 if all sigma vanish).
Index pod_rank_for_tolerance(const Vector& sigma, double rho);

struct PodOptions {
  double rho = 1e-3;
  /// Fixed rank m_i; overrides the rho rule when set.
  std::optional<Index> fixed_rank = 3;
  Index max_rank = 1000;
};

/// Mean mode zeta^0 and fluctuation modes zeta^1..zeta^m of one node.
struct PodBasis {
  Index node = 0;
  Vector zeta0;
  Matrix modes;  // N_h x m
  Vector sigma;  // full correlation spectrum of the fluctuations
  double rho = 0.0;
  Index rank() const { return modes.cols(); }
};

/// Projects columns onto ker(constraint) and M-orthonormalizes them again;
/// columns that vanish under the projection are dropped.
Matrix project_to_kernel(const Matrix& modes, const SparseMatrix& constraint, const SparseMatrix& mass);

/// With `constraint` given, the modes are projected onto its kernel so that
/// online bases satisfy the coarse constraints exactly.
PodBasis pod_reduce(const SnapshotSet& snapshots, const SparseMatrix& mass, const PodOptions& options,
                    const SparseMatrix* constraint = nullptr);
PodBasis pod_reduce(const SnapshotSet& snapshots, const MassFactor& mass, const PodOptions& options,
                    const SparseMatrix* constraint = nullptr);

/// Per-node reduced blocks: a_0 = Z^T ((eps^2/2) S + V0) Z and a_j = Z^T V_j Z
/// for Z = [zeta^0, zeta^1, ..., zeta^m].
struct OnlineTensors {
  std::vector<Matrix> base;                 // per node, (m+1)^2
  std::vector<std::vector<Matrix>> modes;   // per node, per j

  /// G-tilde(omega) for node i, (m+1) x (m+1).
  Matrix assemble(Index node, std::span<const double> omega) const;
};

OnlineTensors build_online_tensors(const std::vector<PodBasis>& pods, const AffineOperator& op);

/// Reduced optimal problem per node: the zeta^0 coefficient is pinned to 1 by
/// the single effective constraint; the remaining m solve G~ c = -g~.
/// Returns the N_h x N_H approximated basis.
Matrix online_basis(const std::vector<PodBasis>& pods, const OnlineTensors& tensors, std::span<const double> omega);

/// Coefficients (1, c_1, ..., c_m) of one node's online solution.
Vector online_coefficients(const OnlineTensors& tensors, Index node, std::span<const double> omega);

ReducedSolution reduced_evp_pod(const Matrix& approx_basis, const AffineOperator& op, std::span<const double> omega,
                                const SparseMatrix& mass, Index k);

/// Complete offline stage: snapshots, per-node POD, tensors.
struct PodModel {
  std::vector<PodBasis> pods;
  OnlineTensors tensors;
  Vector alpha;
  Index snapshot_count = 0;
};

PodModel build_pod_model(const AffineOperator& op, const SparseMatrix& constraint, const Vector& alpha,
                         const SparseMatrix& mass, std::span<const std::vector<double>> samples,
                         const PodOptions& options, BasisOptions basis_options = {});

}  // namespace msuq
