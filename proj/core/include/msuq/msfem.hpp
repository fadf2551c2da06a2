#pragma once

#include "msuq/assembly.hpp"
#include "msuq/eigensolve.hpp"
#include "msuq/mesh.hpp"
#include "msuq/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace msuq {

/// N_h x N_H coefficients of the multiscale basis on the fine mesh.
struct MultiscaleBasis {
  Matrix coefficients;  // column i = fine coefficients of phi_i
  Vector alpha;
  std::optional<std::vector<double>> omega;  // empty for a deterministic potential

  Index fine_dofs() const { return coefficients.rows(); }
  Index coarse_dofs() const { return coefficients.cols(); }
};

struct BasisOptions {
  /// Entries below this fraction of a column's max magnitude are zeroed; 0 keeps the basis global.
  double truncation = 0.0;
};

/// Solves min phi^T G phi s.t. A phi = alpha_i e_i for all coarse nodes i via
/// one sparse Cholesky of G and the N_H x N_H Schur complement A G^{-1} A^T.
MultiscaleBasis build_basis(const SparseMatrix& g, const SparseMatrix& constraint, const Vector& alpha,
                            BasisOptions options = {});
MultiscaleBasis build_basis(const AffineOperator& op, std::span<const double> omega, const SparseMatrix& constraint,
                            const Vector& alpha, BasisOptions options = {});

/// Eigenpairs of a Galerkin subspace spanned by basis columns.
struct ReducedSolution {
  EigenPairs reduced;  // coefficients in the subspace basis
  EigenPairs fine;     // prolongations C u, M-normalized and gauge-fixed
};

/// Solves (C^T G C) u = lambda (C^T M C) u for the k smallest pairs.
ReducedSolution galerkin_evp(const Matrix& basis, const SparseMatrix& g, const SparseMatrix& mass, Index k);
ReducedSolution reduced_evp(const MultiscaleBasis& basis, const AffineOperator& op, std::span<const double> omega,
                            const SparseMatrix& mass, Index k);

/// Least-squares slope of log(error) against log(resolution), resolution ~ 1/H
/// (for example N_H). Errors below `floor` are excluded; at least three points must remain.
double fit_order(std::span<const double> resolutions, std::span<const double> errors, double floor = 1e-12);

/// log2 ratios between consecutive errors (per-level observed orders).
std::vector<double> level_orders(std::span<const double> resolutions, std::span<const double> errors);

/// max |phi_i| outside the patch D_layers (D_0 = cells touching node i, each layer adds the neighbouring cells), relative to max |phi_i|.
double basis_decay_ratio(const MultiscaleBasis& basis, Index node, const FeSpace& coarse, const FeSpace& fine,
                         int layers);

/// Max-norm residual of A C - diag(alpha).
double constraint_residual(const Matrix& coefficients, const SparseMatrix& constraint, const Vector& alpha);

}  // namespace msuq
