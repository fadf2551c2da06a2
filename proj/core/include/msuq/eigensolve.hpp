#pragma once

#include "msuq/types.hpp"

#include <cstdint>

namespace msuq {

/// k smallest eigenpairs of a symmetric-definite pencil, ascending, with
/// columns normalized so that u^T M u = 1.
struct EigenPairs {
  Vector values;
  Matrix vectors;

  Index count() const { return values.size(); }
};

/// Dense path: Cholesky of M, then a symmetric standard solve.
EigenPairs dense_gevp(const Matrix& a, const Matrix& m, Index k);

struct SparseEigOptions {
  double tol = 1e-10;
  Index max_dimension = 1200;  // cap on the Krylov basis size
  std::uint64_t seed = 0x5eed5eedULL;
};

/// Shift-invert block Krylov solver for the k smallest eigenpairs of A u = lambda M u.
///
/// A is factored once (sparse Cholesky, shift 0), so A must be SPD. The block
/// size is k + 2 and the basis is fully reorthogonalized in the M inner
/// product, which resolves clustered and repeated eigenvalues. A pair is
/// converged when its Ritz value changes by at most tol (relative) between
/// checks and its residual meets tol * |A u| or the rounding floor
/// 1e2 eps | |A||u| + |lambda| |M||u| |. Reported values are Rayleigh quotients.
class ShiftInvertSolver {
 public:
  explicit ShiftInvertSolver(SparseEigOptions options = {}) : options_(options) {}

  EigenPairs solve(const SparseMatrix& a, const SparseMatrix& m, Index k);

  /// Krylov basis size used by the last solve.
  Index last_dimension() const { return last_dimension_; }

 private:
  SparseEigOptions options_;
  Index last_dimension_ = 0;
};

EigenPairs sparse_smallest_gevp(const SparseMatrix& a, const SparseMatrix& m, Index k, SparseEigOptions options = {});

/// Sign convention: integral of each u_i (1^T M u_i) is made nonnegative; when
/// it vanishes relative to the integral of |u_i|, the first significant nodal
/// value is made positive.
EigenPairs fix_gauge(EigenPairs pairs, const SparseMatrix& m);

/// ||A u_i - lambda_i M u_i|| / ||A u_i|| for every pair.
Vector relative_residuals(const SparseMatrix& a, const SparseMatrix& m, const EigenPairs& pairs);

}  // namespace msuq
