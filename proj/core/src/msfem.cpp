#include "msuq/msfem.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace msuq {

namespace {

using Llt = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// G^{-1} B for many right-hand sides: each sweep reads the factor once and
// updates whole rows, instead of one pass over L per column.
Matrix solve_many(const Llt& llt, const Matrix& rhs) {
  const auto& l = llt.matrixL().nestedExpression();
  const Index n = l.cols();
  const int* outer = l.outerIndexPtr();
  const int* inner = l.innerIndexPtr();
  const double* val = l.valuePtr();
  for (Index j = 0; j < n; ++j)
    if (outer[j] == outer[j + 1] || inner[outer[j]] != j) return llt.solve(rhs);

  RowMatrix x = llt.permutationP() * rhs;
  for (Index j = 0; j < n; ++j) {
    x.row(j) /= val[outer[j]];
    for (int p = outer[j] + 1; p < outer[j + 1]; ++p) x.row(inner[p]) -= val[p] * x.row(j);
  }
  for (Index j = n - 1; j >= 0; --j) {
    for (int p = outer[j] + 1; p < outer[j + 1]; ++p) x.row(j) -= val[p] * x.row(inner[p]);
    x.row(j) /= val[outer[j]];
  }
  return llt.permutationPinv() * Matrix(x);
}

}  // namespace

MultiscaleBasis build_basis(const SparseMatrix& g, const SparseMatrix& constraint, const Vector& alpha,
                            BasisOptions options) {
  const Index nh = g.rows();
  const Index nc = constraint.rows();
  if (constraint.cols() != nh || alpha.size() != nc) throw ConfigError("build_basis: constraint dimensions mismatch");

  Llt llt(g);
  if (llt.info() != Eigen::Success) throw AdmissibilityError("build_basis: G(omega) is not SPD");

  const Matrix at = Matrix(constraint.transpose());
  const Matrix x = solve_many(llt, at);  // G^{-1} A^T
  Matrix schur = constraint * x;   // A G^{-1} A^T
  schur = 0.5 * (schur + schur.transpose()).eval();
  Eigen::LLT<Matrix> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success) throw NumericalError("build_basis: Schur complement is singular (rank-deficient constraints)");

  const Matrix lambda = schur_llt.solve(Matrix(alpha.asDiagonal()));
  MultiscaleBasis basis;
  basis.coefficients.noalias() = x * lambda;
  basis.alpha = alpha;

  if (options.truncation > 0.0) {
    for (Index i = 0; i < nc; ++i) {
      auto col = basis.coefficients.col(i);
      const double cut = options.truncation * col.cwiseAbs().maxCoeff();
      for (Index j = 0; j < nh; ++j)
        if (std::abs(col[j]) < cut) col[j] = 0.0;
    }
  }
  return basis;
}

MultiscaleBasis build_basis(const AffineOperator& op, std::span<const double> omega, const SparseMatrix& constraint,
                            const Vector& alpha, BasisOptions options) {
  auto basis = build_basis(op.materialize(omega), constraint, alpha, options);
  if (!omega.empty()) basis.omega = std::vector<double>(omega.begin(), omega.end());
  return basis;
}

ReducedSolution galerkin_evp(const Matrix& basis, const SparseMatrix& g, const SparseMatrix& mass, Index k) {
  const Matrix gc = g * basis;
  const Matrix mc = mass * basis;
  Matrix gr = basis.transpose() * gc;
  Matrix mr = basis.transpose() * mc;
  gr = 0.5 * (gr + gr.transpose()).eval();
  mr = 0.5 * (mr + mr.transpose()).eval();
  ReducedSolution out;
  out.reduced = dense_gevp(gr, mr, k);
  out.fine.values = out.reduced.values;
  out.fine.vectors = basis * out.reduced.vectors;
  out.fine = fix_gauge(std::move(out.fine), mass);
  return out;
}

ReducedSolution reduced_evp(const MultiscaleBasis& basis, const AffineOperator& op, std::span<const double> omega,
                            const SparseMatrix& mass, Index k) {
  return galerkin_evp(basis.coefficients, op.materialize(omega), mass, k);
}

double fit_order(std::span<const double> resolutions, std::span<const double> errors, double floor) {
  if (resolutions.size() != errors.size()) throw ConfigError("fit_order: resolution/error length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i] >= floor && resolutions[i] > 0.0) pts.emplace_back(std::log(resolutions[i]), std::log(errors[i]));
  if (pts.size() < 3) throw ConfigError("fit_order: fewer than 3 usable levels");
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

std::vector<double> level_orders(std::span<const double> resolutions, std::span<const double> errors) {
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i)
    out.push_back(std::log(errors[i] / errors[i - 1]) / std::log(resolutions[i] / resolutions[i - 1]));
  return out;
}

double basis_decay_ratio(const MultiscaleBasis& basis, Index node, const FeSpace& coarse, const FeSpace& fine,
                         int layers) {
  const auto& cm = coarse.mesh();
  const auto& fm = fine.mesh();
  const Point& centre = cm.vertex(node);
  const auto col = basis.coefficients.col(node);
  const double peak = col.cwiseAbs().maxCoeff();
  double outside = 0.0;
  for (Index j = 0; j < fine.dof_count(); ++j) {
    const Point& p = fm.vertex(j);
    double dist = 0.0;  // periodic Chebyshev distance in coarse cells
    for (int k = 0; k < cm.dim(); ++k) {
      const double len = cm.domain().hi[k] - cm.domain().lo[k];
      double d = std::fmod(std::abs(p[k] - centre[k]), len);
      d = std::min(d, len - d);
      dist = std::max(dist, d / cm.spacing(k));
    }
    if (dist >= static_cast<double>(layers) + 1.0 - 1e-9) outside = std::max(outside, std::abs(col[j]));
  }
  return outside / peak;
}

double constraint_residual(const Matrix& coefficients, const SparseMatrix& constraint, const Vector& alpha) {
  Matrix r = constraint * coefficients;
  r.diagonal() -= alpha;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace msuq
