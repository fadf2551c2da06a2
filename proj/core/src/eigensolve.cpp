#include "msuq/eigensolve.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace msuq {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

EigenPairs sorted_prefix(const Vector& values, const Matrix& vectors, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(vectors.rows(), k);
  for (Index i = 0; i < k; ++i) {
    out.values[i] = values[order[static_cast<std::size_t>(i)]];
    out.vectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

EigenPairs dense_gevp(const Matrix& a, const Matrix& m, Index k) {
  const Index n = a.rows();
  if (a.cols() != n || m.rows() != n || m.cols() != n) throw ConfigError("dense_gevp: dimension mismatch");
  if (k < 1 || k > n) throw ConfigError("dense_gevp: requested " + std::to_string(k) + " pairs of a size-" + std::to_string(n) + " pencil");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("dense_gevp: mass matrix is not SPD");
  // Reject M that is only numerically positive.
  const Matrix& l = llt.matrixLLT();
  const double dmax = l.diagonal().cwiseAbs().maxCoeff();
  if (l.diagonal().minCoeff() <= 1e-14 * dmax) throw NumericalError("dense_gevp: mass matrix is not SPD");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, m, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("dense_gevp: eigensolver failed");
  EigenPairs out;
  out.values = es.eigenvalues().head(k);
  out.vectors = es.eigenvectors().leftCols(k);
  return out;
}

EigenPairs ShiftInvertSolver::solve(const SparseMatrix& a, const SparseMatrix& m, Index k) {
  const Index n = a.rows();
  if (a.cols() != n || m.rows() != n || m.cols() != n) throw ConfigError("sparse_smallest_gevp: dimension mismatch");
  if (k < 1 || k > n) throw ConfigError("sparse_smallest_gevp: requested " + std::to_string(k) + " pairs of a size-" + std::to_string(n) + " pencil");

  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(a);
  if (llt.info() != Eigen::Success)
    throw AdmissibilityError("sparse_smallest_gevp: operator is not SPD (potential positivity violated?)");

  const Index block = std::min(k + 2, n);
  const Index cap = std::min(n, std::max(options_.max_dimension, block * 2));
  const Index first_check = std::min(n, std::max<Index>(2 * k + 4, 20));

  std::mt19937_64 rng(options_.seed);
  Matrix basis(n, 0);     // V, M-orthonormal columns
  Matrix mbasis(n, 0);    // M V
  Matrix images(n, 0);    // Op V = A^{-1} M V for the first `done` columns
  Index done = 0;

  // Appends the M-orthogonal complement of w to the basis; false if w is (numerically) in span(V).
  auto append = [&](Vector w) -> bool {
    const double norm0 = std::sqrt(std::max(0.0, w.dot(m * w)));
    if (norm0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() == 0) break;
      const Vector c = mbasis.transpose() * w;
      w.noalias() -= basis * c;
    }
    const Vector mw = m * w;
    const double norm = std::sqrt(std::max(0.0, w.dot(mw)));
    if (norm <= 1e-10 * norm0) return false;
    const Index d = basis.cols();
    basis.conservativeResize(Eigen::NoChange, d + 1);
    mbasis.conservativeResize(Eigen::NoChange, d + 1);
    basis.col(d) = w / norm;
    mbasis.col(d) = mw / norm;
    return true;
  };
  auto random_vector = [&]() {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = unit_uniform(rng) - 0.5;
    return v;
  };

  for (Index i = 0; i < block; ++i) append(random_vector());

  const SparseMatrix abs_a = a.cwiseAbs();
  const SparseMatrix abs_m = m.cwiseAbs();
  Vector prev_values;

  EigenPairs result;
  while (true) {
    // Expand: images of the not-yet-applied columns become new directions.
    const Index d = basis.cols();
    if (done < d) {
      images.conservativeResize(Eigen::NoChange, d);
      for (Index j = done; j < d; ++j) images.col(j) = llt.solve(mbasis.col(j));
      const Index start = done;
      done = d;
      for (Index j = start; j < d && basis.cols() < cap; ++j) append(images.col(j));
    }
    if (basis.cols() == done && done < cap) {
      // Invariant subspace reached without convergence: restart the block.
      bool grew = false;
      for (int t = 0; t < 4 && !grew; ++t) grew = append(random_vector());
      if (!grew && done < n) throw NumericalError("sparse_smallest_gevp: Krylov basis stagnated");
    }
    if (done < first_check && done < n && basis.cols() < cap) continue;

    // Rayleigh-Ritz on span(V[:, :done]) for the operator A^{-1} M.
    const auto vd = basis.leftCols(done);
    Matrix t = mbasis.leftCols(done).transpose() * images.leftCols(done);
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    if (es.info() != Eigen::Success) throw NumericalError("sparse_smallest_gevp: projected eigensolve failed");
    const Index kk = std::min(k, done);
    Vector values(kk);
    Matrix vectors(n, kk);
    for (Index i = 0; i < kk; ++i) {
      const Index col = done - 1 - i;  // largest theta first
      const double theta = es.eigenvalues()[col];
      values[i] = theta != 0.0 ? 1.0 / theta : std::numeric_limits<double>::infinity();
      vectors.col(i) = vd * es.eigenvectors().col(col);
    }
    // Ritz values stagnate to tol, and the residual reaches tol relative or its rounding floor.
    bool converged = kk == k && prev_values.size() == kk;
    for (Index i = 0; i < kk && converged; ++i) {
      converged = std::abs(values[i] - prev_values[i]) <= options_.tol * std::abs(values[i]);
      const auto u = vectors.col(i);
      const Vector au = a * u;
      const double r = (au - values[i] * (m * u)).norm();
      const Vector au_abs = abs_a * u.cwiseAbs() + std::abs(values[i]) * (abs_m * u.cwiseAbs());
      const double floor = 1e2 * std::numeric_limits<double>::epsilon() * au_abs.norm();
      converged = converged && r <= std::max(options_.tol * au.norm(), floor);
    }
    prev_values = values;
    const bool exhausted = done >= n || (basis.cols() == done && done >= cap);
    if (converged || done >= n) {
      if (converged) {
        // One inverse-iteration sweep on the Ritz block, then Rayleigh-Ritz on span[U, A^{-1} M U].
        Matrix z(n, 2 * kk);
        z.leftCols(kk) = vectors;
        for (Index i = 0; i < kk; ++i) z.col(kk + i) = llt.solve(m * vectors.col(i));
        Matrix q(n, 2 * kk);
        Index cols = 0;
        for (Index j = 0; j < 2 * kk; ++j) {
          Vector w = z.col(j);
          const double w0 = std::sqrt(w.dot(m * w));
          for (int pass = 0; pass < 2; ++pass)
            for (Index c = 0; c < cols; ++c) w -= q.col(c).dot(m * w) * q.col(c);
          const double nw = std::sqrt(std::max(0.0, w.dot(m * w)));
          if (nw > 1e-10 * w0) q.col(cols++) = w / nw;
        }
        const auto qb = q.leftCols(cols);
        Matrix h = qb.transpose() * (a * qb);
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> rr(h);
        if (rr.info() == Eigen::Success && cols >= kk) vectors = qb * rr.eigenvectors().leftCols(kk);
      }
      for (Index i = 0; i < kk; ++i) {
        const auto u = vectors.col(i);
        values[i] = u.dot(a * u) / u.dot(m * u);
      }
      result = sorted_prefix(values, vectors, k);
      break;
    }
    if (exhausted || done >= cap)
      throw NumericalError("sparse_smallest_gevp: no convergence within Krylov dimension " + std::to_string(done));
  }
  last_dimension_ = done;
  for (Index i = 0; i < result.count(); ++i) {
    const double nrm = std::sqrt(result.vectors.col(i).dot(m * result.vectors.col(i)));
    result.vectors.col(i) /= nrm;
  }
  return result;
}

EigenPairs sparse_smallest_gevp(const SparseMatrix& a, const SparseMatrix& m, Index k, SparseEigOptions options) {
  ShiftInvertSolver solver(options);
  return solver.solve(a, m, k);
}

EigenPairs fix_gauge(EigenPairs pairs, const SparseMatrix& m) {
  const Vector ones = Vector::Ones(m.rows());
  const Vector weights = m * ones;  // row sums: integral of each hat
  for (Index i = 0; i < pairs.count(); ++i) {
    auto u = pairs.vectors.col(i);
    const double mean = weights.dot(u);
    const double total = weights.dot(u.cwiseAbs());
    double sign = 1.0;
    if (std::abs(mean) > 1e-10 * total) {
      sign = mean < 0.0 ? -1.0 : 1.0;
    } else {
      const double scale = u.cwiseAbs().maxCoeff();
      for (Index j = 0; j < u.size(); ++j)
        if (std::abs(u[j]) > 1e-8 * scale) {
          sign = u[j] < 0.0 ? -1.0 : 1.0;
          break;
        }
    }
    if (sign < 0.0) u = -u;
  }
  return pairs;
}

Vector relative_residuals(const SparseMatrix& a, const SparseMatrix& m, const EigenPairs& pairs) {
  Vector out(pairs.count());
  for (Index i = 0; i < pairs.count(); ++i) {
    const Vector au = a * pairs.vectors.col(i);
    out[i] = (au - pairs.values[i] * (m * pairs.vectors.col(i))).norm() / au.norm();
  }
  return out;
}

}  // namespace msuq
