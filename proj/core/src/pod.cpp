#include "msuq/pod.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace msuq {

std::vector<SnapshotSet> collect_snapshots(const AffineOperator& op, const SparseMatrix& constraint, const Vector& alpha,
                                           std::span<const std::vector<double>> samples, BasisOptions options) {
  if (samples.size() < 2) throw ConfigError("collect_snapshots: need at least 2 samples");
  const Index nc = constraint.rows();
  const Index nh = constraint.cols();
  const auto q = static_cast<Index>(samples.size());
  std::vector<SnapshotSet> sets(static_cast<std::size_t>(nc));
  for (Index i = 0; i < nc; ++i) {
    sets[static_cast<std::size_t>(i)].node = i;
    sets[static_cast<std::size_t>(i)].snapshots.resize(nh, q);
  }
  for (Index j = 0; j < q; ++j) {
    const auto basis = build_basis(op, samples[static_cast<std::size_t>(j)], constraint, alpha, options);
    for (Index i = 0; i < nc; ++i) sets[static_cast<std::size_t>(i)].snapshots.col(j) = basis.coefficients.col(i);
  }
  return sets;
}

MassFactor::MassFactor(const SparseMatrix& mass) : mass_(mass), llt_(mass) {
  if (llt_.info() != Eigen::Success) throw NumericalError("MassFactor: mass matrix is not SPD");
  upper_ = SparseMatrix(llt_.matrixU());
}

Matrix MassFactor::weight(const Matrix& u) const { return upper_ * (llt_.permutationP() * u); }

Matrix MassFactor::unweight(const Matrix& b) const { return llt_.permutationPinv() * Matrix(llt_.matrixU().solve(b)); }

PodDecomposition pod_decompose(const Matrix& snapshots, const SparseMatrix& mass) {
  return pod_decompose(snapshots, MassFactor(mass), std::nullopt);
}

PodDecomposition pod_decompose(const Matrix& snapshots, const MassFactor& mass, std::optional<Index> max_modes) {
  const Index n = snapshots.cols();
  PodDecomposition out;
  if (n == 0) {
    out.modes.resize(snapshots.rows(), 0);
    return out;
  }
  // With P M P^T = L L^T the weighted snapshots B = L^T P U satisfy B^T B = U^T M U = n K,
  // so the SVD of B gives sigma_k = s_k^2 / n and modes P^T L^{-T} u_k without squaring
  // the condition number.
  // Tall and thin: QR first, then the SVD of the small triangular factor.
  const Matrix b = mass.weight(snapshots);
  const Index p = std::min(b.rows(), n);
  Eigen::HouseholderQR<Matrix> qr(b);
  const Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();

  out.sigma.resize(n);
  for (Index i = 0; i < n; ++i) out.sigma[i] = i < s.size() ? s[i] * s[i] / static_cast<double>(n) : 0.0;
  Index rank = 0;
  while (rank < s.size() && s[0] > 0.0 && s[rank] > 1e-13 * s[0]) ++rank;

  if (max_modes) rank = std::min(rank, std::max<Index>(*max_modes, 0));
  Matrix u = Matrix::Zero(b.rows(), rank);
  u.topRows(p) = svd.matrixU().leftCols(rank);
  u = qr.householderQ() * u;
  out.modes = mass.unweight(u);
  return out;
}

Index pod_rank_for_tolerance(const Vector& sigma, double rho) {
  const double total = sigma.sum();
  if (!(total > 0.0)) return 0;
  Index numerical = 0;
  while (numerical < sigma.size() && sigma[numerical] > 1e-26 * sigma[0]) ++numerical;
  double tail = total;
  for (Index l = 0; l <= numerical; ++l) {
    if (tail / total < rho) return l;
    if (l < sigma.size()) tail -= sigma[l];
  }
  return numerical;
}

Matrix project_to_kernel(const Matrix& modes, const SparseMatrix& constraint, const SparseMatrix& mass) {
  if (modes.cols() == 0) return modes;
  const SparseMatrix aat = constraint * SparseMatrix(constraint.transpose());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(aat);
  if (ldlt.info() != Eigen::Success) throw NumericalError("project_to_kernel: constraint matrix is rank deficient");
  Matrix z = modes;
  for (int pass = 0; pass < 2; ++pass) {
    const Matrix r = constraint * z;
    z -= constraint.transpose() * Matrix(ldlt.solve(r));
  }
  Matrix out(z.rows(), z.cols());
  Index kept = 0;
  for (Index k = 0; k < z.cols(); ++k) {
    Vector v = z.col(k);
    const double before = std::sqrt(v.dot(mass * v));
    for (int pass = 0; pass < 2; ++pass)
      for (Index l = 0; l < kept; ++l) v -= out.col(l).dot(mass * v) * out.col(l);
    const double norm = std::sqrt(v.dot(mass * v));
    if (!(norm > 1e-8 * before)) continue;
    out.col(kept++) = v / norm;
  }
  return out.leftCols(kept);
}

PodBasis pod_reduce(const SnapshotSet& snapshots, const SparseMatrix& mass, const PodOptions& options,
                    const SparseMatrix* constraint) {
  return pod_reduce(snapshots, MassFactor(mass), options, constraint);
}

PodBasis pod_reduce(const SnapshotSet& snapshots, const MassFactor& mass, const PodOptions& options,
                    const SparseMatrix* constraint) {
  const Index q = snapshots.snapshots.cols();
  if (q < 2) throw ConfigError("pod_reduce: need at least 2 snapshots");
  PodBasis out;
  out.node = snapshots.node;
  out.rho = options.rho;
  out.zeta0 = snapshots.snapshots.rowwise().mean();
  const Matrix fluct = snapshots.snapshots.colwise() - out.zeta0;
  const double scale = std::max(out.zeta0.cwiseAbs().maxCoeff(), 1e-300);
  if (fluct.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    out.sigma = Vector::Zero(q);
    out.modes.resize(out.zeta0.size(), 0);
    return out;
  }
  auto dec = pod_decompose(fluct, mass, options.fixed_rank);
  out.sigma = dec.sigma;
  Index rank = options.fixed_rank ? std::min(*options.fixed_rank, dec.rank())
                                  : std::min({options.max_rank, pod_rank_for_tolerance(dec.sigma, options.rho), dec.rank()});
  out.modes = dec.modes.leftCols(rank);
  if (constraint) out.modes = project_to_kernel(out.modes, *constraint, mass.mass());
  return out;
}

namespace {

Matrix node_frame(const PodBasis& pod) {
  Matrix z(pod.zeta0.size(), pod.rank() + 1);
  z.col(0) = pod.zeta0;
  z.rightCols(pod.rank()) = pod.modes;
  return z;
}

}  // namespace

OnlineTensors build_online_tensors(const std::vector<PodBasis>& pods, const AffineOperator& op) {
  OnlineTensors t;
  if (pods.empty()) return t;
  std::vector<Index> offset(pods.size() + 1, 0);
  for (std::size_t i = 0; i < pods.size(); ++i) offset[i + 1] = offset[i] + pods[i].rank() + 1;
  Matrix zt(offset.back(), pods.front().zeta0.size());
  for (std::size_t i = 0; i < pods.size(); ++i) zt.middleRows(offset[i], pods[i].rank() + 1) = node_frame(pods[i]).transpose();

  // One product Z^T T per operator term covers every node's frame.
  auto blocks = [&](const SparseMatrix& term) {
    const Matrix ztt = zt * term;
    std::vector<Matrix> out;
    out.reserve(pods.size());
    for (std::size_t i = 0; i < pods.size(); ++i) {
      const Index w = pods[i].rank() + 1;
      out.push_back(ztt.middleRows(offset[i], w) * zt.middleRows(offset[i], w).transpose());
    }
    return out;
  };
  t.base = blocks(op.base());
  t.modes.assign(pods.size(), {});
  for (auto& per_mode : t.modes) per_mode.reserve(op.num_modes());
  for (std::size_t j = 0; j < op.num_modes(); ++j) {
    auto per_node = blocks(op.mode(j));
    for (std::size_t i = 0; i < pods.size(); ++i) t.modes[i].push_back(std::move(per_node[i]));
  }
  return t;
}

Matrix OnlineTensors::assemble(Index node, std::span<const double> omega) const {
  const auto& per_mode = modes[static_cast<std::size_t>(node)];
  if (omega.size() > per_mode.size()) throw ConfigError("OnlineTensors: omega longer than the number of modes");
  Matrix g = base[static_cast<std::size_t>(node)];
  for (std::size_t j = 0; j < omega.size(); ++j)
    if (omega[j] != 0.0) g += omega[j] * per_mode[j];
  return 0.5 * (g + g.transpose());
}

Vector online_coefficients(const OnlineTensors& tensors, Index node, std::span<const double> omega) {
  const Matrix g = tensors.assemble(node, omega);
  const Index m = g.rows() - 1;
  Vector c(m + 1);
  c[0] = 1.0;
  if (m == 0) return c;
  Eigen::LLT<Matrix> llt(g.bottomRightCorner(m, m));
  if (llt.info() != Eigen::Success)
    throw NumericalError("online_basis: reduced system of node " + std::to_string(node) + " is not SPD");
  c.tail(m) = llt.solve(-g.col(0).tail(m));
  return c;
}

Matrix online_basis(const std::vector<PodBasis>& pods, const OnlineTensors& tensors, std::span<const double> omega) {
  if (pods.empty()) return {};
  Matrix out(pods.front().zeta0.size(), static_cast<Index>(pods.size()));
  for (std::size_t i = 0; i < pods.size(); ++i) {
    const auto& pod = pods[i];
    const Vector c = online_coefficients(tensors, static_cast<Index>(i), omega);
    auto col = out.col(static_cast<Index>(i));
    col = pod.zeta0;
    if (pod.rank() > 0) col.noalias() += pod.modes * c.tail(pod.rank());
  }
  return out;
}

ReducedSolution reduced_evp_pod(const Matrix& approx_basis, const AffineOperator& op, std::span<const double> omega,
                                const SparseMatrix& mass, Index k) {
  return galerkin_evp(approx_basis, op.materialize(omega), mass, k);
}

PodModel build_pod_model(const AffineOperator& op, const SparseMatrix& constraint, const Vector& alpha,
                         const SparseMatrix& mass, std::span<const std::vector<double>> samples,
                         const PodOptions& options, BasisOptions basis_options) {
  PodModel model;
  model.alpha = alpha;
  model.snapshot_count = static_cast<Index>(samples.size());
  auto sets = collect_snapshots(op, constraint, alpha, samples, basis_options);
  model.pods.reserve(sets.size());
  const MassFactor factor(mass);
  for (auto& set : sets) {
    model.pods.push_back(pod_reduce(set, factor, options, &constraint));
    set.snapshots.resize(0, 0);
  }
  model.tensors = build_online_tensors(model.pods, op);
  return model;
}

}  // namespace msuq
