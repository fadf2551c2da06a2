#include "msuq/assembly.hpp"

#include <cmath>
#include <string>

namespace msuq {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct QuadPoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the cell measure
};

const std::vector<QuadPoint>& rule_1d() {
  static const std::vector<QuadPoint> rule = [] {
    const double g = std::sqrt(3.0 / 5.0);
    std::vector<QuadPoint> r;
    for (auto [xi, w] : {std::pair{-g, 5.0 / 9.0}, std::pair{0.0, 8.0 / 9.0}, std::pair{g, 5.0 / 9.0}}) {
      const double t = 0.5 * (xi + 1.0);
      r.push_back({{1.0 - t, t, 0.0}, 0.5 * w});
    }
    return r;
  }();
  return rule;
}

// Symmetric 6-point rule, exact for degree 4.
const std::vector<QuadPoint>& rule_2d() {
  static const std::vector<QuadPoint> rule = [] {
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    return std::vector<QuadPoint>{
        {{b1, a1, a1}, w1}, {{a1, b1, a1}, w1}, {{a1, a1, b1}, w1},
        {{b2, a2, a2}, w2}, {{a2, b2, a2}, w2}, {{a2, a2, b2}, w2},
    };
  }();
  return rule;
}

// Gradients of the barycentric coordinates of a triangle.
std::array<std::array<double, 2>, 3> p1_gradients(const std::array<Point, 3>& p) {
  const double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
  std::array<std::array<double, 2>, 3> g{};
  for (int a = 0; a < 3; ++a) {
    const auto& q = p[(a + 1) % 3];
    const auto& r = p[(a + 2) % 3];
    g[a] = {(q[1] - r[1]) / det, (r[0] - q[0]) / det};
  }
  return g;
}

SparseMatrix from_triplets(Index rows, Index cols, const Triplets& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

template <class Local>
SparseMatrix assemble_local(const FeSpace& space, Local&& local) {
  const auto& mesh = space.mesh();
  const int nv = mesh.vertices_per_cell();
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_cells() * nv * nv));
  std::array<std::array<double, 3>, 3> block{};
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    local(c, block);
    const auto verts = mesh.cell_vertices(c);
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) trip.emplace_back(verts[a], verts[b], block[a][b]);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

bool same_pattern(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  for (Index k = 0; k <= a.outerSize(); ++k)
    if (a.outerIndexPtr()[k] != b.outerIndexPtr()[k]) return false;
  for (Index k = 0; k < a.nonZeros(); ++k)
    if (a.innerIndexPtr()[k] != b.innerIndexPtr()[k]) return false;
  return true;
}

}  // namespace

SymSparse assemble_mass(const FeSpace& space) {
  const auto& mesh = space.mesh();
  const int nv = mesh.vertices_per_cell();
  auto m = assemble_local(space, [&](Index c, auto& block) {
    const double meas = mesh.cell_measure(c);
    const double denom = nv == 2 ? 6.0 : 12.0;
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) block[a][b] = meas * (a == b ? 2.0 : 1.0) / denom;
  });
  return {std::move(m), MatrixRole::mass};
}

SymSparse assemble_stiffness(const FeSpace& space) {
  const auto& mesh = space.mesh();
  auto m = assemble_local(space, [&](Index c, auto& block) {
    if (mesh.dim() == 1) {
      const double h = mesh.spacing(0);
      block[0][0] = block[1][1] = 1.0 / h;
      block[0][1] = block[1][0] = -1.0 / h;
      return;
    }
    const auto g = p1_gradients(mesh.cell_coordinates(c));
    const double meas = mesh.cell_measure(c);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) block[a][b] = meas * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
  });
  return {std::move(m), MatrixRole::stiffness};
}

SymSparse assemble_potential(const FeSpace& space, const ScalarField& v) {
  const auto& mesh = space.mesh();
  const int nv = mesh.vertices_per_cell();
  const auto& rule = mesh.dim() == 1 ? rule_1d() : rule_2d();
  auto m = assemble_local(space, [&](Index c, auto& block) {
    const auto p = mesh.cell_coordinates(c);
    const double meas = mesh.cell_measure(c);
    for (auto& row : block) row.fill(0.0);
    for (const auto& qp : rule) {
      Point x{0.0, 0.0};
      for (int a = 0; a < nv; ++a) {
        x[0] += qp.bary[a] * p[a][0];
        x[1] += qp.bary[a] * p[a][1];
      }
      const double wv = qp.weight * meas * v(x);
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) block[a][b] += wv * qp.bary[a] * qp.bary[b];
    }
  });
  return {std::move(m), MatrixRole::potential};
}

SymSparse constraint_cross(const FeSpace& fine, const FeSpace& coarse, const NestingMap& nesting) {
  if (nesting.fine_dofs() != fine.dof_count() || nesting.coarse_dofs() != coarse.dof_count())
    throw ConfigError("constraint_cross: spaces are not related by the given nesting");
  // Coarse hats are piecewise linear on the fine mesh, so P^T M_h is exact.
  const auto mass = assemble_mass(fine);
  SparseMatrix a = SparseMatrix(nesting.prolongation().transpose()) * mass.matrix;
  a.prune(0.0);
  a.makeCompressed();
  return {std::move(a), MatrixRole::constraint_cross};
}

Vector hat_integrals(const FeSpace& coarse) {
  const auto& mesh = coarse.mesh();
  Vector alpha = Vector::Zero(coarse.dof_count());
  const double share = 1.0 / mesh.vertices_per_cell();
  for (Index c = 0; c < mesh.num_cells(); ++c)
    for (Index v : mesh.cell_vertices(c)) alpha[v] += share * mesh.cell_measure(c);
  return alpha;
}

AffineOperator::AffineOperator(double eps, SparseMatrix stiffness, SparseMatrix v0, std::vector<SparseMatrix> modes)
    : eps_(eps), stiffness_(std::move(stiffness)), v0_(std::move(v0)), modes_(std::move(modes)) {
  base_ = (0.5 * eps_ * eps_) * stiffness_ + v0_;
  base_.makeCompressed();
  shared_pattern_ = true;
  for (const auto& m : modes_) shared_pattern_ = shared_pattern_ && same_pattern(base_, m);
}

SparseMatrix AffineOperator::materialize(std::span<const double> omega) const {
  if (omega.size() > modes_.size())
    throw ConfigError("omega has " + std::to_string(omega.size()) + " components, operator has " +
                      std::to_string(modes_.size()) + " modes");
  SparseMatrix g = base_;
  if (shared_pattern_) {
    double* out = g.valuePtr();
    const auto nnz = static_cast<std::size_t>(g.nonZeros());
    for (std::size_t j = 0; j < omega.size(); ++j) {
      const double w = omega[j];
      if (w == 0.0) continue;
      const double* in = modes_[j].valuePtr();
      for (std::size_t k = 0; k < nnz; ++k) out[k] += w * in[k];
    }
    return g;
  }
  for (std::size_t j = 0; j < omega.size(); ++j)
    if (omega[j] != 0.0) g += omega[j] * modes_[j];
  return g;
}

AffineOperator affine_operator(const RandomPotentialSpec& spec, const FeSpace& space, double eps) {
  auto stiff = assemble_stiffness(space).matrix;
  const auto& v0 = spec.v0;
  auto base = assemble_potential(space, [&v0](const Point& x) { return v0(x); }).matrix;
  std::vector<SparseMatrix> modes;
  modes.reserve(spec.s);
  for (std::size_t j = 1; j <= spec.s; ++j)
    modes.push_back(assemble_potential(space, [&spec, j](const Point& x) { return spec.mode(j, x); }).matrix);
  return AffineOperator(eps, std::move(stiff), std::move(base), std::move(modes));
}

double integrate_fe(const FeSpace& space, const Vector& u, const std::function<double(double, const Point&)>& f) {
  if (u.size() != space.dof_count()) throw ConfigError("integrate_fe: vector length mismatch");
  const auto& mesh = space.mesh();
  const int nv = mesh.vertices_per_cell();
  const auto& rule = mesh.dim() == 1 ? rule_1d() : rule_2d();
  double total = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto p = mesh.cell_coordinates(c);
    const auto verts = mesh.cell_vertices(c);
    double cell = 0.0;
    for (const auto& qp : rule) {
      Point x{0.0, 0.0};
      double value = 0.0;
      for (int a = 0; a < nv; ++a) {
        x[0] += qp.bary[a] * p[a][0];
        x[1] += qp.bary[a] * p[a][1];
        value += qp.bary[a] * u[verts[a]];
      }
      cell += qp.weight * f(value, x);
    }
    total += cell * mesh.cell_measure(c);
  }
  return total;
}

double energy(const AffineOperator& op, std::span<const double> omega, const Vector& u) {
  if (u.size() != op.size()) throw ConfigError("energy: vector length mismatch");
  const SparseMatrix g = op.materialize(omega);
  return 0.5 * u.dot(g * u);
}

double l2_inner(const SparseMatrix& mass, const Vector& u, const Vector& v) {
  if (u.size() != mass.rows() || v.size() != mass.rows()) throw ConfigError("l2_inner: vector length mismatch");
  return u.dot(mass * v);
}

double l2_norm(const SparseMatrix& mass, const Vector& u) { return std::sqrt(std::max(0.0, l2_inner(mass, u, u))); }

double h1_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, const Vector& u) {
  if (u.size() != stiffness.rows()) throw ConfigError("h1_norm: vector length mismatch");
  return std::sqrt(std::max(0.0, l2_inner(mass, u, u) + u.dot(stiffness * u)));
}

}  // namespace msuq
