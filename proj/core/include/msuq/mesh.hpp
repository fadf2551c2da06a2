#pragma once

#include "msuq/types.hpp"

#include <array>
#include <span>
#include <vector>

namespace msuq {

/// Axis-aligned box [lo_k, hi_k]; only the first `dim` components are used.
struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
};

/// Uniform periodic simplicial mesh on a 1D interval or a 2D rectangle.
///
/// Vertices on the upper boundary are identified with the lower boundary, so
/// the vertex set coincides with the degree-of-freedom set. Each 2D square is
/// split along its lower-left to upper-right diagonal.
class PeriodicMesh {
 public:
  static PeriodicMesh build(int dim, const Box& domain, std::array<Index, 2> cells_per_axis);

  int dim() const { return dim_; }
  const Box& domain() const { return domain_; }
  Index cells_per_axis(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double measure() const;

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_cells() const { return num_cells_; }
  int vertices_per_cell() const { return dim_ + 1; }

  const Point& vertex(Index v) const { return vertices_[static_cast<std::size_t>(v)]; }
  Index vertex_index(Index ix, Index iy = 0) const;

  /// Global vertex (dof) indices of a cell, wrapped periodically.
  std::span<const Index> cell_vertices(Index c) const;
  /// Unwrapped coordinates of a cell's vertices (the cell's geometric image).
  std::array<Point, 3> cell_coordinates(Index c) const;
  double cell_measure(Index c) const;

  /// Representative of `x` in [lo_k, hi_k) per axis.
  Point wrap(const Point& x) const;

  struct Location {
    Index cell;
    std::array<double, 3> barycentric;
  };
  Location locate(const Point& x) const;

 private:
  int dim_ = 1;
  Box domain_;
  std::array<Index, 2> cells_{1, 1};
  std::array<double, 2> spacing_{1.0, 1.0};
  Index num_cells_ = 0;
  std::vector<Point> vertices_;
  std::vector<Index> cell_vertices_;
};

/// P1 finite element space on a periodic mesh.
class FeSpace {
 public:
  explicit FeSpace(PeriodicMesh mesh) : mesh_(std::move(mesh)) {}

  const PeriodicMesh& mesh() const { return mesh_; }
  Index dof_count() const { return mesh_.num_vertices(); }
  int dim() const { return mesh_.dim(); }
  Index dof(Index cell, int local) const { return mesh_.cell_vertices(cell)[static_cast<std::size_t>(local)]; }

  /// Values of the piecewise-linear interpolant with nodal values `coeffs`.
  std::vector<double> eval(const Vector& coeffs, std::span<const Point> points) const;
  double eval(const Vector& coeffs, const Point& x) const;

  /// Nodal interpolant of a function.
  template <class F>
  Vector interpolate(F&& f) const {
    Vector out(dof_count());
    for (Index i = 0; i < dof_count(); ++i) out[i] = f(mesh_.vertex(i));
    return out;
  }

 private:
  PeriodicMesh mesh_;
};

FeSpace build_space(int dim, const Box& domain, std::array<Index, 2> cells_per_axis);

/// Coarse-to-fine nesting of two uniform periodic spaces on the same box.
class NestingMap {
 public:
  int ratio(int axis) const { return ratio_[axis]; }
  /// N_h x N_H nodal interpolation of coarse hats at fine vertices.
  const SparseMatrix& prolongation() const { return prolongation_; }
  Vector prolong(const Vector& coarse) const { return prolongation_ * coarse; }
  /// Nodal injection: coarse vertex (I,J) reads fine vertex (rI, rJ).
  Vector restrict_nodal(const Vector& fine) const;
  Index coarse_dofs() const { return prolongation_.cols(); }
  Index fine_dofs() const { return prolongation_.rows(); }

  friend NestingMap nest(const FeSpace& coarse, const FeSpace& fine);

 private:
  std::array<int, 2> ratio_{1, 1};
  SparseMatrix prolongation_;
  std::vector<Index> injection_;
};

NestingMap nest(const FeSpace& coarse, const FeSpace& fine);

}  // namespace msuq
