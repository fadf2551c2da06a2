#include "msuq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msuq {

namespace {

// Splits a periodic coordinate into (cell index, local offset in [0,1]).
std::pair<Index, double> split_coordinate(double x, double lo, double h, Index n) {
  double t = (x - lo) / h;
  auto i = static_cast<Index>(std::floor(t));
  i = std::clamp<Index>(i, 0, n - 1);
  return {i, std::clamp(t - static_cast<double>(i), 0.0, 1.0)};
}

}  // namespace

PeriodicMesh PeriodicMesh::build(int dim, const Box& domain, std::array<Index, 2> cells_per_axis) {
  if (dim != 1 && dim != 2) throw ConfigError("mesh dimension must be 1 or 2, got " + std::to_string(dim));
  PeriodicMesh m;
  m.dim_ = dim;
  m.domain_ = domain;
  if (dim == 1) {
    cells_per_axis[1] = 1;
    m.domain_.lo[1] = 0.0;
    m.domain_.hi[1] = 1.0;
  }
  for (int k = 0; k < dim; ++k) {
    if (cells_per_axis[k] < 2)
      throw ConfigError("periodic mesh needs at least 2 cells per axis, got " + std::to_string(cells_per_axis[k]));
    if (!(domain.hi[k] > domain.lo[k])) throw ConfigError("degenerate mesh domain");
    m.spacing_[k] = (domain.hi[k] - domain.lo[k]) / static_cast<double>(cells_per_axis[k]);
  }
  m.cells_ = cells_per_axis;

  const Index nx = m.cells_[0];
  const Index ny = dim == 2 ? m.cells_[1] : 1;
  m.vertices_.resize(static_cast<std::size_t>(nx * ny));
  for (Index iy = 0; iy < ny; ++iy)
    for (Index ix = 0; ix < nx; ++ix) {
      Point p{m.domain_.lo[0] + static_cast<double>(ix) * m.spacing_[0], 0.0};
      if (dim == 2) p[1] = m.domain_.lo[1] + static_cast<double>(iy) * m.spacing_[1];
      m.vertices_[static_cast<std::size_t>(iy * nx + ix)] = p;
    }

  if (dim == 1) {
    m.num_cells_ = nx;
    m.cell_vertices_.reserve(static_cast<std::size_t>(2 * nx));
    for (Index e = 0; e < nx; ++e) {
      m.cell_vertices_.push_back(e);
      m.cell_vertices_.push_back((e + 1) % nx);
    }
  } else {
    m.num_cells_ = 2 * nx * ny;
    m.cell_vertices_.reserve(static_cast<std::size_t>(3 * m.num_cells_));
    for (Index iy = 0; iy < ny; ++iy)
      for (Index ix = 0; ix < nx; ++ix) {
        const Index v00 = m.vertex_index(ix, iy);
        const Index v10 = m.vertex_index(ix + 1, iy);
        const Index v01 = m.vertex_index(ix, iy + 1);
        const Index v11 = m.vertex_index(ix + 1, iy + 1);
        for (Index v : {v00, v10, v11}) m.cell_vertices_.push_back(v);
        for (Index v : {v00, v11, v01}) m.cell_vertices_.push_back(v);
      }
  }
  return m;
}

double PeriodicMesh::measure() const {
  double m = domain_.hi[0] - domain_.lo[0];
  if (dim_ == 2) m *= domain_.hi[1] - domain_.lo[1];
  return m;
}

Index PeriodicMesh::vertex_index(Index ix, Index iy) const {
  const Index nx = cells_[0];
  ix = ((ix % nx) + nx) % nx;
  if (dim_ == 1) return ix;
  const Index ny = cells_[1];
  iy = ((iy % ny) + ny) % ny;
  return iy * nx + ix;
}

std::span<const Index> PeriodicMesh::cell_vertices(Index c) const {
  const auto nv = static_cast<std::size_t>(vertices_per_cell());
  return {cell_vertices_.data() + static_cast<std::size_t>(c) * nv, nv};
}

std::array<Point, 3> PeriodicMesh::cell_coordinates(Index c) const {
  std::array<Point, 3> out{};
  if (dim_ == 1) {
    const double x0 = domain_.lo[0] + static_cast<double>(c) * spacing_[0];
    out[0] = {x0, 0.0};
    out[1] = {x0 + spacing_[0], 0.0};
    return out;
  }
  const Index sq = c / 2;
  const Index ix = sq % cells_[0];
  const Index iy = sq / cells_[0];
  const double x0 = domain_.lo[0] + static_cast<double>(ix) * spacing_[0];
  const double y0 = domain_.lo[1] + static_cast<double>(iy) * spacing_[1];
  const double x1 = x0 + spacing_[0];
  const double y1 = y0 + spacing_[1];
  if (c % 2 == 0) {
    out = {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}};
  } else {
    out = {Point{x0, y0}, Point{x1, y1}, Point{x0, y1}};
  }
  return out;
}

double PeriodicMesh::cell_measure(Index) const {
  return dim_ == 1 ? spacing_[0] : 0.5 * spacing_[0] * spacing_[1];
}

Point PeriodicMesh::wrap(const Point& x) const {
  Point out = x;
  for (int k = 0; k < dim_; ++k) {
    const double len = domain_.hi[k] - domain_.lo[k];
    double r = std::fmod(x[k] - domain_.lo[k], len);
    if (r < 0.0) r += len;
    if (r >= len) r = 0.0;
    out[k] = domain_.lo[k] + r;
  }
  if (dim_ == 1) out[1] = 0.0;
  return out;
}

PeriodicMesh::Location PeriodicMesh::locate(const Point& x) const {
  const Point w = wrap(x);
  const auto [ix, tx] = split_coordinate(w[0], domain_.lo[0], spacing_[0], cells_[0]);
  if (dim_ == 1) return {ix, {1.0 - tx, tx, 0.0}};
  const auto [iy, ty] = split_coordinate(w[1], domain_.lo[1], spacing_[1], cells_[1]);
  const Index sq = iy * cells_[0] + ix;
  if (tx >= ty) return {2 * sq, {1.0 - tx, tx - ty, ty}};
  return {2 * sq + 1, {1.0 - ty, tx, ty - tx}};
}

FeSpace build_space(int dim, const Box& domain, std::array<Index, 2> cells_per_axis) {
  return FeSpace(PeriodicMesh::build(dim, domain, cells_per_axis));
}

double FeSpace::eval(const Vector& coeffs, const Point& x) const {
  if (coeffs.size() != dof_count())
    throw ConfigError("coefficient vector has length " + std::to_string(coeffs.size()) + ", expected " +
                      std::to_string(dof_count()));
  const auto loc = mesh_.locate(x);
  const auto verts = mesh_.cell_vertices(loc.cell);
  double v = 0.0;
  for (std::size_t a = 0; a < verts.size(); ++a) v += loc.barycentric[a] * coeffs[verts[a]];
  return v;
}

std::vector<double> FeSpace::eval(const Vector& coeffs, std::span<const Point> points) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval(coeffs, p));
  return out;
}

NestingMap nest(const FeSpace& coarse, const FeSpace& fine) {
  const auto& cm = coarse.mesh();
  const auto& fm = fine.mesh();
  if (cm.dim() != fm.dim()) throw ConfigError("nesting: spaces have different dimensions");
  NestingMap map;
  for (int k = 0; k < cm.dim(); ++k) {
    const double tol = 1e-12 * (cm.domain().hi[k] - cm.domain().lo[k]);
    if (std::abs(cm.domain().lo[k] - fm.domain().lo[k]) > tol || std::abs(cm.domain().hi[k] - fm.domain().hi[k]) > tol)
      throw ConfigError("nesting: coarse and fine domains differ");
    const Index nc = cm.cells_per_axis(k);
    const Index nf = fm.cells_per_axis(k);
    if (nf % nc != 0 || nf / nc < 2)
      throw ConfigError("nesting: fine cells " + std::to_string(nf) + " is not an integer multiple (>= 2) of coarse cells " +
                        std::to_string(nc) + " on axis " + std::to_string(k));
    map.ratio_[k] = static_cast<int>(nf / nc);
  }

  const int dim = cm.dim();
  const Index nfx = fm.cells_per_axis(0);
  const Index nfy = dim == 2 ? fm.cells_per_axis(1) : 1;
  const int rx = map.ratio_[0];
  const int ry = dim == 2 ? map.ratio_[1] : 1;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(fine.dof_count() * (dim + 1)));
  for (Index fy = 0; fy < nfy; ++fy)
    for (Index fx = 0; fx < nfx; ++fx) {
      const Index row = fm.vertex_index(fx, fy);
      const Index cx = fx / rx;
      const double tx = static_cast<double>(fx % rx) / rx;
      if (dim == 1) {
        trip.emplace_back(row, cm.vertex_index(cx), 1.0 - tx);
        if (tx > 0.0) trip.emplace_back(row, cm.vertex_index(cx + 1), tx);
        continue;
      }
      const Index cy = fy / ry;
      const double ty = static_cast<double>(fy % ry) / ry;
      auto add = [&](Index ix, Index iy, double w) {
        if (w > 0.0) trip.emplace_back(row, cm.vertex_index(ix, iy), w);
      };
      if (tx >= ty) {
        add(cx, cy, 1.0 - tx);
        add(cx + 1, cy, tx - ty);
        add(cx + 1, cy + 1, ty);
      } else {
        add(cx, cy, 1.0 - ty);
        add(cx + 1, cy + 1, tx);
        add(cx, cy + 1, ty - tx);
      }
    }
  map.prolongation_.resize(fine.dof_count(), coarse.dof_count());
  map.prolongation_.setFromTriplets(trip.begin(), trip.end());
  map.prolongation_.makeCompressed();

  map.injection_.resize(static_cast<std::size_t>(coarse.dof_count()));
  const Index ncx = cm.cells_per_axis(0);
  const Index ncy = dim == 2 ? cm.cells_per_axis(1) : 1;
  for (Index cy = 0; cy < ncy; ++cy)
    for (Index cx = 0; cx < ncx; ++cx)
      map.injection_[static_cast<std::size_t>(cm.vertex_index(cx, cy))] = fm.vertex_index(cx * rx, cy * ry);
  return map;
}

Vector NestingMap::restrict_nodal(const Vector& fine) const {
  if (fine.size() != fine_dofs()) throw ConfigError("restrict_nodal: fine vector length mismatch");
  Vector out(coarse_dofs());
  for (Index i = 0; i < coarse_dofs(); ++i) out[i] = fine[injection_[static_cast<std::size_t>(i)]];
  return out;
}

}  // namespace msuq
