#pragma once

#include "msuq/mesh.hpp"
#include "msuq/potentials.hpp"
#include "msuq/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace msuq {

enum class MatrixRole { mass, stiffness, potential, constraint_cross, generic };

/// Assembled sparse matrix tagged with its role. Every role except
/// constraint_cross (N_H x N_h) is square and symmetric.
struct SymSparse {
  SparseMatrix matrix;
  MatrixRole role = MatrixRole::generic;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
};

using ScalarField = std::function<double(const Point&)>;

SymSparse assemble_mass(const FeSpace& space);
SymSparse assemble_stiffness(const FeSpace& space);
/// Entries (v phi_i, phi_j) by per-cell quadrature: 3-point Gauss (1D), 6-point degree-4 rule (2D).
SymSparse assemble_potential(const FeSpace& space, const ScalarField& v);

/// Cross mass matrix A_ij = (phi_i^H, phi_j^h), N_H x N_h.
SymSparse constraint_cross(const FeSpace& fine, const FeSpace& coarse, const NestingMap& nesting);

/// alpha_i = (1, phi_i^H).
Vector hat_integrals(const FeSpace& coarse);

/// G(omega) = (eps^2/2) S + V0 + sum_j omega_j V_j with all matrices assembled once.
class AffineOperator {
 public:
  AffineOperator() = default;
  AffineOperator(double eps, SparseMatrix stiffness, SparseMatrix v0, std::vector<SparseMatrix> modes);

  double eps() const { return eps_; }
  std::size_t num_modes() const { return modes_.size(); }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& v0() const { return v0_; }
  const SparseMatrix& mode(std::size_t j) const { return modes_[j]; }
  /// (eps^2/2) S + V0.
  const SparseMatrix& base() const { return base_; }
  Index size() const { return base_.rows(); }

  /// Sparse linear combination; components of omega beyond num_modes() must be absent.
  SparseMatrix materialize(std::span<const double> omega) const;

 private:
  double eps_ = 1.0;
  SparseMatrix stiffness_;
  SparseMatrix v0_;
  SparseMatrix base_;
  std::vector<SparseMatrix> modes_;
  bool shared_pattern_ = false;
};

AffineOperator affine_operator(const RandomPotentialSpec& spec, const FeSpace& space, double eps);

/// Integral of f(u_h(x), x) over the domain with the assembly quadrature.
double integrate_fe(const FeSpace& space, const Vector& u, const std::function<double(double, const Point&)>& f);

/// 1/2 u^T G(omega) u.
double energy(const AffineOperator& op, std::span<const double> omega, const Vector& u);

double l2_inner(const SparseMatrix& mass, const Vector& u, const Vector& v);
double l2_norm(const SparseMatrix& mass, const Vector& u);
/// sqrt(u^T M u + u^T S u).
double h1_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, const Vector& u);

}  // namespace msuq
