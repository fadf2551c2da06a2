#pragma once

#include "msuq/mesh.hpp"
#include "msuq/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace msuq {

/// (x^2 - 4)^2, two wells at x = +-2.
double double_well(double x);

/// Piecewise-constant checkerboard: square (m, n) = floor(x / size) takes `hi`
/// when m + n is even and `lo` otherwise.
double checkerboard(const Point& x, double square_size, double lo, double hi);

enum class BaseKind { constant, double_well, checkerboard, custom };

/// Deterministic part v0 of the potential.
struct BasePotential {
  BaseKind kind = BaseKind::constant;
  double value = 1.0;  // constant
  double square_size = 0.0625;
  double lo = 0.0;
  double hi = 2.0;
  // custom closed form; `custom_min`/`custom_max` must bound it on the domain
  std::function<double(const Point&)> custom;
  double custom_min = 0.0;
  double custom_max = 0.0;

  static BasePotential constant_value(double c);
  static BasePotential double_well_1d();
  static BasePotential checkerboard_2d(double square_size, double lo, double hi);

  double operator()(const Point& x) const;
  /// Exact infimum and supremum over the box.
  std::pair<double, double> range(const Box& domain, int dim) const;
};

/// Amplitude law and spatial shape of the random modes v_j.
enum class ModeForm {
  power_1d,     // sigma / j^q * sin(j pi x)
  rational_1d,  // sigma / (1 + (j pi)^q) * sin(j pi x)
  power_2d,     // sigma / j^q * sin(j pi x) sin(j pi y)
};

/// V(x, omega) = v0(x) + sum_{j=1..s} omega_j v_j(x).
struct RandomPotentialSpec {
  BasePotential v0;
  ModeForm form = ModeForm::rational_1d;
  std::size_t s = 0;
  double sigma = 1.0;
  double q = 2.0;

  double amplitude(std::size_t j) const;
  double mode(std::size_t j, const Point& x) const;  // amplitude(j) * shape_j(x)
  double eval(std::span<const double> omega, const Point& x) const;
  std::function<double(const Point&)> mode_function(std::size_t j) const;

  /// Stable textual description, used for hashing and sidecars.
  std::string describe() const;
};

struct PotentialBounds {
  double v_min = 0.0;
  double v_max = 0.0;
  bool nonnegative = true;  // v_min >= 0
};

/// Envelope bounds: v0 range widened by 1/2 sum_j |amplitude_j| (|omega_j| <= 1/2, |shape| <= 1).
PotentialBounds potential_bounds(const RandomPotentialSpec& spec, const Box& domain, int dim);

std::string to_string(ModeForm form);
ModeForm mode_form_from_string(const std::string& name);

}  // namespace msuq
