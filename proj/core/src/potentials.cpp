#include "msuq/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msuq {

double double_well(double x) {
  const double t = x * x - 4.0;
  return t * t;
}

double checkerboard(const Point& x, double square_size, double lo, double hi) {
  const auto m = static_cast<long long>(std::floor(x[0] / square_size));
  const auto n = static_cast<long long>(std::floor(x[1] / square_size));
  return ((m + n) % 2 + 2) % 2 == 0 ? hi : lo;
}

BasePotential BasePotential::constant_value(double c) {
  BasePotential b;
  b.kind = BaseKind::constant;
  b.value = c;
  return b;
}

BasePotential BasePotential::double_well_1d() {
  BasePotential b;
  b.kind = BaseKind::double_well;
  return b;
}

BasePotential BasePotential::checkerboard_2d(double square_size, double lo, double hi) {
  BasePotential b;
  b.kind = BaseKind::checkerboard;
  b.square_size = square_size;
  b.lo = lo;
  b.hi = hi;
  return b;
}

double BasePotential::operator()(const Point& x) const {
  switch (kind) {
    case BaseKind::constant: return value;
    case BaseKind::double_well: return double_well(x[0]);
    case BaseKind::checkerboard: return checkerboard(x, square_size, lo, hi);
    case BaseKind::custom: return custom(x);
  }
  return 0.0;
}

std::pair<double, double> BasePotential::range(const Box& domain, int) const {
  switch (kind) {
    case BaseKind::constant: return {value, value};
    case BaseKind::checkerboard: return {std::min(lo, hi), std::max(lo, hi)};
    case BaseKind::custom: return {custom_min, custom_max};
    case BaseKind::double_well: {
      const double a = domain.lo[0];
      const double b = domain.hi[0];
      double vmin = std::min(double_well(a), double_well(b));
      double vmax = std::max(double_well(a), double_well(b));
      for (double c : {-2.0, 0.0, 2.0})
        if (c > a && c < b) {
          vmin = std::min(vmin, double_well(c));
          vmax = std::max(vmax, double_well(c));
        }
      return {vmin, vmax};
    }
  }
  return {0.0, 0.0};
}

double RandomPotentialSpec::amplitude(std::size_t j) const {
  const double jd = static_cast<double>(j);
  switch (form) {
    case ModeForm::power_1d:
    case ModeForm::power_2d: return sigma / std::pow(jd, q);
    case ModeForm::rational_1d: return sigma / (1.0 + std::pow(jd * std::numbers::pi, q));
  }
  return 0.0;
}

double RandomPotentialSpec::mode(std::size_t j, const Point& x) const {
  const double w = static_cast<double>(j) * std::numbers::pi;
  double shape = std::sin(w * x[0]);
  if (form == ModeForm::power_2d) shape *= std::sin(w * x[1]);
  return amplitude(j) * shape;
}

double RandomPotentialSpec::eval(std::span<const double> omega, const Point& x) const {
  if (omega.size() != s)
    throw ConfigError("omega has " + std::to_string(omega.size()) + " components, potential expects " + std::to_string(s));
  double v = v0(x);
  for (std::size_t j = 1; j <= s; ++j) v += omega[j - 1] * mode(j, x);
  return v;
}

std::function<double(const Point&)> RandomPotentialSpec::mode_function(std::size_t j) const {
  return [spec = *this, j](const Point& x) { return spec.mode(j, x); };
}

std::string RandomPotentialSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "v0=";
  switch (v0.kind) {
    case BaseKind::constant: os << "constant(" << v0.value << ")"; break;
    case BaseKind::double_well: os << "double_well"; break;
    case BaseKind::checkerboard: os << "checkerboard(" << v0.square_size << "," << v0.lo << "," << v0.hi << ")"; break;
    case BaseKind::custom: os << "custom"; break;
  }
  os << ";form=" << to_string(form) << ";s=" << s << ";sigma=" << sigma << ";q=" << q;
  return os.str();
}

PotentialBounds potential_bounds(const RandomPotentialSpec& spec, const Box& domain, int dim) {
  auto [lo, hi] = spec.v0.range(domain, dim);
  double envelope = 0.0;
  for (std::size_t j = 1; j <= spec.s; ++j) envelope += 0.5 * std::abs(spec.amplitude(j));
  PotentialBounds b;
  b.v_min = lo - envelope;
  b.v_max = hi + envelope;
  b.nonnegative = b.v_min >= 0.0;
  return b;
}

std::string to_string(ModeForm form) {
  switch (form) {
    case ModeForm::power_1d: return "power_1d";
    case ModeForm::rational_1d: return "rational_1d";
    case ModeForm::power_2d: return "power_2d";
  }
  return "unknown";
}

ModeForm mode_form_from_string(const std::string& name) {
  if (name == "power_1d") return ModeForm::power_1d;
  if (name == "rational_1d") return ModeForm::rational_1d;
  if (name == "power_2d") return ModeForm::power_2d;
  throw ConfigError("unknown mode form '" + name + "' (expected power_1d | rational_1d | power_2d)");
}

}  // namespace msuq
