#include "msuq/sampling.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace msuq {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double bernoulli2(double x) { return x * x - x + 1.0 / 6.0; }

}  // namespace

LatticeRule make_lattice_rule(std::uint64_t n, std::vector<std::uint64_t> z, std::size_t shift_count, std::uint64_t seed) {
  if (n < 1) throw ConfigError("lattice rule needs N >= 1");
  for (auto zj : z)
    if (zj < 1 || zj >= n) throw ConfigError("generating vector component out of range [1, N)");
  LatticeRule rule;
  rule.n = n;
  rule.z = std::move(z);
  rule.seed = seed;
  std::mt19937_64 rng(seed);
  rule.shifts.resize(shift_count, std::vector<double>(rule.z.size()));
  for (auto& shift : rule.shifts)
    for (auto& c : shift) c = unit_uniform(rng);
  return rule;
}

PointSet lattice_points(const LatticeRule& rule, long shift_index) {
  const std::size_t s = rule.dim();
  const std::vector<double>* shift = nullptr;
  if (shift_index >= 0) {
    if (static_cast<std::size_t>(shift_index) >= rule.shift_count()) throw ConfigError("lattice_points: shift index out of range");
    shift = &rule.shifts[static_cast<std::size_t>(shift_index)];
  }
  const double inv_n = 1.0 / static_cast<double>(rule.n);
  PointSet pts(rule.n, std::vector<double>(s));
  for (std::uint64_t j = 0; j < rule.n; ++j)
    for (std::size_t d = 0; d < s; ++d) {
      const auto r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(j) * rule.z[d]) % rule.n);
      double x = static_cast<double>(r) * inv_n;
      if (shift) {
        x += (*shift)[d];
        if (x >= 1.0) x -= 1.0;
      }
      pts[j][d] = x - 0.5;
    }
  return pts;
}

double shift_averaged_error_squared(std::uint64_t n, std::span<const std::uint64_t> z, std::span<const double> weights) {
  if (weights.size() < z.size()) throw ConfigError("shift_averaged_error_squared: too few weights");
  double sum = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    double prod = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const auto r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(k) * z[j]) % n);
      prod *= 1.0 + weights[j] * bernoulli2(static_cast<double>(r) / static_cast<double>(n));
    }
    sum += prod;
  }
  return -1.0 + sum / static_cast<double>(n);
}

std::vector<std::uint64_t> cbc_generating_vector(std::uint64_t n, std::size_t s, std::span<const double> weights) {
  if (!is_prime(n)) throw ConfigError("cbc_generating_vector: N = " + std::to_string(n) + " is not prime");
  if (weights.size() < s) throw ConfigError("cbc_generating_vector: need one weight per dimension");
  for (std::size_t j = 0; j < s; ++j)
    if (!(weights[j] > 0.0)) throw ConfigError("cbc_generating_vector: weights must be positive");
  std::vector<std::uint64_t> z;
  if (s == 0) return z;

  std::vector<double> b2(n);
  for (std::uint64_t k = 0; k < n; ++k) b2[k] = bernoulli2(static_cast<double>(k) / static_cast<double>(n));

  // prod[k] = prod_{chosen j} (1 + gamma_j B2({k z_j / N}))
  std::vector<double> prod(n, 1.0);
  auto accept = [&](std::uint64_t zj, double gamma) {
    z.push_back(zj);
    for (std::uint64_t k = 0; k < n; ++k) prod[k] *= 1.0 + gamma * b2[(k * zj) % n];
  };
  accept(1, weights[0]);
  for (std::size_t j = 1; j < s; ++j) {
    const double gamma = weights[j];
    std::uint64_t best = 1;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::uint64_t cand = 1; cand < n; ++cand) {
      double sum = 0.0;
      std::uint64_t idx = 0;
      for (std::uint64_t k = 0; k < n; ++k) {
        sum += prod[k] * (1.0 + gamma * b2[idx]);
        idx += cand;
        if (idx >= n) idx -= n;
      }
      if (sum < best_value) {
        best_value = sum;
        best = cand;
      }
    }
    accept(best, gamma);
  }
  return z;
}

std::vector<double> product_weights(std::size_t s, double decay) {
  std::vector<double> w(s);
  for (std::size_t j = 0; j < s; ++j) w[j] = std::pow(static_cast<double>(j + 1), -decay);
  return w;
}

std::uint64_t euler_totient(std::uint64_t n) {
  if (n == 0) return 0;
  std::uint64_t result = n;
  std::uint64_t m = n;
  for (std::uint64_t p = 2; p * p <= m; ++p)
    if (m % p == 0) {
      while (m % p == 0) m /= p;
      result -= result / p;
    }
  if (m > 1) result -= result / m;
  return result;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

std::uint64_t next_prime(std::uint64_t n) {
  while (!is_prime(n)) ++n;
  return n;
}

PointSet mc_points(std::uint64_t seed, std::size_t n, std::size_t s) {
  std::mt19937_64 rng(seed);
  PointSet pts(n, std::vector<double>(s));
  for (auto& p : pts)
    for (auto& c : p) c = unit_uniform(rng) - 0.5;
  return pts;
}

void write_generating_vector(const std::filesystem::path& path, std::uint64_t n, std::span<const std::uint64_t> z) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write generating vector file " + path.string());
  out << n << ' ' << z.size() << '\n';
  for (auto zj : z) out << zj << '\n';
}

std::pair<std::uint64_t, std::vector<std::uint64_t>> read_generating_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read generating vector file " + path.string());
  std::uint64_t n = 0;
  std::size_t s = 0;
  if (!(in >> n >> s)) throw ConfigError("generating vector file: malformed header in " + path.string());
  std::vector<std::uint64_t> z(s);
  for (auto& zj : z)
    if (!(in >> zj)) throw ConfigError("generating vector file: expected " + std::to_string(s) + " components");
  for (auto zj : z)
    if (zj < 1 || zj >= n) throw ConfigError("generating vector file: component out of range");
  return {n, std::move(z)};
}

}  // namespace msuq
