#pragma once

#include "msuq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace msuq {

using PointSet = std::vector<std::vector<double>>;  // N points, each of length s

/// Randomly shifted rank-1 lattice rule on [-1/2, 1/2)^s.
struct LatticeRule {
  std::uint64_t n = 1;
  std::vector<std::uint64_t> z;             // generating vector, 1 <= z_j < N
  std::vector<std::vector<double>> shifts;  // R shifts in [0,1)^s
  std::uint64_t seed = 0;

  std::size_t dim() const { return z.size(); }
  std::size_t shift_count() const { return shifts.size(); }
};

/// Draws R uniform shifts from `seed`.
LatticeRule make_lattice_rule(std::uint64_t n, std::vector<std::uint64_t> z, std::size_t shift_count, std::uint64_t seed);

/// Point j = frac(j z / N + shift) - 1/2, j = 0..N-1. shift_index < 0 means no shift.
PointSet lattice_points(const LatticeRule& rule, long shift_index);

/// Shift-averaged squared worst-case error of a lattice rule in the unanchored
/// weighted Sobolev space with product weights:
///   -1 + (1/N) sum_k prod_j (1 + gamma_j B2({k z_j / N})),  B2(x) = x^2 - x + 1/6.
double shift_averaged_error_squared(std::uint64_t n, std::span<const std::uint64_t> z, std::span<const double> weights);

/// Component-by-component generating vector (z_1 = 1, ties to the smallest candidate). N must be prime.
std::vector<std::uint64_t> cbc_generating_vector(std::uint64_t n, std::size_t s, std::span<const double> weights);

/// gamma_j = j^(-decay).
std::vector<double> product_weights(std::size_t s, double decay = 2.0);

std::uint64_t euler_totient(std::uint64_t n);
bool is_prime(std::uint64_t n);
/// Smallest prime >= n.
std::uint64_t next_prime(std::uint64_t n);

/// N i.i.d. uniform points on [-1/2, 1/2)^s.
PointSet mc_points(std::uint64_t seed, std::size_t n, std::size_t s);

/// Generating-vector text file: first line "N s", then s integers one per line.
void write_generating_vector(const std::filesystem::path& path, std::uint64_t n, std::span<const std::uint64_t> z);
std::pair<std::uint64_t, std::vector<std::uint64_t>> read_generating_vector(const std::filesystem::path& path);

}  // namespace msuq
