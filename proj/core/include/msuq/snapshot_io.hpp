#pragma once

#include "msuq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace msuq {

/// Column block stored in the MSPOD1 binary layout (little-endian).
struct SnapshotFile {
  std::uint64_t dim = 1;
  std::uint64_t fine_dofs = 0;
  std::uint64_t coarse_dofs = 0;
  Matrix columns;  // fine_dofs x count
};

void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& file);
SnapshotFile read_snapshot_file(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a_64(std::string_view bytes);

}  // namespace msuq
