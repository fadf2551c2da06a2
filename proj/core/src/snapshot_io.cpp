#include "msuq/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace msuq {

namespace {

constexpr std::array<char, 6> kMagic{'M', 'S', 'P', 'O', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot files assume a little-endian host");

template <class T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ConfigError("truncated snapshot file " + path.string());
  return value;
}

}  // namespace

void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& file) {
  if (file.dim != 1 && file.dim != 2) throw ConfigError("snapshot file: dim must be 1 or 2");
  if (static_cast<std::uint64_t>(file.columns.rows()) != file.fine_dofs)
    throw ConfigError("snapshot file: column length differs from N_h");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write snapshot file " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put<std::uint64_t>(out, file.dim);
  put<std::uint64_t>(out, file.fine_dofs);
  put<std::uint64_t>(out, file.coarse_dofs);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(file.columns.cols()));
  out.write(reinterpret_cast<const char*>(file.columns.data()),
            static_cast<std::streamsize>(file.columns.size() * sizeof(double)));
  if (!out) throw ConfigError("error writing snapshot file " + path.string());
}

SnapshotFile read_snapshot_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read snapshot file " + path.string());
  std::array<char, 6> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ConfigError("bad magic in snapshot file " + path.string());
  if (get<std::uint32_t>(in, path) != kVersion) throw ConfigError("unsupported snapshot file version in " + path.string());
  SnapshotFile file;
  file.dim = get<std::uint64_t>(in, path);
  file.fine_dofs = get<std::uint64_t>(in, path);
  file.coarse_dofs = get<std::uint64_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (file.dim != 1 && file.dim != 2) throw ConfigError("snapshot file: dim must be 1 or 2");
  file.columns.resize(static_cast<Index>(file.fine_dofs), static_cast<Index>(count));
  if (!in.read(reinterpret_cast<char*>(file.columns.data()),
               static_cast<std::streamsize>(file.columns.size() * sizeof(double))))
    throw ConfigError("truncated snapshot file " + path.string());
  return file;
}

std::uint64_t fnv1a_64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace msuq
