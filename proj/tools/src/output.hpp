#pragma once

#include "specsolve/harness.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace specsolve {

/// Empty cell, number, integer or text.
using Cell = std::variant<std::monostate, double, long long, std::string>;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

/// 1D: x,value; 2D: x,y,value at every degree of freedom.
void write_field(const std::filesystem::path& path, const msuq::FeSpace& space, const msuq::Vector& values);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// One MSPOD1 file per coarse node holding [zeta^0, zeta^1..zeta^m], plus a JSON sidecar.
void write_pod_modes(const std::filesystem::path& dir, const msuq::PodModel& model, const msuq::UqConfig& cfg);

/// Hex FNV-1a hash of the potential description.
std::string potential_hash(const msuq::RandomPotentialSpec& spec);

}  // namespace specsolve
