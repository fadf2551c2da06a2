#include "output.hpp"

#include "msuq/snapshot_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace specsolve {

using msuq::ConfigError;
using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()), path_(path) {
  if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CsvWriter: row width does not match header of " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) out_ << format_double(v);
          else if constexpr (std::is_same_v<T, long long>) out_ << v;
          else if constexpr (std::is_same_v<T, std::string>) out_ << v;
        },
        cells[i]);
  }
  out_ << '\n';
  if (!out_) throw ConfigError("write failed for '" + path_.string() + "'");
}

void write_field(const std::filesystem::path& path, const msuq::FeSpace& space, const msuq::Vector& values) {
  const bool two = space.dim() == 2;
  CsvWriter csv(path, two ? std::vector<std::string>{"x", "y", "value"} : std::vector<std::string>{"x", "value"});
  for (Index i = 0; i < space.dof_count(); ++i) {
    const auto p = space.mesh().vertex(i);
    if (two) csv.row({p[0], p[1], values[i]});
    else csv.row({p[0], values[i]});
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string potential_hash(const msuq::RandomPotentialSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << msuq::fnv1a_64(spec.describe());
  return os.str();
}

void write_pod_modes(const std::filesystem::path& dir, const msuq::PodModel& model, const msuq::UqConfig& cfg) {
  std::filesystem::create_directories(dir);
  const auto hash = potential_hash(cfg.potential);
  for (const auto& pod : model.pods) {
    msuq::SnapshotFile file;
    file.dim = static_cast<std::uint64_t>(cfg.mesh.dim);
    file.fine_dofs = static_cast<std::uint64_t>(pod.zeta0.size());
    file.coarse_dofs = static_cast<std::uint64_t>(model.pods.size());
    file.columns.resize(pod.zeta0.size(), pod.rank() + 1);
    file.columns.col(0) = pod.zeta0;
    file.columns.rightCols(pod.rank()) = pod.modes;
    char name[32];
    std::snprintf(name, sizeof(name), "node_%05lld", static_cast<long long>(pod.node));
    msuq::write_snapshot_file(dir / (std::string(name) + ".mspod"), file);
    json side;
    side["file"] = std::string(name) + ".mspod";
    side["node"] = pod.node;
    side["columns"] = "zeta0 followed by the fluctuation modes";
    side["rank"] = pod.rank();
    side["sigma"] = std::vector<double>(pod.sigma.data(), pod.sigma.data() + pod.sigma.size());
    side["alpha"] = model.alpha[pod.node];
    side["rho"] = pod.rho;
    side["Q"] = model.snapshot_count;
    side["potential_hash"] = hash;
    side["potential"] = cfg.potential.describe();
    write_json(dir / (std::string(name) + ".json"), side);
  }
}

json summary_to_json(const ExperimentConfig& cfg, const msuq::UqResult& r) {
  auto vec = [](const msuq::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json doc;
  doc["study"] = to_string(cfg.study);
  doc["solver"] = msuq::to_string(cfg.uq.solver);
  doc["sampler"] = msuq::to_string(cfg.uq.sampler.kind);
  doc["N"] = cfg.uq.sampler.n;
  doc["shifts"] = r.shift_means.size();
  doc["seed"] = cfg.uq.sampler.seed;
  doc["k"] = r.k;
  doc["sample_count"] = r.sample_count;
  doc["mean"] = vec(r.mean);
  doc["variance"] = vec(r.variance);
  json shifts = json::array();
  for (const auto& s : r.shift_means) shifts.push_back(vec(s));
  doc["shift_means"] = shifts;

  const bool external = !cfg.reference.empty();
  if (r.shift_means.size() >= 2) {
    std::vector<double> rms;
    for (Index i = 0; i < r.k; ++i) {
      std::vector<double> est;
      for (const auto& s : r.shift_means) est.push_back(s[i]);
      rms.push_back(msuq::rms_over_shifts(est, external ? cfg.reference[static_cast<std::size_t>(i)] : r.mean[i]));
    }
    doc["rms"] = rms;
  } else {
    doc["rms"] = nullptr;
  }
  doc["rms_reference"] = external ? "params.reference" : "mean of shift means";
  doc["functional"] = {{"mean", r.functional_mean}, {"shift_means", r.functional_shift_means}};
  doc["timing"] = {{"offline_seconds", r.offline_seconds}, {"online_seconds", r.online_seconds}};
  doc["admissibility"] = r.admissibility;
  if (r.pod_model) {
    std::vector<Index> ranks;
    for (const auto& p : r.pod_model->pods) ranks.push_back(p.rank());
    doc["pod_ranks"] = ranks;
  }
  doc["potential_hash"] = potential_hash(cfg.uq.potential);
  doc["config"] = cfg.source;
  return doc;
}

Summary summary_from_json(const json& doc) {
  try {
    Summary s;
    s.mean = doc.at("mean").get<std::vector<double>>();
    s.variance = doc.at("variance").get<std::vector<double>>();
    s.shift_means = doc.at("shift_means").get<std::vector<std::vector<double>>>();
    if (!doc.at("rms").is_null()) s.rms = doc.at("rms").get<std::vector<double>>();
    s.functional_mean = doc.at("functional").at("mean").get<double>();
    s.functional_shift_means = doc.at("functional").at("shift_means").get<std::vector<double>>();
    s.sample_count = doc.at("sample_count").get<std::size_t>();
    s.offline_seconds = doc.at("timing").at("offline_seconds").get<double>();
    s.online_seconds = doc.at("timing").at("online_seconds").get<double>();
    s.admissibility = doc.at("admissibility").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary.json: ") + e.what());
  }
}

}  // namespace specsolve
