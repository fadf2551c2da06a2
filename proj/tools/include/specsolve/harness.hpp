#pragma once

#include "msuq/uq.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specsolve {

using msuq::Index;

enum class Study { solve_evp, uq, h_study, s_study, n_study, q_study, localization };

std::string to_string(Study study);
Study study_from_string(const std::string& name);

struct EmitFlags {
  bool csv = true;
  bool fields = false;
  bool json_summary = true;
  bool pod_modes = false;  // MSPOD1 files plus JSON sidecars per coarse node
};

struct ExperimentConfig {
  Study study = Study::uq;
  msuq::UqConfig uq;
  std::filesystem::path out_dir = "out";
  EmitFlags emit;
  nlohmann::json source;  // parsed document, echoed into summaries

  // solve-evp, h-study
  std::vector<std::array<Index, 2>> coarse_levels;
  bool coarse_fem = true;
  // solve-evp, localization: fixed realization (empty: omega = 0 for solve-evp, drawn from the seed for localization)
  std::vector<double> omega;
  // s-study
  std::vector<std::size_t> s_values;
  // n-study
  std::vector<std::uint64_t> n_values;
  std::vector<msuq::SamplerKind> n_samplers{msuq::SamplerKind::qmc, msuq::SamplerKind::mc};
  std::uint64_t reference_n = 0;
  // uq, n-study: externally supplied reference means
  std::vector<double> reference;
  // q-study
  std::vector<Index> q_values;
  // localization
  bool ipr = true;
};

/// Strict parse: unknown keys, wrong types and inconsistent meshes raise msuq::ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, Study study);
ExperimentConfig load_config(const std::filesystem::path& path, Study study);

struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

/// --threads beats SPECSOLVE_THREADS, which beats the config value.
void apply_overrides(ExperimentConfig& cfg, const Overrides& overrides, const char* env_threads);

/// Runs the study and writes its artifacts below cfg.out_dir.
void run_study(const ExperimentConfig& cfg);

/// 0 ok, 2 config error, 3 numerical failure, 4 admissibility violation.
int exit_code_for(const std::exception& e);

// Fixed CSV schemas.
inline const std::vector<std::string> kEigenvaluesHeader{
    "N_H",      "k",        "lambda_fem",        "lambda_ms",        "abs_error",       "rel_error",      "l2_error",
    "h1_error", "order",    "lambda_coarse_fem", "coarse_abs_error", "coarse_l2_error", "coarse_h1_error"};
inline const std::vector<std::string> kSamplesHeader{"shift", "index", "k", "lambda", "functional", "omega"};
inline const std::vector<std::string> kHStudyHeader{"N_H", "k", "mean_fem", "mean_approx", "abs_error", "rel_error",
                                                    "order"};
inline const std::vector<std::string> kSStudyHeader{"s", "k", "mean", "reference", "abs_error"};
inline const std::vector<std::string> kNStudyHeader{"sampler", "N", "k", "mean", "reference", "rms_error"};
inline const std::vector<std::string> kQStudyHeader{"Q",         "k",     "mean_pod",        "mean_fem",
                                                    "abs_error", "ranks", "offline_seconds", "online_seconds"};
inline const std::vector<std::string> kLocalizationHeader{"k",         "lambda_fem", "lambda_approx", "abs_error",
                                                          "rel_error", "ipr_fem",    "ipr_approx"};

/// summary.json content of a uq run; doubles are written in shortest round-trip form.
nlohmann::json summary_to_json(const ExperimentConfig& cfg, const msuq::UqResult& result);

/// Statistics recovered from summary.json.
struct Summary {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<std::vector<double>> shift_means;
  std::vector<double> rms;
  double functional_mean = 0.0;
  std::vector<double> functional_shift_means;
  std::size_t sample_count = 0;
  double offline_seconds = 0.0;
  double online_seconds = 0.0;
  double admissibility = 0.0;
};
Summary summary_from_json(const nlohmann::json& doc);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace specsolve
