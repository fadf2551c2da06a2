#include <doctest.h>

#include "specsolve/harness.hpp"

#include <filesystem>
#include <fstream>

using namespace specsolve;
using nlohmann::json;

namespace {

json base_doc() {
  return json::parse(R"({
    "k": 1,
    "mesh": {"dim": 1, "lo": -1, "hi": 1, "fine": 64, "coarse": 8},
    "potential": {"v0": {"kind": "constant", "value": 1.0}, "form": "rational_1d", "s": 4, "q": 2.0},
    "sampler": {"kind": "qmc", "n": 7, "shifts": 2, "seed": 5}
  })");
}

bool rejects(const json& doc, Study study = Study::uq) {
  try {
    parse_config(doc, study);
  } catch (const msuq::ConfigError&) {
    return true;
  }
  return false;
}

}  // namespace

TEST_CASE("study names round trip") {
  for (auto s : {Study::solve_evp, Study::uq, Study::h_study, Study::s_study, Study::n_study, Study::q_study,
                 Study::localization})
    CHECK(study_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(study_from_string("evp2"), msuq::ConfigError);
}

TEST_CASE("minimal config parses with defaults") {
  auto cfg = parse_config(base_doc(), Study::uq);
  CHECK(cfg.uq.mesh.fine[0] == 64);
  CHECK(cfg.uq.mesh.coarse[0] == 8);
  CHECK(cfg.uq.potential.s == 4);
  CHECK(cfg.uq.sampler.n == 7);
  CHECK(cfg.uq.sampler.seed == 5);
  CHECK(cfg.uq.solver == msuq::SolverKind::msfem);
  CHECK(cfg.emit.csv);
  CHECK(cfg.emit.json_summary);
  CHECK_FALSE(cfg.emit.fields);
}

TEST_CASE("unknown keys are rejected at every level") {
  auto doc = base_doc();
  doc["sovler"] = "fem";
  CHECK(rejects(doc));
  doc = base_doc();
  doc["mesh"]["cells"] = 4;
  CHECK(rejects(doc));
  doc = base_doc();
  doc["potential"]["v0"]["amplitude"] = 2.0;
  CHECK(rejects(doc));
}

TEST_CASE("wrong types and values are rejected") {
  auto doc = base_doc();
  doc["k"] = "one";
  CHECK(rejects(doc));
  doc = base_doc();
  doc["sampler"]["n"] = -3;
  CHECK(rejects(doc));
  doc = base_doc();
  doc["eps"] = 0.0;
  CHECK(rejects(doc));
  doc = base_doc();
  doc["solver"] = "lod";
  CHECK(rejects(doc));
  doc = base_doc();
  doc["potential"]["form"] = "power_2d";
  CHECK(rejects(doc));
}

TEST_CASE("mesh ratios must be integral") {
  auto doc = base_doc();
  doc["mesh"]["fine"] = 60;
  CHECK(rejects(doc));
  doc["mesh"]["fine"] = 8;
  CHECK(rejects(doc));
  doc["mesh"]["fine"] = 16;
  CHECK_FALSE(rejects(doc));
}

TEST_CASE("study key must match the command") {
  auto doc = base_doc();
  doc["study"] = "uq";
  CHECK_FALSE(rejects(doc, Study::uq));
  CHECK(rejects(doc, Study::n_study));
}

TEST_CASE("study params are checked") {
  auto doc = base_doc();
  doc["params"] = {{"s_values", {2, 8}}};
  CHECK(rejects(doc, Study::s_study));
  doc["params"] = {{"s_values", {1, 2, 4}}};
  auto cfg = parse_config(doc, Study::s_study);
  CHECK(cfg.s_values == std::vector<std::size_t>{1, 2, 4});
  doc["params"] = {{"omega", {0.1, 0.2}}};
  CHECK(rejects(doc, Study::solve_evp));
  CHECK(rejects(base_doc(), Study::n_study));
}

TEST_CASE("overrides: --threads beats SPECSOLVE_THREADS beats config") {
  auto doc = base_doc();
  doc["threads"] = 3;
  auto cfg = parse_config(doc, Study::uq);
  apply_overrides(cfg, {}, nullptr);
  CHECK(cfg.uq.threads == 3);
  apply_overrides(cfg, {}, "2");
  CHECK(cfg.uq.threads == 2);
  Overrides ov;
  ov.threads = 5;
  apply_overrides(cfg, ov, "2");
  CHECK(cfg.uq.threads == 5);
  CHECK_THROWS_AS(apply_overrides(cfg, {}, "two"), msuq::ConfigError);
  CHECK_THROWS_AS(apply_overrides(cfg, {}, "0"), msuq::ConfigError);
}

TEST_CASE("overrides: seed and output directory") {
  auto cfg = parse_config(base_doc(), Study::uq);
  Overrides ov;
  ov.seed = 99;
  ov.out_dir = "elsewhere";
  apply_overrides(cfg, ov, nullptr);
  CHECK(cfg.uq.sampler.seed == 99);
  CHECK(cfg.out_dir == std::filesystem::path("elsewhere"));
}

TEST_CASE("exit codes by error category") {
  CHECK(exit_code_for(msuq::ConfigError("x")) == 2);
  CHECK(exit_code_for(msuq::NumericalError("x")) == 3);
  CHECK(exit_code_for(msuq::AdmissibilityError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 3);
  try {
    [[maybe_unused]] const auto doc = json::parse("{");
  } catch (const json::exception& e) {
    CHECK(exit_code_for(e) == 2);
  }
}

TEST_CASE("load_config reports unreadable and malformed files") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", Study::uq), msuq::ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "specsolve_bad_config.json";
  std::ofstream(path) << "{\"k\": 1,";
  CHECK_THROWS_AS(load_config(path, Study::uq), msuq::ConfigError);
  std::filesystem::remove(path);
}
