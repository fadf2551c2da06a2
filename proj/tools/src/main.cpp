#include "specsolve/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"specsolve: multiscale eigenvalue solver and uncertainty quantification studies"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  for (const char* name : {"solve-evp", "uq", "h-study", "s-study", "n-study", "q-study", "localization"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (fallback: SPECSOLVE_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "sampler seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    auto cfg = specsolve::load_config(config, specsolve::study_from_string(sub->get_name()));
    specsolve::Overrides ov;
    if (sub->count("--out")) ov.out_dir = out;
    if (sub->count("--threads")) ov.threads = threads;
    if (sub->count("--seed")) ov.seed = seed;
    specsolve::apply_overrides(cfg, ov, std::getenv("SPECSOLVE_THREADS"));
    specsolve::run_study(cfg);
  } catch (const std::exception& e) {
    std::cerr << "specsolve " << sub->get_name() << ": " << e.what() << '\n';
    return specsolve::exit_code_for(e);
  }
  return 0;
}
