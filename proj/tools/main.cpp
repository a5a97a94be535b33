#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qclock/experiment.hpp"

namespace {

int run(const std::string& config_path, int threads, bool analytic_only,
        qclock::ExperimentKind* forced_kind) {
  qclock::LoadResult loaded = qclock::load_config(config_path);
  if (threads > 0) loaded.config.threads = threads;
  if (forced_kind != nullptr) loaded.config.kind = *forced_kind;
  for (const auto& warning : loaded.warnings) {
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  }
  return analytic_only ? qclock::run_analytic(loaded.config, loaded.warnings)
                       : qclock::run_experiment(loaded.config, loaded.warnings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ramsey clock stability: Monte Carlo simulator and analytics"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)");

  std::string sim_config, ana_config, oracle_config, spectrum_config;
  auto* simulate = app.add_subcommand("simulate", "Run the configured Monte Carlo sweep");
  simulate->add_option("config", sim_config, "JSON config file")->required();
  auto* analytic = app.add_subcommand("analytic", "Evaluate the closed-form stability table");
  analytic->add_option("config", ana_config, "JSON config file")->required();
  auto* oracle = app.add_subcommand("validate-oracle", "Exact-state checks of the Gaussian model");
  oracle->add_option("config", oracle_config, "JSON config file")->required();
  auto* spectrum = app.add_subcommand("spectrum-check", "Noise-synthesis PSD and variance checks");
  spectrum->add_option("config", spectrum_config, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run(sim_config, threads, false, nullptr);
    }
    if (analytic->parsed()) {
      return run(ana_config, threads, true, nullptr);
    }
    if (oracle->parsed()) {
      auto kind = qclock::ExperimentKind::ValidateOracle;
      return run(oracle_config, threads, false, &kind);
    }
    auto kind = qclock::ExperimentKind::SpectrumCheck;
    return run(spectrum_config, threads, false, &kind);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
