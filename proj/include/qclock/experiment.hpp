#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qclock/analytics.hpp"
#include "qclock/clock.hpp"
#include "qclock/stability.hpp"

namespace qclock {

enum class ExperimentKind { TSweep, NSweep, FeedbackNoiseSweep, ValidateOracle, SpectrumCheck };

ExperimentKind kind_from_name(const std::string& name);
std::string kind_name(ExperimentKind kind);

enum class SqueezingPolicy { OptimalCorrected, OptimalAsymptotic, Explicit };

// All physical inputs are in rescaled units (t_tilde, kappa_noise2, N);
// internally gamma_lo = omega0 = 1 and T = t_tilde.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::TSweep;
  std::vector<std::string> modes = {"coherent-seeded"};
  std::vector<int> nu_grid = {1};
  std::vector<long> n_grid = {10000};
  std::vector<double> t_tilde_grid = {0.1};
  std::vector<double> kappa_noise2_grid = {0.0};
  SqueezingPolicy squeezing = SqueezingPolicy::OptimalCorrected;
  std::vector<double> explicit_squeezing;  // per stage, with SqueezingPolicy::Explicit
  long n_trajectories = 32;
  long n_cycles = 10000;
  long samples_per_cycle = 64;
  long cycles_per_block = 0;  // 0 = auto (n_cycles/100, at least 1)
  LoopMode loop_mode = LoopMode::OpenLoopResidual;
  std::uint64_t base_seed = 1;
  std::string output_dir = "qclock-out";
  int threads = 0;  // 0 = hardware concurrency

  std::vector<long> oracle_n_grid = {60};
  std::vector<double> oracle_s_grid = {0.3, 0.5, 1.0};

  std::size_t spectrum_samples = 1u << 18;
  int spectrum_seeds = 100;
  double spectrum_exponent = 1.0;
  double spectrum_gamma = 1.0;
  bool dump_noise = false;

  void validate() const;
  long effective_cycles_per_block() const;
};

struct LoadResult {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

LoadResult load_config(const std::string& path);
LoadResult parse_config(const std::string& json_text);

struct PointResult {
  std::string mode;
  int nu = 0;
  long n_atoms = 0;
  double t_tilde = 0.0;
  double kappa_noise2 = 0.0;
  std::vector<double> per_stage_squeezing;
  StabilityPoint stability;
};

// Deterministic 64-bit seed for one (grid point, trajectory) pair; depends on
// the coordinate values, not on grid order or scheduling.
std::uint64_t point_seed(std::uint64_t base_seed, const std::string& mode, int nu, long n_atoms,
                         double t_tilde, double kappa_noise2, long trajectory);

// Stage ensembles for one grid point under the configured squeezing policy.
std::vector<EnsembleSpec> stage_specs(const ExperimentConfig& config, const std::string& mode,
                                      int nu, long n_atoms, double t_tilde);

ClockConfig make_clock_config(const ExperimentConfig& config, const std::string& mode, int nu,
                              long n_atoms, double t_tilde, double kappa_noise2,
                              long trajectory);

// Monte Carlo estimate for one grid point (trajectories dispatched to the
// thread pool, aggregation order-independent).
PointResult simulate_point(const ExperimentConfig& config, const std::string& mode, int nu,
                           long n_atoms, double t_tilde, double kappa_noise2);

// Index-addressed parallel loop used for trajectory dispatch.
void parallel_for(long count, int threads, const std::function<void(long)>& body);

// Runs the configured experiment and writes its CSV artifacts plus run.log
// under the output directory (QCLOCK_OUTPUT_DIR overrides it). Returns a
// process exit status: 0 only if every self-check passed.
int run_experiment(const ExperimentConfig& config,
                   const std::vector<std::string>& load_warnings = {});

// Formula table only (no Monte Carlo): evaluates the closed forms over the
// configured grids and writes analytic.csv.
int run_analytic(const ExperimentConfig& config,
                 const std::vector<std::string>& load_warnings = {});

}  // namespace qclock
