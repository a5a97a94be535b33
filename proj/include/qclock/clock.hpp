#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qclock/noise.hpp"
#include "qclock/rng.hpp"
#include "qclock/spin.hpp"

namespace qclock {

enum class LoopMode {
  // Residuals are computed against the free-running LO; no steering.
  OpenLoopResidual,
  // The total estimate steers the LO frequency for subsequent cycles.
  ClosedLoopSteering,
};

// Full cascade description. Stage 0 is the reference ensemble: the cascade is
// "coherent-seeded" when it carries s = 1 and "squeezed-seeded" otherwise.
struct ClockConfig {
  std::vector<EnsembleSpec> stages;
  double ramsey_time = 1.0;  // s
  long n_cycles = 0;
  double omega0 = 1.0;  // rad/s, reference transition frequency
  NoiseSpec noise;
  double kappa_noise2 = 0.0;  // rad^2, feedback dephasing variance
  LoopMode loop_mode = LoopMode::OpenLoopResidual;
  std::uint64_t seed = 0;
  long samples_per_cycle = 64;

  void validate() const;
  std::string mode_name() const;
};

// Noise spec covering n_cycles contiguous Ramsey windows of duration
// ramsey_time, padded up to the next power of two.
NoiseSpec make_noise_spec(double gamma_lo, double ramsey_time, long samples_per_cycle,
                          long n_cycles, std::uint64_t seed);

struct StageOutcome {
  double effective_theta = 0.0;
  double outcome_mu = 0.0;
  double theta_est = 0.0;
};

struct CycleRecord {
  long cycle_index = 0;
  double theta_true = 0.0;
  std::vector<StageOutcome> stages;
  double theta_est_total = 0.0;
  double residual = 0.0;  // theta_true - theta_est_total
};

// One clock trajectory. Each cycle accumulates the LO phase, runs the stage
// cascade (stage k measures at theta minus the dephased sum of earlier
// estimates), and records the residual. Closed-loop mode additionally steers
// the LO by theta_est_total / T after every cycle.
std::vector<CycleRecord> run_trajectory(const ClockConfig& config);
std::vector<CycleRecord> run_trajectory(const ClockConfig& config, const NoiseTrajectory& traj);

// theta_fb plus a Gaussian draw of variance kappa_noise2.
double apply_feedback_dephasing(double theta_fb, double kappa_noise2, GaussianStream& rng);

// Accumulate a frequency correction; the correction is subtracted from the
// free-running LO during subsequent cycles.
double steer(double current_correction, double omega_est);

// header: cycle,theta_true,stage,theta_eff,mu,theta_est,residual
void write_cycle_csv(std::span<const CycleRecord> records, std::ostream& out);

}  // namespace qclock
