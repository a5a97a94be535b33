#include "qclock/clock.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "qclock/estimation.hpp"

namespace qclock {

namespace {
constexpr std::uint64_t kMeasurementSalt = 0x6d656173u;  // "meas"
constexpr std::uint64_t kDephasingSalt = 0x64657068u;    // "deph"
}  // namespace

void ClockConfig::validate() const {
  if (stages.empty()) {
    throw std::invalid_argument("ClockConfig: at least one stage required");
  }
  for (const auto& stage : stages) stage.validate();
  if (!(ramsey_time > 0.0) || !std::isfinite(ramsey_time)) {
    throw std::invalid_argument("ClockConfig: ramsey_time must be positive");
  }
  if (n_cycles < 2) {
    throw std::invalid_argument("ClockConfig: n_cycles must be >= 2");
  }
  if (!(omega0 > 0.0)) {
    throw std::invalid_argument("ClockConfig: omega0 must be positive");
  }
  if (kappa_noise2 < 0.0 || !std::isfinite(kappa_noise2)) {
    throw std::invalid_argument("ClockConfig: kappa_noise2 must be >= 0");
  }
  if (samples_per_cycle < 1) {
    throw std::invalid_argument("ClockConfig: samples_per_cycle must be >= 1");
  }
  noise.validate();
  if (noise.n_samples < static_cast<std::size_t>(n_cycles) *
                            static_cast<std::size_t>(samples_per_cycle)) {
    throw std::invalid_argument("ClockConfig: noise trajectory shorter than n_cycles windows");
  }
  const double dt_expected = ramsey_time / static_cast<double>(samples_per_cycle);
  if (std::abs(noise.dt - dt_expected) > 1e-9 * dt_expected) {
    throw std::invalid_argument("ClockConfig: noise.dt inconsistent with ramsey_time");
  }
}

std::string ClockConfig::mode_name() const {
  if (stages.empty()) return "empty";
  return stages.front().is_coherent() ? "coherent-seeded" : "squeezed-seeded";
}

NoiseSpec make_noise_spec(double gamma_lo, double ramsey_time, long samples_per_cycle,
                          long n_cycles, std::uint64_t seed) {
  NoiseSpec spec;
  spec.gamma_lo = gamma_lo;
  spec.dt = ramsey_time / static_cast<double>(samples_per_cycle);
  spec.n_samples = std::bit_ceil(static_cast<std::size_t>(samples_per_cycle) *
                                 static_cast<std::size_t>(n_cycles));
  if (spec.n_samples < 2) spec.n_samples = 2;
  spec.seed = seed;
  return spec;
}

double apply_feedback_dephasing(double theta_fb, double kappa_noise2, GaussianStream& rng) {
  if (kappa_noise2 < 0.0 || !std::isfinite(kappa_noise2)) {
    throw std::invalid_argument("apply_feedback_dephasing: kappa_noise2 must be >= 0");
  }
  return theta_fb + std::sqrt(kappa_noise2) * rng.gaussian();
}

double steer(double current_correction, double omega_est) {
  if (!std::isfinite(current_correction) || !std::isfinite(omega_est)) {
    throw std::invalid_argument("steer: inputs must be finite");
  }
  return current_correction + omega_est;
}

std::vector<CycleRecord> run_trajectory(const ClockConfig& config, const NoiseTrajectory& traj) {
  config.validate();
  if (traj.samples.size() < static_cast<std::size_t>(config.n_cycles) *
                                static_cast<std::size_t>(config.samples_per_cycle)) {
    throw std::invalid_argument("run_trajectory: noise trajectory too short");
  }

  const std::size_t n_stages = config.stages.size();
  std::vector<SpinMoments> moments(n_stages);
  for (std::size_t k = 0; k < n_stages; ++k) {
    moments[k] = analytic_moments(config.stages[k]);
  }

  GaussianStream measurement_rng(mix_seed(config.seed, kMeasurementSalt));
  GaussianStream dephasing_rng(mix_seed(config.seed, kDephasingSalt));

  std::vector<CycleRecord> records;
  records.reserve(static_cast<std::size_t>(config.n_cycles));
  std::vector<StageEstimate> estimates(n_stages);

  double correction = 0.0;  // rad/s, steering accumulator (closed loop only)
  for (long n = 0; n < config.n_cycles; ++n) {
    CycleRecord rec;
    rec.cycle_index = n;
    const double raw_phase = accumulate_phase(traj, static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(config.samples_per_cycle));
    rec.theta_true = raw_phase - correction * config.ramsey_time;
    rec.stages.resize(n_stages);

    double estimate_sum = 0.0;
    for (std::size_t k = 0; k < n_stages; ++k) {
      double feedback = 0.0;
      if (k > 0) {
        feedback = apply_feedback_dephasing(estimate_sum, config.kappa_noise2, dephasing_rng);
      }
      const double theta_eff = rec.theta_true - feedback;
      const OutcomeStats stats = outcome_stats(moments[k], theta_eff);
      const double mu = sample_outcome(stats, config.stages[k].n_atoms, measurement_rng);
      const double est = arcsine_estimate(mu, moments[k].jx_mean);
      rec.stages[k] = {theta_eff, mu, est};
      estimates[k] = {static_cast<int>(k), mu, est};
      estimate_sum += est;
    }

    rec.theta_est_total = combine_cascade(estimates);
    rec.residual = rec.theta_true - rec.theta_est_total;
    if (config.loop_mode == LoopMode::ClosedLoopSteering) {
      correction = steer(correction, rec.theta_est_total / config.ramsey_time);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<CycleRecord> run_trajectory(const ClockConfig& config) {
  config.validate();
  const NoiseTrajectory traj = synthesize_flicker(config.noise);
  return run_trajectory(config, traj);
}

void write_cycle_csv(std::span<const CycleRecord> records, std::ostream& out) {
  out << "cycle,theta_true,stage,theta_eff,mu,theta_est,residual\n";
  char line[160];
  for (const auto& rec : records) {
    for (std::size_t k = 0; k < rec.stages.size(); ++k) {
      const auto& st = rec.stages[k];
      std::snprintf(line, sizeof(line), "%ld,%.12g,%zu,%.12g,%.12g,%.12g,%.12g\n",
                    rec.cycle_index, rec.theta_true, k, st.effective_theta, st.outcome_mu,
                    st.theta_est, rec.residual);
      out << line;
    }
  }
}

}  // namespace qclock
