#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qclock {

// Free-running local-oscillator frequency noise. The synthesized process has
// one-sided PSD proportional to 1/f^spectral_exponent between
// f_min = 1/(n_samples*dt) and the Nyquist frequency 1/(2*dt), zero mean, and
// process variance exactly gamma_lo^2.
struct NoiseSpec {
  double gamma_lo = 0.0;           // rad/s, std-dev of the frequency deviation
  double spectral_exponent = 1.0;  // 1 = flicker; 0 = white (used in tests)
  double dt = 1.0;                 // s, sample spacing
  std::size_t n_samples = 0;       // power of two, >= 2
  std::uint64_t seed = 0;

  void validate() const;
  double f_min() const { return 1.0 / (static_cast<double>(n_samples) * dt); }
  double f_nyquist() const { return 0.5 / dt; }
};

struct NoiseTrajectory {
  NoiseSpec spec;
  std::vector<double> samples;  // delta-omega_LO(t_j), rad/s
};

struct PsdBin {
  double frequency = 0.0;  // Hz
  double power = 0.0;      // one-sided PSD, (rad/s)^2/Hz
};

// Frequency-domain synthesis: complex white Gaussian spectrum shaped by
// f^(-exponent/2), DC bin zeroed, inverse transform. The shaping filter is
// rescaled analytically so the ensemble variance equals gamma_lo^2 exactly.
NoiseTrajectory synthesize_flicker(const NoiseSpec& spec);

// Averaged periodogram (rectangular window, non-overlapping segments).
// Integrated over frequency it recovers the mean-square of the samples.
std::vector<PsdBin> estimate_psd(const NoiseTrajectory& traj);

// Rectangle-rule phase integral over one Ramsey window:
// sum of samples in [cycle_index*spc, (cycle_index+1)*spc) times dt.
double accumulate_phase(const NoiseTrajectory& traj, std::size_t cycle_index,
                        std::size_t samples_per_cycle);

double integrated_power(const std::vector<PsdBin>& psd);

// Least-squares slope of log(power) vs log(frequency) over [f_lo, f_hi].
double fit_loglog_slope(const std::vector<PsdBin>& psd, double f_lo, double f_hi);

void write_noise_csv(const NoiseTrajectory& traj, std::ostream& out);  // header: t,domega

}  // namespace qclock
