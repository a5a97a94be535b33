#include "qclock/noise.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "qclock/detail/fft.hpp"
#include "qclock/rng.hpp"

namespace qclock {

void NoiseSpec::validate() const {
  if (!std::isfinite(gamma_lo) || gamma_lo < 0.0) {
    throw std::invalid_argument("NoiseSpec: gamma_lo must be finite and >= 0");
  }
  if (!std::isfinite(spectral_exponent)) {
    throw std::invalid_argument("NoiseSpec: spectral_exponent must be finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("NoiseSpec: dt must be positive");
  }
  if (n_samples < 2 || !detail::is_pow2(n_samples)) {
    throw std::invalid_argument("NoiseSpec: n_samples must be a power of two >= 2");
  }
}

NoiseTrajectory synthesize_flicker(const NoiseSpec& spec) {
  spec.validate();

  NoiseTrajectory traj;
  traj.spec = spec;
  traj.samples.assign(spec.n_samples, 0.0);
  if (spec.gamma_lo == 0.0) return traj;

  const std::size_t n = spec.n_samples;
  const std::size_t half = n / 2;
  const double alpha = spec.spectral_exponent;

  // Filter |H_k|^2 = k^(-alpha); DC bin stays zero (zero mean and no 1/f
  // divergence). Normalization chosen so Var(x_j) = gamma_lo^2:
  //   Var(x) = (1/n^2) * (2*sum_{k=1}^{half-1} a_k^2 + a_half^2)
  double filter_sum = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    filter_sum += 2.0 * std::pow(static_cast<double>(k), -alpha);
  }
  filter_sum += std::pow(static_cast<double>(half), -alpha);
  const double scale2 = static_cast<double>(n) * static_cast<double>(n) / filter_sum;

  std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
  GaussianStream rng(spec.seed);
  const double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t k = 1; k < half; ++k) {
    const double amp = std::sqrt(scale2 * std::pow(static_cast<double>(k), -alpha));
    const double re = rng.gaussian() * inv_sqrt2;
    const double im = rng.gaussian() * inv_sqrt2;
    spectrum[k] = amp * std::complex<double>(re, im);
    spectrum[n - k] = std::conj(spectrum[k]);
  }
  // Nyquist bin must be real for a real time series.
  spectrum[half] = std::sqrt(scale2 * std::pow(static_cast<double>(half), -alpha)) *
                   rng.gaussian();

  detail::fft_pow2(spectrum, +1);
  const double norm = spec.gamma_lo / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    traj.samples[j] = norm * spectrum[j].real();
  }
  return traj;
}

std::vector<PsdBin> estimate_psd(const NoiseTrajectory& traj) {
  const std::size_t n = traj.samples.size();
  if (n < 8) {
    throw std::invalid_argument("estimate_psd: need at least 8 samples");
  }
  if (!detail::is_pow2(n)) {
    throw std::invalid_argument("estimate_psd: sample count must be a power of two");
  }

  const std::size_t n_segments = n >= 64 ? 8 : 1;
  const std::size_t seg_len = n / n_segments;
  const double dt = traj.spec.dt;
  const double df = 1.0 / (static_cast<double>(seg_len) * dt);

  std::vector<double> acc(seg_len / 2 + 1, 0.0);
  std::vector<std::complex<double>> buf(seg_len);
  for (std::size_t s = 0; s < n_segments; ++s) {
    for (std::size_t j = 0; j < seg_len; ++j) {
      buf[j] = traj.samples[s * seg_len + j];
    }
    detail::fft_pow2(buf, -1);
    for (std::size_t k = 0; k <= seg_len / 2; ++k) {
      acc[k] += std::norm(buf[k]);
    }
  }

  // One-sided PSD; interior bins carry the power of both spectrum halves.
  std::vector<PsdBin> psd(seg_len / 2 + 1);
  const double base = dt / (static_cast<double>(seg_len) * static_cast<double>(n_segments));
  for (std::size_t k = 0; k <= seg_len / 2; ++k) {
    const double fold = (k == 0 || k == seg_len / 2) ? 1.0 : 2.0;
    psd[k].frequency = static_cast<double>(k) * df;
    psd[k].power = fold * base * acc[k];
  }
  return psd;
}

double accumulate_phase(const NoiseTrajectory& traj, std::size_t cycle_index,
                        std::size_t samples_per_cycle) {
  if (samples_per_cycle == 0) {
    throw std::invalid_argument("accumulate_phase: samples_per_cycle must be positive");
  }
  const std::size_t begin = cycle_index * samples_per_cycle;
  const std::size_t end = begin + samples_per_cycle;
  if (end > traj.samples.size() || begin / samples_per_cycle != cycle_index) {
    throw std::out_of_range("accumulate_phase: window outside trajectory");
  }
  double sum = 0.0;
  for (std::size_t j = begin; j < end; ++j) sum += traj.samples[j];
  return sum * traj.spec.dt;
}

double integrated_power(const std::vector<PsdBin>& psd) {
  if (psd.size() < 2) return 0.0;
  const double df = psd[1].frequency - psd[0].frequency;
  double total = 0.0;
  for (const auto& bin : psd) total += bin.power;
  return total * df;
}

double fit_loglog_slope(const std::vector<PsdBin>& psd, double f_lo, double f_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& bin : psd) {
    if (bin.frequency < f_lo || bin.frequency > f_hi || bin.power <= 0.0) continue;
    const double x = std::log(bin.frequency);
    const double y = std::log(bin.power);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) {
    throw std::invalid_argument("fit_loglog_slope: fewer than two usable bins in band");
  }
  const double denom = static_cast<double>(count) * sxx - sx * sx;
  return (static_cast<double>(count) * sxy - sx * sy) / denom;
}

void write_noise_csv(const NoiseTrajectory& traj, std::ostream& out) {
  out << "t,domega\n";
  char line[64];
  for (std::size_t j = 0; j < traj.samples.size(); ++j) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g\n",
                  static_cast<double>(j) * traj.spec.dt, traj.samples[j]);
    out << line;
  }
}

}  // namespace qclock
