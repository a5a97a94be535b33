#include "qclock/stability.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace qclock {

std::vector<double> fractional_errors(std::span<const CycleRecord> records, double omega0,
                                      double ramsey_time) {
  if (records.empty()) {
    throw std::invalid_argument("fractional_errors: no records");
  }
  if (!(omega0 > 0.0) || !(ramsey_time > 0.0)) {
    throw std::invalid_argument("fractional_errors: omega0 and ramsey_time must be positive");
  }
  std::vector<double> y;
  y.reserve(records.size());
  const double inv = 1.0 / (omega0 * ramsey_time);
  for (const auto& rec : records) y.push_back(rec.residual * inv);
  return y;
}

double allan_variance(std::span<const double> y, long cycles_per_block) {
  if (cycles_per_block < 1) {
    throw std::invalid_argument("allan_variance: cycles_per_block must be >= 1");
  }
  const std::size_t block = static_cast<std::size_t>(cycles_per_block);
  const std::size_t n_blocks = y.size() / block;
  if (n_blocks < 2) {
    throw std::invalid_argument("allan_variance: need at least two blocks of data");
  }

  std::vector<double> means(n_blocks, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < block; ++i) sum += y[b * block + i];
    means[b] = sum / static_cast<double>(block);
  }

  double acc = 0.0;
  for (std::size_t b = 0; b + 1 < n_blocks; ++b) {
    const double d = means[b + 1] - means[b];
    acc += d * d;
  }
  return 0.5 * acc / static_cast<double>(n_blocks - 1);
}

StabilityPoint rescale(double sigma2, double ramsey_time, double omega0, double gamma_lo,
                       double tau) {
  if (!(gamma_lo > 0.0)) {
    throw std::invalid_argument("rescale: gamma_lo must be positive");
  }
  if (!(sigma2 >= 0.0) || !(ramsey_time > 0.0) || !(omega0 > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("rescale: inputs must be positive");
  }
  StabilityPoint point;
  point.t_tilde = gamma_lo * ramsey_time;
  point.sigma2_tilde = sigma2 * omega0 * omega0 * tau / gamma_lo;
  return point;
}

void write_stability_csv(std::span<const StabilityPoint> points, std::ostream& out) {
  out << "t_tilde,inv_sigma2_tilde,std_error,n_traj,n_cycles\n";
  char line[160];
  for (const auto& p : points) {
    const double inv = p.sigma2_tilde > 0.0 ? 1.0 / p.sigma2_tilde : 0.0;
    std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%ld,%ld\n", p.t_tilde, inv,
                  p.std_error, p.n_trajectories, p.n_cycles);
    out << line;
  }
}

}  // namespace qclock
