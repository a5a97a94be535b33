#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "qclock/clock.hpp"

namespace qclock {

// One Monte Carlo stability estimate in the paper's rescaled units:
// t_tilde = gamma_lo * T, sigma2_tilde = sigma^2 * omega0^2 * tau / gamma_lo.
struct StabilityPoint {
  double t_tilde = 0.0;
  double sigma2_tilde = 0.0;
  double std_error = 0.0;  // MC standard error of sigma2_tilde
  long n_trajectories = 0;
  long n_cycles = 0;
};

// Fractional frequency errors y_n = residual_n / (omega0 * T).
std::vector<double> fractional_errors(std::span<const CycleRecord> records, double omega0,
                                      double ramsey_time);

// Non-overlapping two-sample Allan estimator at tau = cycles_per_block * T:
// partition y into consecutive blocks, average each block, return half the
// mean squared difference of adjacent block means.
double allan_variance(std::span<const double> y, long cycles_per_block);

StabilityPoint rescale(double sigma2, double ramsey_time, double omega0, double gamma_lo,
                       double tau);

// header: t_tilde,inv_sigma2_tilde,std_error,n_traj,n_cycles
void write_stability_csv(std::span<const StabilityPoint> points, std::ostream& out);

}  // namespace qclock
