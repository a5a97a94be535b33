#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace qclock {

struct StageEstimate {
  int stage_index = 0;
  double outcome_mu = 0.0;
  double theta_est = 0.0;
};

// theta_est = arcsin(mu / <Jx>), clamped into [-pi/2, pi/2]. Outcomes with
// |mu| > <Jx> happen with finite probability; clamping is the monotone
// completion of the inverse.
inline double arcsine_estimate(double mu, double jx_mean) {
  if (!(jx_mean > 0.0)) {
    throw std::invalid_argument("arcsine_estimate: jx_mean must be positive");
  }
  double ratio = mu / jx_mean;
  if (ratio > 1.0) ratio = 1.0;
  if (ratio < -1.0) ratio = -1.0;
  return std::asin(ratio);
}

// Cascade estimate: each stage estimates the residual left by the previous
// ones, so the total is the plain sum of stage estimates.
inline double combine_cascade(std::span<const StageEstimate> estimates) {
  if (estimates.empty()) {
    throw std::invalid_argument("combine_cascade: empty estimate sequence");
  }
  double total = 0.0;
  for (const auto& e : estimates) total += e.theta_est;
  return total;
}

}  // namespace qclock
