#include "qclock/spin.hpp"

#include <cmath>
#include <stdexcept>

namespace qclock {

void EnsembleSpec::validate() const {
  if (n_atoms < 1) {
    throw std::invalid_argument("EnsembleSpec: n_atoms must be >= 1");
  }
  if (!(squeezing > 0.0) || !std::isfinite(squeezing)) {
    throw std::invalid_argument("EnsembleSpec: squeezing must be positive and finite");
  }
}

SpinMoments analytic_moments(const EnsembleSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n_atoms);
  const double s2n = spec.squeezing * spec.squeezing * n;

  SpinMoments m;
  m.jy_var = s2n / 4.0;
  m.jx_mean = 0.5 * n * std::exp(-1.0 / (2.0 * s2n));
  m.jx2_mean = n * n / 8.0 * (1.0 + std::exp(-2.0 / s2n));
  m.jx_var = m.jx2_mean - m.jx_mean * m.jx_mean;
  return m;
}

OutcomeStats outcome_stats(const SpinMoments& moments, double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("outcome_stats: theta must be finite");
  }
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  return {moments.jx_mean * st, moments.jy_var * ct * ct + moments.jx_var * st * st};
}

double sample_outcome(const OutcomeStats& stats, long n_atoms, GaussianStream& rng) {
  if (stats.variance < 0.0 || !std::isfinite(stats.variance)) {
    throw std::invalid_argument("sample_outcome: variance must be >= 0");
  }
  const double draw = stats.mean + std::sqrt(stats.variance) * rng.gaussian();

  // Grid index u in [0, N]; mu = u - N/2 covers half-integers for odd N.
  const double half_n = 0.5 * static_cast<double>(n_atoms);
  const double u = draw + half_n;
  double k = std::floor(u + 0.5);
  if (k - u == 0.5) {
    // exact tie between k-1 and k: keep the one with smaller |mu|
    if (std::abs(k - 1.0 - half_n) < std::abs(k - half_n)) k -= 1.0;
  }
  if (k < 0.0) k = 0.0;
  if (k > static_cast<double>(n_atoms)) k = static_cast<double>(n_atoms);
  return k - half_n;
}

}  // namespace qclock
