#pragma once

#include "qclock/rng.hpp"

namespace qclock {

struct EnsembleSpec {
  long n_atoms = 0;
  double squeezing = 1.0;  // s; s = 1 coherent-like, s < 1 squeezed

  void validate() const;
  bool is_coherent() const { return squeezing == 1.0; }
};

// Collective-spin moments of the Gaussian input state
// |psi> ~ sum_mu exp(-mu^2/(s^2 N)) |mu>_y:
//   <Jx>   = (N/2) exp(-1/(2 s^2 N))
//   <Jx^2> = (N^2/8) (1 + exp(-2/(s^2 N)))
//   Var Jy = s^2 N / 4
struct SpinMoments {
  double jx_mean = 0.0;
  double jx2_mean = 0.0;
  double jy_var = 0.0;
  double jx_var = 0.0;  // jx2_mean - jx_mean^2
};

SpinMoments analytic_moments(const EnsembleSpec& spec);

struct OutcomeStats {
  double mean = 0.0;
  double variance = 0.0;
};

// Moments of the measured population difference after phase theta:
//   mean = <Jx> sin(theta),  var = VarJy cos^2 + VarJx sin^2
OutcomeStats outcome_stats(const SpinMoments& moments, double theta);

// Gaussian moment-matched draw rounded onto the J_z eigenvalue grid
// {-N/2, -N/2+1, ..., N/2} (ties toward zero) and clamped to the boundary.
double sample_outcome(const OutcomeStats& stats, long n_atoms, GaussianStream& rng);

}  // namespace qclock
