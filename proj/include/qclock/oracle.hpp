#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "qclock/spin.hpp"

namespace qclock {

inline constexpr long kOracleMaxAtoms = 200;

// Exact symmetric-subspace state for small N. Amplitudes are indexed by
// i = 0..N with mu = i - N/2 in the J_z eigenbasis.
struct StateVector {
  long n_atoms = 0;
  std::vector<std::complex<double>> amplitudes;

  double norm2() const;
};

enum class Axis { X, Y, Z };

// Gaussian weights exp(-mu^2/(s^2 N)) on the J_y eigenstates, truncated at
// |mu| <= N/2, mapped to the J_z basis and normalized.
StateVector build_pseudo_squeezed_state(const EnsembleSpec& spec, long n_max = kOracleMaxAtoms);

// exp(-i * angle * J_axis). z is a diagonal phase; x and y go through the
// eigendecomposition of the tridiagonal J_x.
StateVector rotate(const StateVector& state, Axis axis, double angle);

// Ramsey sequence: z-rotation by theta, pi/2 pulse about x, then the feedback
// rotation about y. Identical, as an operator identity, to running the
// sequence at phase theta - feedback_angle with no feedback.
StateVector ramsey_evolve(const StateVector& state, double theta, double feedback_angle);

struct OutcomePmf {
  long n_atoms = 0;
  std::vector<double> probabilities;  // over mu = -N/2 .. N/2

  double mean() const;
  double variance() const;
};

OutcomePmf outcome_pmf(const StateVector& state);

SpinMoments exact_moments(const StateVector& state);

void write_pmf_csv(const OutcomePmf& pmf, std::ostream& out);  // header: mu,p

}  // namespace qclock
