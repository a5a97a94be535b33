#include "qclock/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace qclock {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct JxEigen {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

// J_x in the J_z basis is real symmetric tridiagonal:
// (J_x)_{i+1,i} = sqrt((i+1)(N-i))/2.
const JxEigen& jx_eigensystem(long n_atoms) {
  static std::map<long, JxEigen> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n_atoms);
  if (it != cache.end()) return it->second;

  const long dim = n_atoms + 1;
  Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(dim, dim);
  for (long i = 0; i + 1 < dim; ++i) {
    const double b = 0.5 * std::sqrt(static_cast<double>(i + 1) *
                                     static_cast<double>(n_atoms - i));
    jx(i, i + 1) = b;
    jx(i + 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jx);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("jx_eigensystem: eigendecomposition failed");
  }
  auto [pos, inserted] = cache.emplace(n_atoms, JxEigen{solver.eigenvectors(), solver.eigenvalues()});
  return pos->second;
}

using CVec = Eigen::VectorXcd;

CVec to_eigen(const StateVector& state) {
  CVec v(state.amplitudes.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = state.amplitudes[static_cast<std::size_t>(i)];
  return v;
}

StateVector from_eigen(long n_atoms, const CVec& v) {
  StateVector out;
  out.n_atoms = n_atoms;
  out.amplitudes.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out.amplitudes[static_cast<std::size_t>(i)] = v(i);
  return out;
}

CVec rotate_x(long n_atoms, const CVec& v, double angle) {
  const auto& eig = jx_eigensystem(n_atoms);
  CVec coeffs = eig.vectors.transpose() * v;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    coeffs(k) *= std::polar(1.0, -angle * eig.values(k));
  }
  return eig.vectors * coeffs;
}

CVec apply_z_phase(long n_atoms, CVec v, double angle) {
  const double half_n = 0.5 * static_cast<double>(n_atoms);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mu = static_cast<double>(i) - half_n;
    v(i) *= std::polar(1.0, -angle * mu);
  }
  return v;
}

void check_state(const StateVector& state) {
  if (state.n_atoms < 1 || state.amplitudes.size() != static_cast<std::size_t>(state.n_atoms) + 1) {
    throw std::invalid_argument("StateVector: amplitude count must be n_atoms + 1");
  }
}

// <Jx psi> via the tridiagonal action.
CVec apply_jx(long n_atoms, const CVec& v) {
  const long dim = n_atoms + 1;
  CVec out = CVec::Zero(dim);
  for (long i = 0; i + 1 < dim; ++i) {
    const double b = 0.5 * std::sqrt(static_cast<double>(i + 1) *
                                     static_cast<double>(n_atoms - i));
    out(i) += b * v(i + 1);
    out(i + 1) += b * v(i);
  }
  return out;
}

}  // namespace

double StateVector::norm2() const {
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a);
  return total;
}

StateVector build_pseudo_squeezed_state(const EnsembleSpec& spec, long n_max) {
  spec.validate();
  if (spec.n_atoms > n_max) {
    throw std::invalid_argument("build_pseudo_squeezed_state: n_atoms exceeds n_max");
  }
  const long dim = spec.n_atoms + 1;
  const double half_n = 0.5 * static_cast<double>(spec.n_atoms);
  const double s2n = spec.squeezing * spec.squeezing * static_cast<double>(spec.n_atoms);

  CVec weights(dim);
  for (long i = 0; i < dim; ++i) {
    const double mu = static_cast<double>(i) - half_n;
    weights(i) = std::exp(-mu * mu / s2n);
  }
  weights.normalize();

  // |mu>_y = exp(+i pi/2 Jx) |mu>_z, so the J_y-basis coefficient vector maps
  // to the J_z basis through the same rotation.
  CVec psi = rotate_x(spec.n_atoms, weights, -kPi / 2.0);
  psi.normalize();
  return from_eigen(spec.n_atoms, psi);
}

StateVector rotate(const StateVector& state, Axis axis, double angle) {
  check_state(state);
  if (!std::isfinite(angle)) {
    throw std::invalid_argument("rotate: angle must be finite");
  }
  CVec v = to_eigen(state);
  switch (axis) {
    case Axis::Z:
      v = apply_z_phase(state.n_atoms, std::move(v), angle);
      break;
    case Axis::X:
      v = rotate_x(state.n_atoms, v, angle);
      break;
    case Axis::Y:
      // Jy = exp(-i pi/2 Jz) Jx exp(+i pi/2 Jz)
      v = apply_z_phase(state.n_atoms, std::move(v), -kPi / 2.0);
      v = rotate_x(state.n_atoms, v, angle);
      v = apply_z_phase(state.n_atoms, std::move(v), kPi / 2.0);
      break;
  }
  return from_eigen(state.n_atoms, v);
}

StateVector ramsey_evolve(const StateVector& state, double theta, double feedback_angle) {
  StateVector out = rotate(state, Axis::Z, theta);
  out = rotate(out, Axis::X, kPi / 2.0);
  if (feedback_angle != 0.0) {
    out = rotate(out, Axis::Y, feedback_angle);
  }
  return out;
}

OutcomePmf outcome_pmf(const StateVector& state) {
  check_state(state);
  OutcomePmf pmf;
  pmf.n_atoms = state.n_atoms;
  pmf.probabilities.resize(state.amplitudes.size());
  for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
    pmf.probabilities[i] = std::norm(state.amplitudes[i]);
  }
  return pmf;
}

double OutcomePmf::mean() const {
  const double half_n = 0.5 * static_cast<double>(n_atoms);
  double m = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    m += (static_cast<double>(i) - half_n) * probabilities[i];
  }
  return m;
}

double OutcomePmf::variance() const {
  const double half_n = 0.5 * static_cast<double>(n_atoms);
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double mu = static_cast<double>(i) - half_n;
    v += (mu - m) * (mu - m) * probabilities[i];
  }
  return v;
}

SpinMoments exact_moments(const StateVector& state) {
  check_state(state);
  const CVec v = to_eigen(state);

  const CVec jx_v = apply_jx(state.n_atoms, v);
  const double jx_mean = std::real(v.dot(jx_v));
  const double jx2_mean = std::real(jx_v.dot(jx_v));

  // Jy statistics: <v|Jy|v> = <w|Jx|w> with w = exp(+i pi/2 Jz) v.
  const CVec w = apply_z_phase(state.n_atoms, v, -kPi / 2.0);
  const CVec jx_w = apply_jx(state.n_atoms, w);
  const double jy_mean = std::real(w.dot(jx_w));
  const double jy2_mean = std::real(jx_w.dot(jx_w));

  SpinMoments m;
  m.jx_mean = jx_mean;
  m.jx2_mean = jx2_mean;
  m.jx_var = jx2_mean - jx_mean * jx_mean;
  m.jy_var = jy2_mean - jy_mean * jy_mean;
  return m;
}

void write_pmf_csv(const OutcomePmf& pmf, std::ostream& out) {
  out << "mu,p\n";
  const double half_n = 0.5 * static_cast<double>(pmf.n_atoms);
  char line[64];
  for (std::size_t i = 0; i < pmf.probabilities.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.12g,%.12g\n",
                  static_cast<double>(i) - half_n, pmf.probabilities[i]);
    out << line;
  }
}

}  // namespace qclock
