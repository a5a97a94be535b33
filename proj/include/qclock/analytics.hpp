#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qclock {

enum class CascadeMode { CoherentSeeded, SqueezedSeeded };

struct StagePlan {
  double squeezing = 1.0;        // s_k
  double kappa2_in = 0.0;        // incoming phase variance, rad^2
  double sigma2_phase_out = 0.0; // outgoing estimator phase variance, rad^2
};

// Stage-by-stage cascade description. Stage 0 is the seed ensemble; every
// later stage estimates the residual phase left by its predecessor. nu counts
// the feedback stages, so stages.size() == nu + 1 in both modes.
struct CascadePlan {
  CascadeMode mode = CascadeMode::CoherentSeeded;
  int nu = 0;
  long n_atoms = 0;
  double t_tilde = 0.0;
  std::vector<StagePlan> stages;

  double final_phase_variance() const { return stages.back().sigma2_phase_out; }
};

// Estimator phase variance of one squeezed stage with incoming phase width
// kappa. Asymptotic branch: s^2/N + kappa^2/(2 s^4 N^2). Corrected branch
// keeps the full exponential spin moments:
//   VarJy/<Jx>^2 + (VarJx/<Jx>^2) kappa^2.
double phase_variance_hybrid(double s, double kappa2, long n_atoms, bool corrected);

// s_opt = (kappa^2/N)^(1/6); cross-checked against the numeric minimizer of
// the asymptotic objective.
double optimal_squeezing(double kappa2, long n_atoms);

// Golden-section minimizer on [lo, hi], relative tolerance 1e-8.
double optimize_squeezing_numeric(const std::function<double(double)>& objective, double lo,
                                  double hi);

// Asymptotic cascade: kappa_{k+1}^2 = (3/2) (kappa_k^2)^(1/3) / N^(4/3),
// seeded with 1/N (coherent) or t_tilde^2 (squeezed). Matches the closed
// forms below to floating-point accuracy.
CascadePlan cascade_plan(CascadeMode mode, int nu, long n_atoms, double t_tilde);

// Same chain but with each stage's squeezing optimized numerically, on the
// corrected branch when requested. Used for finite-N overlays.
CascadePlan cascade_plan_numeric(CascadeMode mode, int nu, long n_atoms, double t_tilde,
                                 bool corrected);

// Closed-form optimized phase variance E[(dtheta_est)^2] and last-stage
// squeezing for a nu-stage cascade.
double cascade_closed_phase_variance(CascadeMode mode, int nu, long n_atoms, double t_tilde);
double cascade_closed_s_opt(CascadeMode mode, int nu, long n_atoms, double t_tilde);

// Final residual phase variance when every feedback application suffers a
// Gaussian dephasing of variance kappa_noise2, with the stage squeezings
// frozen at the noiseless plan values.
double dephased_phase_variance(const CascadePlan& plan, double kappa_noise2, bool corrected);

enum class Formula {
  Sql,
  FringeHop,
  SingleSqueezed,
  HybridOpt,
  CascadeOpt,
  CascadeSqOpt,
  WithFeedbackNoise,
};

Formula formula_from_name(const std::string& name);
std::string formula_name(Formula which);

struct FormulaParams {
  long n_atoms = 0;
  double t_tilde = 0.0;
  int nu = 1;
  double kappa_noise2 = 0.0;
  // Paper-literal additive feedback-noise normalization (adds kappa_noise2 to
  // the rescaled Allan variance directly instead of at the phase level).
  bool literal_feedback_norm = false;
  // Absolute-unit context for the raw sigma^2; the rescaled value never needs it.
  double omega0 = 1.0;
  double tau = 1.0;
  double gamma_lo = 1.0;
};

struct FormulaValue {
  double sigma2_tilde = 0.0;
  double sigma2 = 0.0;
  double s_opt = 1.0;
};

FormulaValue sigma2_formulas(Formula which, const FormulaParams& params);

struct FormulaRow {
  std::string formula;
  long n_atoms = 0;
  double t_tilde = 0.0;
  int nu = 0;
  double s_opt = 1.0;
  double sigma2_tilde = 0.0;
};

// header: formula,N,t_tilde,nu,s_opt,sigma2_tilde
void write_formula_csv(std::span<const FormulaRow> rows, std::ostream& out);

}  // namespace qclock
