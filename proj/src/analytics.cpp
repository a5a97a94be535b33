#include "qclock/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "qclock/spin.hpp"

namespace qclock {

namespace {

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive");
  }
}

// One asymptotic optimization step: the minimum over s of
// s^2/N + kappa^2/(2 s^4 N^2).
double recursion_step(double kappa2, double n) {
  return 1.5 * std::cbrt(kappa2) / std::pow(n, 4.0 / 3.0);
}

}  // namespace

double phase_variance_hybrid(double s, double kappa2, long n_atoms, bool corrected) {
  check_positive(s, "phase_variance_hybrid: s");
  if (kappa2 < 0.0 || !std::isfinite(kappa2)) {
    throw std::invalid_argument("phase_variance_hybrid: kappa2 must be >= 0");
  }
  if (n_atoms < 1) {
    throw std::invalid_argument("phase_variance_hybrid: n_atoms must be >= 1");
  }
  const double n = static_cast<double>(n_atoms);
  if (!corrected) {
    return s * s / n + kappa2 / (2.0 * s * s * s * s * n * n);
  }
  const SpinMoments m = analytic_moments({n_atoms, s});
  const double jx2 = m.jx_mean * m.jx_mean;
  return m.jy_var / jx2 + m.jx_var / jx2 * kappa2;
}

double optimize_squeezing_numeric(const std::function<double(double)>& objective, double lo,
                                  double hi) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("optimize_squeezing_numeric: invalid bracket");
  }
  const double gr = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  auto eval = [&](double x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
      throw std::domain_error("optimize_squeezing_numeric: objective not finite");
    }
    return v;
  };
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > 1e-8 * 0.5 * (std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = eval(d);
    }
  }
  return 0.5 * (a + b);
}

double optimal_squeezing(double kappa2, long n_atoms) {
  check_positive(kappa2, "optimal_squeezing: kappa2");
  if (n_atoms < 1) {
    throw std::invalid_argument("optimal_squeezing: n_atoms must be >= 1");
  }
  const double n = static_cast<double>(n_atoms);
  const double s_opt = std::pow(kappa2 / n, 1.0 / 6.0);

  // The closed form is the stationary point of the asymptotic objective;
  // cross-check against the bracketing minimizer.
  const double numeric = optimize_squeezing_numeric(
      [&](double s) { return phase_variance_hybrid(s, kappa2, n_atoms, false); }, s_opt / 8.0,
      s_opt * 8.0);
  if (std::abs(numeric - s_opt) > 1e-5 * s_opt) {
    throw std::logic_error("optimal_squeezing: closed form disagrees with minimizer");
  }
  return s_opt;
}

namespace {

double seed_kappa2(CascadeMode mode, long n_atoms, double t_tilde) {
  return mode == CascadeMode::CoherentSeeded ? 1.0 / static_cast<double>(n_atoms)
                                             : t_tilde * t_tilde;
}

void check_plan_inputs(CascadeMode mode, int nu, long n_atoms, double t_tilde) {
  if (nu < 0) throw std::invalid_argument("cascade: nu must be >= 0");
  if (n_atoms < 2) throw std::invalid_argument("cascade: n_atoms must be >= 2");
  if (mode == CascadeMode::SqueezedSeeded) check_positive(t_tilde, "cascade: t_tilde");
  if (t_tilde < 0.0 || !std::isfinite(t_tilde)) {
    throw std::invalid_argument("cascade: t_tilde must be >= 0");
  }
}

}  // namespace

CascadePlan cascade_plan(CascadeMode mode, int nu, long n_atoms, double t_tilde) {
  check_plan_inputs(mode, nu, n_atoms, t_tilde);
  const double n = static_cast<double>(n_atoms);

  CascadePlan plan{mode, nu, n_atoms, t_tilde, {}};
  plan.stages.reserve(static_cast<std::size_t>(nu) + 1);

  if (mode == CascadeMode::CoherentSeeded) {
    // Reference ensemble: theta-independent sensitivity, quantum phase noise 1/N.
    plan.stages.push_back({1.0, t_tilde * t_tilde, 1.0 / n});
  } else {
    const double kappa2 = seed_kappa2(mode, n_atoms, t_tilde);
    const double s0 = optimal_squeezing(kappa2, n_atoms);
    plan.stages.push_back({s0, kappa2, recursion_step(kappa2, n)});
  }
  for (int k = 1; k <= nu; ++k) {
    const double kappa2 = plan.stages.back().sigma2_phase_out;
    const double s = optimal_squeezing(kappa2, n_atoms);
    plan.stages.push_back({s, kappa2, recursion_step(kappa2, n)});
  }
  return plan;
}

CascadePlan cascade_plan_numeric(CascadeMode mode, int nu, long n_atoms, double t_tilde,
                                 bool corrected) {
  check_plan_inputs(mode, nu, n_atoms, t_tilde);
  const double n = static_cast<double>(n_atoms);

  auto optimize_stage = [&](double kappa2) {
    const double s_guess = std::pow(kappa2 / n, 1.0 / 6.0);
    const double s = optimize_squeezing_numeric(
        [&](double x) { return phase_variance_hybrid(x, kappa2, n_atoms, corrected); },
        s_guess / 6.0, s_guess * 6.0);
    return StagePlan{s, kappa2, phase_variance_hybrid(s, kappa2, n_atoms, corrected)};
  };

  CascadePlan plan{mode, nu, n_atoms, t_tilde, {}};
  plan.stages.reserve(static_cast<std::size_t>(nu) + 1);

  if (mode == CascadeMode::CoherentSeeded) {
    const double kappa2 = t_tilde * t_tilde;
    const double out = corrected ? phase_variance_hybrid(1.0, kappa2, n_atoms, true) : 1.0 / n;
    plan.stages.push_back({1.0, kappa2, out});
  } else {
    plan.stages.push_back(optimize_stage(seed_kappa2(mode, n_atoms, t_tilde)));
  }
  for (int k = 1; k <= nu; ++k) {
    plan.stages.push_back(optimize_stage(plan.stages.back().sigma2_phase_out));
  }
  return plan;
}

double cascade_closed_phase_variance(CascadeMode mode, int nu, long n_atoms, double t_tilde) {
  check_plan_inputs(mode, nu, n_atoms, t_tilde);
  const double n = static_cast<double>(n_atoms);
  if (mode == CascadeMode::CoherentSeeded) {
    if (nu == 0) return 1.0 / n;
    const double p = std::pow(3.0, -nu);
    return std::pow(1.5, 1.5 * (1.0 - p)) * std::pow(n, -(2.0 - p));
  }
  const double p = std::pow(3.0, -(nu + 1));
  return std::pow(1.5, 1.5 * (1.0 - p)) * std::pow(t_tilde, 2.0 * p) *
         std::pow(n, -(2.0 - 2.0 * p));
}

double cascade_closed_s_opt(CascadeMode mode, int nu, long n_atoms, double t_tilde) {
  check_plan_inputs(mode, nu, n_atoms, t_tilde);
  const double n = static_cast<double>(n_atoms);
  if (mode == CascadeMode::CoherentSeeded) {
    if (nu == 0) return 1.0;
    const double pre = std::pow(3.0, -(nu - 1));
    const double p = std::pow(3.0, -nu);
    return std::pow(1.5, 0.25 * (1.0 - pre)) * std::pow(n, -0.5 * (1.0 - p));
  }
  const double pre = std::pow(3.0, -nu);
  const double p = std::pow(3.0, -(nu + 1));
  return std::pow(1.5, 0.25 * (1.0 - pre)) * std::pow(t_tilde, p) * std::pow(n, -(0.5 - p));
}

double dephased_phase_variance(const CascadePlan& plan, double kappa_noise2, bool corrected) {
  if (kappa_noise2 < 0.0 || !std::isfinite(kappa_noise2)) {
    throw std::invalid_argument("dephased_phase_variance: kappa_noise2 must be >= 0");
  }
  if (plan.stages.empty()) {
    throw std::invalid_argument("dephased_phase_variance: empty plan");
  }
  // Stage 0 receives no feedback. Every later stage sees its predecessor's
  // residual widened by one dephasing draw, and the draw itself stays in the
  // final residual: W_k = kappa_noise^2 + V_k(W_{k-1} + kappa_noise^2).
  double w = plan.stages.front().sigma2_phase_out;
  if (plan.mode == CascadeMode::CoherentSeeded && corrected) {
    w = phase_variance_hybrid(1.0, plan.stages.front().kappa2_in, plan.n_atoms, true);
  }
  for (std::size_t k = 1; k < plan.stages.size(); ++k) {
    const double v = phase_variance_hybrid(plan.stages[k].squeezing, w + kappa_noise2,
                                           plan.n_atoms, corrected);
    w = kappa_noise2 + v;
  }
  return w;
}

Formula formula_from_name(const std::string& name) {
  if (name == "sql") return Formula::Sql;
  if (name == "fringe_hop") return Formula::FringeHop;
  if (name == "single_squeezed") return Formula::SingleSqueezed;
  if (name == "hybrid_opt") return Formula::HybridOpt;
  if (name == "cascade_opt") return Formula::CascadeOpt;
  if (name == "cascade_sq_opt") return Formula::CascadeSqOpt;
  if (name == "with_feedback_noise") return Formula::WithFeedbackNoise;
  throw std::invalid_argument("unknown formula selector: " + name);
}

std::string formula_name(Formula which) {
  switch (which) {
    case Formula::Sql: return "sql";
    case Formula::FringeHop: return "fringe_hop";
    case Formula::SingleSqueezed: return "single_squeezed";
    case Formula::HybridOpt: return "hybrid_opt";
    case Formula::CascadeOpt: return "cascade_opt";
    case Formula::CascadeSqOpt: return "cascade_sq_opt";
    case Formula::WithFeedbackNoise: return "with_feedback_noise";
  }
  throw std::invalid_argument("unknown formula selector");
}

FormulaValue sigma2_formulas(Formula which, const FormulaParams& p) {
  if (p.n_atoms < 1) throw std::invalid_argument("sigma2_formulas: n_atoms must be >= 1");
  check_positive(p.t_tilde, "sigma2_formulas: t_tilde");
  check_positive(p.omega0, "sigma2_formulas: omega0");
  check_positive(p.tau, "sigma2_formulas: tau");
  check_positive(p.gamma_lo, "sigma2_formulas: gamma_lo");
  const double n = static_cast<double>(p.n_atoms);

  FormulaValue out;
  switch (which) {
    case Formula::Sql:
      out.sigma2_tilde = 1.0 / (p.t_tilde * n);
      out.s_opt = 1.0;
      break;
    case Formula::FringeHop:
      out.sigma2_tilde = p.t_tilde;
      out.s_opt = 1.0;
      break;
    case Formula::SingleSqueezed:
      out.sigma2_tilde =
          cascade_closed_phase_variance(CascadeMode::SqueezedSeeded, 0, p.n_atoms, p.t_tilde) /
          p.t_tilde;
      out.s_opt = cascade_closed_s_opt(CascadeMode::SqueezedSeeded, 0, p.n_atoms, p.t_tilde);
      break;
    case Formula::HybridOpt:
      out.sigma2_tilde =
          cascade_closed_phase_variance(CascadeMode::CoherentSeeded, 1, p.n_atoms, p.t_tilde) /
          p.t_tilde;
      out.s_opt = cascade_closed_s_opt(CascadeMode::CoherentSeeded, 1, p.n_atoms, p.t_tilde);
      break;
    case Formula::CascadeOpt:
      out.sigma2_tilde =
          cascade_closed_phase_variance(CascadeMode::CoherentSeeded, p.nu, p.n_atoms, p.t_tilde) /
          p.t_tilde;
      out.s_opt = cascade_closed_s_opt(CascadeMode::CoherentSeeded, p.nu, p.n_atoms, p.t_tilde);
      break;
    case Formula::CascadeSqOpt:
      out.sigma2_tilde =
          cascade_closed_phase_variance(CascadeMode::SqueezedSeeded, p.nu, p.n_atoms, p.t_tilde) /
          p.t_tilde;
      out.s_opt = cascade_closed_s_opt(CascadeMode::SqueezedSeeded, p.nu, p.n_atoms, p.t_tilde);
      break;
    case Formula::WithFeedbackNoise: {
      const double ideal =
          cascade_closed_phase_variance(CascadeMode::CoherentSeeded, p.nu, p.n_atoms, p.t_tilde) /
          p.t_tilde;
      // Phase-level injection: the dephasing adds kappa_noise2 to
      // E[(dtheta)^2], i.e. kappa_noise2/(omega0^2 tau T) to sigma^2. The
      // paper's literal form adds kappa_noise2 to sigma^2 itself.
      out.sigma2_tilde =
          ideal + (p.literal_feedback_norm ? p.kappa_noise2 : p.kappa_noise2 / p.t_tilde);
      out.s_opt = cascade_closed_s_opt(CascadeMode::CoherentSeeded, p.nu, p.n_atoms, p.t_tilde);
      break;
    }
  }
  out.sigma2 = out.sigma2_tilde * p.gamma_lo / (p.omega0 * p.omega0 * p.tau);
  return out;
}

void write_formula_csv(std::span<const FormulaRow> rows, std::ostream& out) {
  out << "formula,N,t_tilde,nu,s_opt,sigma2_tilde\n";
  char line[192];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%s,%ld,%.12g,%d,%.12g,%.12g\n", row.formula.c_str(),
                  row.n_atoms, row.t_tilde, row.nu, row.s_opt, row.sigma2_tilde);
    out << line;
  }
}

}  // namespace qclock
