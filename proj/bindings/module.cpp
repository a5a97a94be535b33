#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qclock/analytics.hpp"
#include "qclock/clock.hpp"
#include "qclock/estimation.hpp"
#include "qclock/experiment.hpp"
#include "qclock/noise.hpp"
#include "qclock/oracle.hpp"
#include "qclock/stability.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

qclock::Axis axis_from_name(const std::string& name) {
  if (name == "x") return qclock::Axis::X;
  if (name == "y") return qclock::Axis::Y;
  if (name == "z") return qclock::Axis::Z;
  throw std::invalid_argument("axis must be 'x', 'y' or 'z'");
}

qclock::CascadeMode mode_from_name(const std::string& name) {
  if (name == "coherent-seeded") return qclock::CascadeMode::CoherentSeeded;
  if (name == "squeezed-seeded") return qclock::CascadeMode::SqueezedSeeded;
  throw std::invalid_argument("mode must be 'coherent-seeded' or 'squeezed-seeded'");
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>({static_cast<py::ssize_t>(v.size())}, v.data());
}

}  // namespace

PYBIND11_MODULE(_qclock, m) {
  m.doc() = "Monte Carlo and closed-form stability analysis of hybrid "
            "coherent/squeezed Ramsey clocks under 1/f local-oscillator noise";

  py::class_<qclock::SpinMoments>(m, "SpinMoments")
      .def_readonly("jx_mean", &qclock::SpinMoments::jx_mean)
      .def_readonly("jx2_mean", &qclock::SpinMoments::jx2_mean)
      .def_readonly("jy_var", &qclock::SpinMoments::jy_var)
      .def_readonly("jx_var", &qclock::SpinMoments::jx_var);

  py::class_<qclock::StateVector>(m, "StateVector")
      .def_readonly("n_atoms", &qclock::StateVector::n_atoms)
      .def_property_readonly("amplitudes", [](const qclock::StateVector& s) {
        return py::array_t<std::complex<double>>({static_cast<py::ssize_t>(s.amplitudes.size())},
                                                 s.amplitudes.data());
      })
      .def("norm2", &qclock::StateVector::norm2);

  m.def("synthesize_flicker",
        [](double gamma_lo, std::size_t n_samples, double dt, std::uint64_t seed,
           double spectral_exponent) {
          qclock::NoiseSpec spec{gamma_lo, spectral_exponent, dt, n_samples, seed};
          return to_array(qclock::synthesize_flicker(spec).samples);
        },
        "gamma_lo"_a, "n_samples"_a, "dt"_a = 1.0, "seed"_a = 0, "spectral_exponent"_a = 1.0);

  m.def("estimate_psd",
        [](py::array_t<double> samples, double dt, double gamma_lo) {
          qclock::NoiseTrajectory traj;
          traj.spec.gamma_lo = gamma_lo;
          traj.spec.dt = dt;
          traj.spec.n_samples = static_cast<std::size_t>(samples.size());
          traj.samples.assign(samples.data(), samples.data() + samples.size());
          const auto psd = qclock::estimate_psd(traj);
          std::vector<double> f, p;
          for (const auto& bin : psd) {
            f.push_back(bin.frequency);
            p.push_back(bin.power);
          }
          return py::make_tuple(to_array(f), to_array(p));
        },
        "samples"_a, "dt"_a = 1.0, "gamma_lo"_a = 1.0);

  m.def("analytic_moments",
        [](long n_atoms, double squeezing) {
          return qclock::analytic_moments({n_atoms, squeezing});
        },
        "n_atoms"_a, "squeezing"_a);

  m.def("outcome_stats",
        [](long n_atoms, double squeezing, double theta) {
          const auto stats = qclock::outcome_stats(qclock::analytic_moments({n_atoms, squeezing}), theta);
          return py::make_tuple(stats.mean, stats.variance);
        },
        "n_atoms"_a, "squeezing"_a, "theta"_a);

  m.def("sample_outcomes",
        [](double mean, double variance, long n_atoms, long count, std::uint64_t seed) {
          qclock::GaussianStream rng(seed);
          std::vector<double> draws(static_cast<std::size_t>(count));
          for (auto& d : draws) d = qclock::sample_outcome({mean, variance}, n_atoms, rng);
          return to_array(draws);
        },
        "mean"_a, "variance"_a, "n_atoms"_a, "count"_a, "seed"_a = 0);

  m.def("arcsine_estimate", &qclock::arcsine_estimate, "mu"_a, "jx_mean"_a);
  m.def("combine_cascade", [](const std::vector<double>& estimates) {
    std::vector<qclock::StageEstimate> stages;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
      stages.push_back({static_cast<int>(k), 0.0, estimates[k]});
    }
    return qclock::combine_cascade(stages);
  });

  m.def("build_pseudo_squeezed_state",
        [](long n_atoms, double squeezing) {
          return qclock::build_pseudo_squeezed_state({n_atoms, squeezing});
        },
        "n_atoms"_a, "squeezing"_a);
  m.def("rotate",
        [](const qclock::StateVector& state, const std::string& axis, double angle) {
          return qclock::rotate(state, axis_from_name(axis), angle);
        },
        "state"_a, "axis"_a, "angle"_a);
  m.def("ramsey_evolve", &qclock::ramsey_evolve, "state"_a, "theta"_a, "feedback_angle"_a = 0.0);
  m.def("outcome_pmf", [](const qclock::StateVector& state) {
    return to_array(qclock::outcome_pmf(state).probabilities);
  });
  m.def("exact_moments", &qclock::exact_moments, "state"_a);

  m.def("run_trajectory",
        [](long n_atoms, const std::vector<double>& squeezings, double t_tilde, long n_cycles,
           std::uint64_t seed, double kappa_noise2, long samples_per_cycle, bool closed_loop,
           double gamma_lo) {
          qclock::ClockConfig config;
          for (const double s : squeezings) config.stages.push_back({n_atoms, s});
          config.ramsey_time = gamma_lo > 0.0 ? t_tilde / gamma_lo : t_tilde;
          config.n_cycles = n_cycles;
          config.omega0 = 1.0;
          config.kappa_noise2 = kappa_noise2;
          config.loop_mode = closed_loop ? qclock::LoopMode::ClosedLoopSteering
                                         : qclock::LoopMode::OpenLoopResidual;
          config.seed = seed;
          config.samples_per_cycle = samples_per_cycle;
          config.noise = qclock::make_noise_spec(gamma_lo, config.ramsey_time, samples_per_cycle,
                                                 n_cycles, qclock::mix_seed(seed, 0x6e6f6973u));
          const auto records = qclock::run_trajectory(config);
          std::vector<double> theta(records.size()), est(records.size()), residual(records.size());
          for (std::size_t i = 0; i < records.size(); ++i) {
            theta[i] = records[i].theta_true;
            est[i] = records[i].theta_est_total;
            residual[i] = records[i].residual;
          }
          py::dict out;
          out["theta_true"] = to_array(theta);
          out["theta_est_total"] = to_array(est);
          out["residual"] = to_array(residual);
          return out;
        },
        "n_atoms"_a, "squeezings"_a, "t_tilde"_a, "n_cycles"_a, "seed"_a = 1,
        "kappa_noise2"_a = 0.0, "samples_per_cycle"_a = 64, "closed_loop"_a = false,
        "gamma_lo"_a = 1.0);

  m.def("allan_variance",
        [](py::array_t<double> y, long cycles_per_block) {
          std::vector<double> data(y.data(), y.data() + y.size());
          return qclock::allan_variance(data, cycles_per_block);
        },
        "y"_a, "cycles_per_block"_a);

  m.def("rescale",
        [](double sigma2, double ramsey_time, double omega0, double gamma_lo, double tau) {
          const auto p = qclock::rescale(sigma2, ramsey_time, omega0, gamma_lo, tau);
          return py::make_tuple(p.t_tilde, p.sigma2_tilde);
        },
        "sigma2"_a, "ramsey_time"_a, "omega0"_a = 1.0, "gamma_lo"_a = 1.0, "tau"_a = 1.0);

  m.def("phase_variance_hybrid", &qclock::phase_variance_hybrid, "s"_a, "kappa2"_a, "n_atoms"_a,
        "corrected"_a = false);
  m.def("optimal_squeezing", &qclock::optimal_squeezing, "kappa2"_a, "n_atoms"_a);

  m.def("cascade_plan",
        [](const std::string& mode, int nu, long n_atoms, double t_tilde, bool numeric,
           bool corrected) {
          const auto plan = numeric
                                ? qclock::cascade_plan_numeric(mode_from_name(mode), nu, n_atoms,
                                                               t_tilde, corrected)
                                : qclock::cascade_plan(mode_from_name(mode), nu, n_atoms, t_tilde);
          py::list stages;
          for (const auto& st : plan.stages) {
            py::dict d;
            d["squeezing"] = st.squeezing;
            d["kappa2_in"] = st.kappa2_in;
            d["sigma2_phase_out"] = st.sigma2_phase_out;
            stages.append(d);
          }
          return stages;
        },
        "mode"_a, "nu"_a, "n_atoms"_a, "t_tilde"_a, "numeric"_a = false, "corrected"_a = true);

  m.def("sigma2_formula",
        [](const std::string& name, long n_atoms, double t_tilde, int nu, double kappa_noise2,
           bool literal_feedback_norm) {
          qclock::FormulaParams params;
          params.n_atoms = n_atoms;
          params.t_tilde = t_tilde;
          params.nu = nu;
          params.kappa_noise2 = kappa_noise2;
          params.literal_feedback_norm = literal_feedback_norm;
          const auto v = qclock::sigma2_formulas(qclock::formula_from_name(name), params);
          py::dict out;
          out["sigma2_tilde"] = v.sigma2_tilde;
          out["sigma2"] = v.sigma2;
          out["s_opt"] = v.s_opt;
          return out;
        },
        "name"_a, "n_atoms"_a, "t_tilde"_a, "nu"_a = 1, "kappa_noise2"_a = 0.0,
        "literal_feedback_norm"_a = false);

  m.def("run_experiment_file", [](const std::string& path) {
    const auto loaded = qclock::load_config(path);
    return qclock::run_experiment(loaded.config, loaded.warnings);
  });

  m.attr("__version__") = "0.1.0";
}
