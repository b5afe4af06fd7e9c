#include "lunarkd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lunarkd/ode.hpp"

namespace lunarkd {
namespace {

using State12 = Eigen::Matrix<double, 12, 1>;

Dopri5 ground_truth_integrator(const Cr3bpSystem& sys, double tol) {
  OdeOptions o;
  o.rtol = tol;
  o.atol = tol;
  return Dopri5(
      [sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState chief{y.segment<3>(0), y.segment<3>(3), t};
        const Vec6 x = y.segment<6>(6);
        dy.resize(12);
        dy.segment<3>(0) = chief.v;
        dy.segment<3>(3) = cr3bp_accel(chief, sys);
        dy.segment<6>(6) = plant_matrix(chief, sys).a * x;
      },
      o);
}

Eigen::VectorXd pack(const SynodicState& c, const RelativeState& d) {
  Eigen::VectorXd y(12);
  y << c.r, c.v, d.rho, d.rho_dot;
  return y;
}

std::vector<Impulse> sorted_impulses(std::vector<Impulse> imps, double t0, double tf) {
  const double slack = 1e-12 * std::max({1.0, std::abs(t0), std::abs(tf)});
  for (const Impulse& imp : imps) {
    if (imp.t < t0 - slack || imp.t > tf + slack) {
      throw SolverError("impulse epoch " + std::to_string(imp.t) + " outside the window");
    }
  }
  std::stable_sort(imps.begin(), imps.end(),
                   [](const Impulse& a, const Impulse& b) { return a.t < b.t; });
  for (Impulse& imp : imps) imp.t = std::clamp(imp.t, t0, tf);
  return imps;
}

}  // namespace

void Scenario::validate() const {
  sys.validate();
  if (!(window > 0.0)) throw ConfigError("window_hours: must be positive");
  if (n_grid_steps < 1) throw ConfigError("n_grid_steps: must be at least 1");
  strategy.validate();
  solver.validate();
}

double rms_km(const Vec3& err_du, const Cr3bpSystem& sys) {
  return std::sqrt(err_du.squaredNorm() / 3.0) * sys.du_km;
}

RelativeState propagate_ground_truth(const SynodicState& chief0, const RelativeState& deputy0,
                                     const std::vector<Impulse>& impulses, double tf,
                                     const Cr3bpSystem& sys, double tol) {
  const std::vector<Impulse> imps = sorted_impulses(impulses, chief0.t, tf);
  Dopri5 ode = ground_truth_integrator(sys, tol);
  Eigen::VectorXd y = pack(chief0, deputy0);
  double t = chief0.t;
  for (const Impulse& imp : imps) {
    y = ode.integrate(t, y, imp.t);
    t = imp.t;
    y.segment<3>(9) += imp.dv;
  }
  y = ode.integrate(t, y, tf);
  return {y.segment<3>(6), y.segment<3>(9), tf};
}

SimResult simulate(const ManeuverPlan& plan, const Scenario& scenario, const SolverReport* report,
                   const SimOptions& opts) {
  const double t0 = scenario.t0();
  const double tf = scenario.tf();
  const std::vector<Impulse> imps = sorted_impulses(plan.impulses, t0, tf);

  std::vector<double> epochs;
  const int n = std::max(opts.n_log_samples, 1);
  for (int i = 0; i <= n; ++i) epochs.push_back(i == n ? tf : t0 + scenario.window * i / n);
  for (const Impulse& imp : imps) epochs.push_back(imp.t);
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());

  SimResult out;
  out.log.impulses = imps;
  Dopri5 ode = ground_truth_integrator(scenario.sys, opts.tol);
  Eigen::VectorXd y = pack(scenario.chief0, scenario.deputy0);
  double t = t0;
  std::size_t next = 0;
  for (double te : epochs) {
    y = ode.integrate(t, y, te);
    t = te;
    while (next < imps.size() && imps[next].t <= te) {
      y.segment<3>(9) += imps[next].dv;
      ++next;
    }
    out.log.t.push_back(te);
    out.log.chief.push_back({y.segment<3>(0), y.segment<3>(3), te});
    out.log.deputy.push_back({y.segment<3>(6), y.segment<3>(9), te});
  }
  out.final_state = out.log.deputy.back();

  const Vec3 err = out.final_state.rho - scenario.deputy_f.rho;
  const double commanded = scenario.deputy_f.rho.norm();

  RunMetrics& m = out.metrics;
  m.cost_mps = plan.cost * scenario.sys.vu_kmps() * 1e3;
  m.final_rms_error_km = rms_km(err, scenario.sys);
  m.final_position_error_km = err.norm() * scenario.sys.du_km;
  if (commanded > 0.0) {
    m.final_error_pct = 100.0 * err.norm() / commanded;
  } else {
    m.final_error_pct = err.norm() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (report != nullptr) {
    m.stm_runtime_s = report->stm_runtime_s;
    m.solver_runtime_s = report->solver_runtime_s;
  }
  return out;
}

RunResult run_scenario(const Scenario& scenario, const SimOptions& opts) {
  scenario.validate();
  const ChiefTrajectory chief(scenario.chief0, scenario.tf(), scenario.sys);
  RunResult out;
  out.planned = plan(chief, scenario.deputy0, scenario.deputy_f, scenario.strategy,
                     scenario.n_grid_steps, scenario.solver);
  out.sim = simulate(out.planned.plan, scenario, &out.planned.report, opts);
  return out;
}

std::vector<ErrorSample> rms_propagation_error(const StmStrategy& strategy, const Scenario& scenario,
                                               const std::vector<double>& sample_times) {
  if (sample_times.empty()) return {};
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) ||
      sample_times.front() < scenario.t0()) {
    throw ConfigError("sample times must be increasing and start at or after t0");
  }
  const double horizon = std::max(sample_times.back(), scenario.t0() + 1e-12);
  const ChiefTrajectory chief(scenario.chief0, horizon, scenario.sys);
  const std::vector<Mat6> phis = propagation_stms(chief, strategy, sample_times);

  Dopri5 ode = ground_truth_integrator(scenario.sys, 1e-12);
  Eigen::VectorXd y = pack(scenario.chief0, scenario.deputy0);
  double t = scenario.t0();
  const Vec6 x0 = scenario.deputy0.stacked();
  std::vector<ErrorSample> out;
  out.reserve(sample_times.size());
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    y = ode.integrate(t, y, sample_times[k]);
    t = sample_times[k];
    const Vec3 err = (phis[k] * x0).head<3>() - y.segment<3>(6);
    out.push_back({t, rms_km(err, scenario.sys), err.norm() * scenario.sys.du_km});
  }
  return out;
}

}  // namespace lunarkd
