#pragma once

#include <string>
#include <vector>

#include "lunarkd/kd_solver.hpp"

namespace lunarkd {

/// A reconfiguration problem. All quantities nondimensional; conversions
/// happen in the scenario reader and the writers.
struct Scenario {
  std::string name;
  Cr3bpSystem sys = Cr3bpSystem::earth_moon();
  SynodicState chief0;
  RelativeState deputy0;
  RelativeState deputy_f;
  double window = 0.0;  // TU
  int n_grid_steps = 1000;
  StmStrategy strategy;
  SolverConfig solver;

  double t0() const { return chief0.t; }
  double tf() const { return chief0.t + window; }
  void validate() const;
};

struct TrajectoryLog {
  std::vector<double> t;
  std::vector<SynodicState> chief;
  std::vector<RelativeState> deputy;
  std::vector<Impulse> impulses;
};

struct RunMetrics {
  double cost_mps = 0.0;
  double final_rms_error_km = 0.0;       // sqrt(mean of the squared position errors)
  double final_position_error_km = 0.0;  // |position error|
  double final_error_pct = 0.0;          // percent of |target position|
  double stm_runtime_s = 0.0;
  double solver_runtime_s = 0.0;
};

struct SimResult {
  TrajectoryLog log;
  RunMetrics metrics;
  RelativeState final_state;
};

struct SimOptions {
  int n_log_samples = 1000;  // uniform samples besides the impulse epochs
  double tol = 1e-12;
};

/// Ground truth: the chief's nonlinear CR3BP motion integrated jointly with the
/// deputy's linear relative dynamics, impulses applied instantaneously.
/// Impulses must lie within [t0, tf].
SimResult simulate(const ManeuverPlan& plan, const Scenario& scenario,
                   const SolverReport* report = nullptr, const SimOptions& opts = {});

/// Ground-truth deputy state at tf with impulses applied; no log is kept.
RelativeState propagate_ground_truth(const SynodicState& chief0, const RelativeState& deputy0,
                                     const std::vector<Impulse>& impulses, double tf,
                                     const Cr3bpSystem& sys, double tol = 1e-12);

/// Plan then simulate.
struct RunResult {
  PlanResult planned;
  SimResult sim;
};
RunResult run_scenario(const Scenario& scenario, const SimOptions& opts = {});

/// Free-drift propagation error of an STM strategy against the ground truth.
struct ErrorSample {
  double t = 0.0;          // TU since the scenario start
  double rms_km = 0.0;     // sqrt(mean of the squared position errors)
  double norm_km = 0.0;
};
std::vector<ErrorSample> rms_propagation_error(const StmStrategy& strategy, const Scenario& scenario,
                                               const std::vector<double>& sample_times);

/// sqrt(mean of squared components) of a position error, km.
double rms_km(const Vec3& err_du, const Cr3bpSystem& sys);

}  // namespace lunarkd
