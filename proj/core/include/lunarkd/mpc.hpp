#pragma once

#include <cstdint>
#include <vector>

#include "lunarkd/random.hpp"
#include "lunarkd/simulate.hpp"

namespace lunarkd {

/// Zero-mean Gaussian navigation and execution errors (standard deviations).
/// The magnitude error is additive on |dv| in km/s.
struct NoiseModel {
  double chief_pos_km = 1.0;
  double chief_vel_kmps = 0.01;
  double deputy_pos_km = 0.01;
  double deputy_vel_kmps = 0.001;
  double maneuver_time_s = 60.0;
  double maneuver_mag_kmps = 0.01;
  double maneuver_dir_deg = 1.0;

  static NoiseModel zero() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
  void validate() const;
};

struct MpcConfig {
  int n_segments = 10;
  NoiseModel noise;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Noisy navigation estimates. States are nondimensional; the standard
/// deviations are converted with `sys`. A zero deviation leaves the
/// corresponding components untouched.
SynodicState perturb_chief_estimate(const SynodicState& truth, const NoiseModel& noise,
                                    const Cr3bpSystem& sys, CounterRng& rng);
RelativeState perturb_deputy_estimate(const RelativeState& truth, const NoiseModel& noise,
                                      const Cr3bpSystem& sys, CounterRng& rng);

/// Execution error of one impulse: shifted epoch, additive magnitude error
/// (floored at zero) and a tilt about a uniformly random axis perpendicular
/// to dv. Throws ConfigError for a zero impulse.
Impulse perturb_maneuver(const Impulse& planned, const NoiseModel& noise, const Cr3bpSystem& sys,
                         CounterRng& rng);

struct SegmentPlan {
  int segment = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  SynodicState chief_estimate;
  RelativeState deputy_estimate;
  PlanResult planned;
  std::vector<Impulse> executed;
};

struct ControlRun {
  std::vector<SegmentPlan> segments;
  ManeuverPlan executed;  // impulses as flown
  SimResult sim;          // ground truth of the executed plan
};

struct MpcResult {
  ControlRun closed_loop;
  ControlRun open_loop;  // one plan at t0, same noise realizations
};

/// Receding-horizon control over the scenario window. At each segment
/// boundary the remaining window is re-planned from noisy estimates and the
/// impulses falling inside the segment are executed with noise. The grid keeps
/// the scenario's spacing. Solver failures raise SolverError naming the segment.
MpcResult mpc_run(const Scenario& scenario, const MpcConfig& cfg, const SimOptions& opts = {});

}  // namespace lunarkd
