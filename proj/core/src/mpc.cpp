#include "lunarkd/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "lunarkd/chief_trajectory.hpp"

namespace lunarkd {
namespace {

constexpr std::uint64_t kEstimateStream = 2;
constexpr std::uint64_t kManeuverStream = 3;
constexpr std::uint64_t kChief = 0;
constexpr std::uint64_t kDeputy = 1;

void add_noise(Vec3& v, double sigma, CounterRng& rng) {
  if (sigma == 0.0) return;
  std::normal_distribution<double> n(0.0, sigma);
  for (int k = 0; k < 3; ++k) v(k) += n(rng);
}

void check_std(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("mpc.noise.") + key + ": must be finite and non-negative");
  }
}

struct Estimates {
  SynodicState chief;
  RelativeState deputy;
};

Estimates estimate(const SynodicState& chief, const RelativeState& deputy, const MpcConfig& cfg,
                   const Cr3bpSystem& sys, int segment) {
  const auto s = static_cast<std::uint64_t>(segment);
  CounterRng rc = CounterRng::stream(cfg.seed, kEstimateStream, s, kChief);
  CounterRng rd = CounterRng::stream(cfg.seed, kEstimateStream, s, kDeputy);
  return {perturb_chief_estimate(chief, cfg.noise, sys, rc),
          perturb_deputy_estimate(deputy, cfg.noise, sys, rd)};
}

Impulse execute(const Impulse& imp, const MpcConfig& cfg, const Cr3bpSystem& sys, int segment,
                std::size_t index, double lo, double hi) {
  CounterRng rng = CounterRng::stream(cfg.seed, kManeuverStream, static_cast<std::uint64_t>(segment),
                                      index);
  Impulse out = imp.dv.squaredNorm() > 0.0 ? perturb_maneuver(imp, cfg.noise, sys, rng) : imp;
  out.t = std::clamp(out.t, lo, hi);
  return out;
}

int grid_steps_for(const Scenario& sc, double remaining) {
  const double n = std::round(sc.n_grid_steps * remaining / sc.window);
  return std::max(1, static_cast<int>(n));
}

PlanResult plan_segment(const Scenario& sc, const Estimates& est, double t_start, int segment) {
  SynodicState chief = est.chief;
  chief.t = t_start;
  RelativeState x0 = est.deputy;
  x0.t = t_start;
  try {
    const ChiefTrajectory traj(chief, sc.tf(), sc.sys);
    return plan(traj, x0, sc.deputy_f, sc.strategy, grid_steps_for(sc, sc.tf() - t_start),
                sc.solver);
  } catch (const Error& e) {
    throw SolverError("mpc segment " + std::to_string(segment) + " at t=" +
                      std::to_string(t_start) + " TU: " + e.what());
  }
}

void finish(ControlRun& run, const Scenario& sc, const SimOptions& opts) {
  for (const SegmentPlan& seg : run.segments) {
    run.executed.impulses.insert(run.executed.impulses.end(), seg.executed.begin(),
                                 seg.executed.end());
  }
  run.executed.update_cost();
  run.sim = simulate(run.executed, sc, nullptr, opts);
  for (const SegmentPlan& seg : run.segments) {
    run.sim.metrics.stm_runtime_s += seg.planned.report.stm_runtime_s;
    run.sim.metrics.solver_runtime_s += seg.planned.report.solver_runtime_s;
  }
}

}  // namespace

void NoiseModel::validate() const {
  check_std(chief_pos_km, "chief_pos_km");
  check_std(chief_vel_kmps, "chief_vel_kmps");
  check_std(deputy_pos_km, "deputy_pos_km");
  check_std(deputy_vel_kmps, "deputy_vel_kmps");
  check_std(maneuver_time_s, "maneuver_time_s");
  check_std(maneuver_mag_kmps, "maneuver_mag_kmps");
  check_std(maneuver_dir_deg, "maneuver_dir_deg");
}

void MpcConfig::validate() const {
  if (n_segments < 1) throw ConfigError("mpc.n_segments: must be at least 1");
  noise.validate();
}

SynodicState perturb_chief_estimate(const SynodicState& truth, const NoiseModel& noise,
                                    const Cr3bpSystem& sys, CounterRng& rng) {
  SynodicState s = truth;
  add_noise(s.r, noise.chief_pos_km / sys.du_km, rng);
  add_noise(s.v, noise.chief_vel_kmps / sys.vu_kmps(), rng);
  return s;
}

RelativeState perturb_deputy_estimate(const RelativeState& truth, const NoiseModel& noise,
                                      const Cr3bpSystem& sys, CounterRng& rng) {
  RelativeState s = truth;
  add_noise(s.rho, noise.deputy_pos_km / sys.du_km, rng);
  add_noise(s.rho_dot, noise.deputy_vel_kmps / sys.vu_kmps(), rng);
  return s;
}

Impulse perturb_maneuver(const Impulse& planned, const NoiseModel& noise, const Cr3bpSystem& sys,
                         CounterRng& rng) {
  const double mag = planned.dv.norm();
  if (!(mag > 0.0)) throw ConfigError("perturb_maneuver: impulse must be non-zero");
  Impulse out = planned;
  if (noise.maneuver_time_s != 0.0) {
    std::normal_distribution<double> n(0.0, noise.maneuver_time_s / sys.tu_s);
    out.t += n(rng);
  }
  if (noise.maneuver_mag_kmps != 0.0) {
    std::normal_distribution<double> n(0.0, noise.maneuver_mag_kmps / sys.vu_kmps());
    out.dv *= std::max(0.0, mag + n(rng)) / mag;
  }
  if (noise.maneuver_dir_deg != 0.0) {
    std::normal_distribution<double> n(0.0, noise.maneuver_dir_deg * std::numbers::pi / 180.0);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const double tilt = n(rng);
    const double phi = u(rng);
    const Vec3 d = planned.dv / mag;
    const Vec3 e1 = d.unitOrthogonal();
    const Vec3 e2 = d.cross(e1);
    const Vec3 axis = std::cos(phi) * e1 + std::sin(phi) * e2;
    out.dv = Eigen::AngleAxisd(tilt, axis) * out.dv;
  }
  return out;
}

MpcResult mpc_run(const Scenario& scenario, const MpcConfig& cfg, const SimOptions& opts) {
  scenario.validate();
  cfg.validate();
  const Cr3bpSystem& sys = scenario.sys;
  const double t0 = scenario.t0();
  const double tf = scenario.tf();
  const int n = cfg.n_segments;
  auto boundary = [&](int s) { return s == n ? tf : t0 + scenario.window * s / n; };

  MpcResult out;

  // Open loop: the first segment's estimates, one plan, every impulse flown.
  {
    SegmentPlan seg;
    seg.segment = 0;
    seg.t_start = t0;
    seg.t_end = tf;
    const Estimates est = estimate(scenario.chief0, scenario.deputy0, cfg, sys, 0);
    seg.chief_estimate = est.chief;
    seg.deputy_estimate = est.deputy;
    seg.planned = plan_segment(scenario, est, t0, 0);
    const auto& imps = seg.planned.plan.impulses;
    for (std::size_t j = 0; j < imps.size(); ++j) {
      seg.executed.push_back(execute(imps[j], cfg, sys, 0, j, t0, tf));
    }
    out.open_loop.segments.push_back(std::move(seg));
    finish(out.open_loop, scenario, opts);
  }

  SynodicState chief = scenario.chief0;
  RelativeState deputy = scenario.deputy0;
  std::vector<Impulse> flown;
  for (int s = 0; s < n; ++s) {
    SegmentPlan seg;
    seg.segment = s;
    seg.t_start = boundary(s);
    seg.t_end = boundary(s + 1);
    if (s > 0) {
      chief = propagate_absolute(scenario.chief0, seg.t_start, sys, opts.tol);
      deputy = propagate_ground_truth(scenario.chief0, scenario.deputy0, flown, seg.t_start, sys,
                                      opts.tol);
    }
    const Estimates est = estimate(chief, deputy, cfg, sys, s);
    seg.chief_estimate = est.chief;
    seg.deputy_estimate = est.deputy;
    seg.planned = plan_segment(scenario, est, seg.t_start, s);
    const bool last = s == n - 1;
    const auto& imps = seg.planned.plan.impulses;
    for (std::size_t j = 0; j < imps.size(); ++j) {
      if (!last && imps[j].t >= seg.t_end) continue;
      seg.executed.push_back(execute(imps[j], cfg, sys, s, j, seg.t_start, seg.t_end));
    }
    flown.insert(flown.end(), seg.executed.begin(), seg.executed.end());
    out.closed_loop.segments.push_back(std::move(seg));
  }
  finish(out.closed_loop, scenario, opts);
  return out;
}

}  // namespace lunarkd
