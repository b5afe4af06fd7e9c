#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lunarkd/mpc.hpp"

namespace lunarkd {
namespace {

const Cr3bpSystem kSys = Cr3bpSystem::earth_moon();
constexpr double kDeg = std::numbers::pi / 180.0;

Scenario small_scenario() {
  Scenario s;
  s.name = "mpc-small";
  s.chief0 = nondimensionalize({Vec3(-13395.0, 0.0, -70841.0), Vec3(0.0, 0.1055, 0.0), 0.0}, kSys);
  s.deputy0 = {Vec3(-30.0, -40.0, -20.0) / kSys.du_km, Vec3::Zero(), 0.0};
  s.deputy_f = {Vec3(30.0, 40.0, 20.0) / kSys.du_km, Vec3::Zero(), 0.0};
  s.window = 0.6;
  s.n_grid_steps = 200;
  s.strategy = StmStrategy::numerical_integration();
  return s;
}

NoiseModel only(auto setter) {
  NoiseModel n = NoiseModel::zero();
  setter(n);
  return n;
}

double stddev(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

TEST(Mpc, NoiseDefaultsAndValidation) {
  const NoiseModel n;
  EXPECT_EQ(n.chief_pos_km, 1.0);
  EXPECT_EQ(n.chief_vel_kmps, 0.01);
  EXPECT_EQ(n.deputy_pos_km, 0.01);
  EXPECT_EQ(n.deputy_vel_kmps, 0.001);
  EXPECT_EQ(n.maneuver_time_s, 60.0);
  EXPECT_EQ(n.maneuver_mag_kmps, 0.01);
  EXPECT_EQ(n.maneuver_dir_deg, 1.0);
  EXPECT_THROW(only([](NoiseModel& m) { m.deputy_pos_km = -1.0; }).validate(), ConfigError);
  MpcConfig c;
  c.n_segments = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Mpc, EstimateNoiseStatistics) {
  const NoiseModel noise;
  const SynodicState chief = small_scenario().chief0;
  const RelativeState deputy = small_scenario().deputy0;
  std::vector<double> cp, cv, dp, dv;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    CounterRng rng = CounterRng::stream(9, i);
    const SynodicState c = perturb_chief_estimate(chief, noise, kSys, rng);
    const RelativeState d = perturb_deputy_estimate(deputy, noise, kSys, rng);
    for (int k = 0; k < 3; ++k) {
      cp.push_back((c.r(k) - chief.r(k)) * kSys.du_km);
      cv.push_back((c.v(k) - chief.v(k)) * kSys.vu_kmps());
      dp.push_back((d.rho(k) - deputy.rho(k)) * kSys.du_km);
      dv.push_back((d.rho_dot(k) - deputy.rho_dot(k)) * kSys.vu_kmps());
    }
  }
  EXPECT_NEAR(stddev(cp), noise.chief_pos_km, 0.02 * noise.chief_pos_km);
  EXPECT_NEAR(stddev(cv), noise.chief_vel_kmps, 0.02 * noise.chief_vel_kmps);
  EXPECT_NEAR(stddev(dp), noise.deputy_pos_km, 0.02 * noise.deputy_pos_km);
  EXPECT_NEAR(stddev(dv), noise.deputy_vel_kmps, 0.02 * noise.deputy_vel_kmps);
  EXPECT_NEAR(mean(cp), 0.0, 0.02 * noise.chief_pos_km);
}

TEST(Mpc, ZeroDeviationLeavesStateUntouched) {
  const SynodicState chief = small_scenario().chief0;
  CounterRng rng = CounterRng::stream(1, 1);
  const NoiseModel n = only([](NoiseModel& m) { m.chief_pos_km = 1.0; });
  const SynodicState c = perturb_chief_estimate(chief, n, kSys, rng);
  EXPECT_EQ(c.v, chief.v);
  EXPECT_NE(c.r, chief.r);
  const RelativeState d = perturb_deputy_estimate(small_scenario().deputy0, n, kSys, rng);
  EXPECT_EQ(d.stacked(), small_scenario().deputy0.stacked());
}

TEST(Mpc, DirectionErrorPreservesMagnitude) {
  const NoiseModel n = only([](NoiseModel& m) { m.maneuver_dir_deg = 1.0; });
  const Impulse planned{0.2, 0, Vec3(3e-3, -1e-3, 2e-3)};
  std::vector<double> angles;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    CounterRng rng = CounterRng::stream(4, i);
    const Impulse e = perturb_maneuver(planned, n, kSys, rng);
    EXPECT_NEAR(e.dv.norm(), planned.dv.norm(), 1e-15 * planned.dv.norm());
    EXPECT_EQ(e.t, planned.t);
    angles.push_back(std::atan2(e.dv.cross(planned.dv).norm(), e.dv.dot(planned.dv)));
  }
  // |N(0, s)| has mean s sqrt(2/pi).
  EXPECT_NEAR(mean(angles), kDeg * std::sqrt(2.0 / std::numbers::pi), 0.02 * kDeg);
}

TEST(Mpc, MagnitudeErrorIsAdditiveAndFloored) {
  const NoiseModel n = only([](NoiseModel& m) { m.maneuver_mag_kmps = 0.01; });
  const double sigma = 0.01 / kSys.vu_kmps();
  const Vec3 dir = Vec3(1.0, 2.0, -2.0).normalized();
  std::vector<double> big, tiny;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    CounterRng r1 = CounterRng::stream(5, i);
    CounterRng r2 = CounterRng::stream(6, i);
    const Impulse a = perturb_maneuver({0.1, 0, 100.0 * sigma * dir}, n, kSys, r1);
    big.push_back(a.dv.norm() - 100.0 * sigma);
    EXPECT_GT(a.dv.normalized().dot(dir), 1.0 - 1e-12);
    const Impulse b = perturb_maneuver({0.1, 0, 1e-9 * sigma * dir}, n, kSys, r2);
    tiny.push_back(b.dv.norm());
  }
  EXPECT_NEAR(stddev(big), sigma, 0.02 * sigma);
  EXPECT_NEAR(mean(big), 0.0, 0.02 * sigma);
  // max(0, N(0, s)) has mean s / sqrt(2 pi).
  EXPECT_NEAR(mean(tiny), sigma / std::sqrt(2.0 * std::numbers::pi), 0.02 * sigma);
}

TEST(Mpc, TimingErrorStatistics) {
  const NoiseModel n = only([](NoiseModel& m) { m.maneuver_time_s = 60.0; });
  std::vector<double> dt;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    CounterRng rng = CounterRng::stream(7, i);
    dt.push_back((perturb_maneuver({0.3, 0, Vec3(1e-3, 0.0, 0.0)}, n, kSys, rng).t - 0.3) * kSys.tu_s);
  }
  EXPECT_NEAR(stddev(dt), 60.0, 1.2);
}

TEST(Mpc, ZeroImpulseRejected) {
  CounterRng rng(1);
  EXPECT_THROW(perturb_maneuver({0.0, 0, Vec3::Zero()}, NoiseModel{}, kSys, rng), ConfigError);
}

TEST(Mpc, NoiselessSingleSegmentMatchesOpenPlan) {
  const Scenario s = small_scenario();
  MpcConfig cfg;
  cfg.n_segments = 1;
  cfg.noise = NoiseModel::zero();
  const MpcResult m = mpc_run(s, cfg);
  const RunResult r = run_scenario(s);
  for (const ControlRun* run : {&m.closed_loop, &m.open_loop}) {
    EXPECT_EQ(run->sim.final_state.stacked(), r.sim.final_state.stacked());
    EXPECT_EQ(run->sim.metrics.cost_mps, r.sim.metrics.cost_mps);
    EXPECT_EQ(run->sim.metrics.final_position_error_km, r.sim.metrics.final_position_error_km);
    ASSERT_EQ(run->executed.impulses.size(), r.planned.plan.impulses.size());
    for (std::size_t i = 0; i < run->executed.impulses.size(); ++i) {
      EXPECT_EQ(run->executed.impulses[i].t, r.planned.plan.impulses[i].t);
      EXPECT_EQ(run->executed.impulses[i].dv, r.planned.plan.impulses[i].dv);
    }
  }
}

TEST(Mpc, NoiselessRecedingHorizonReachesTarget) {
  const Scenario s = small_scenario();
  MpcConfig cfg;
  cfg.n_segments = 4;
  cfg.noise = NoiseModel::zero();
  const MpcResult m = mpc_run(s, cfg);
  ASSERT_EQ(m.closed_loop.segments.size(), 4u);
  EXPECT_LT(m.closed_loop.sim.metrics.final_position_error_km, 1e-4);
  for (const SegmentPlan& seg : m.closed_loop.segments) {
    for (const Impulse& imp : seg.executed) {
      EXPECT_GE(imp.t, seg.t_start);
      EXPECT_LE(imp.t, seg.t_end);
    }
  }
  EXPECT_EQ(m.closed_loop.segments.back().t_end, s.tf());
}

TEST(Mpc, RunsAreReproducibleAndSeedDependent) {
  const Scenario s = small_scenario();
  MpcConfig cfg;
  cfg.n_segments = 3;
  cfg.seed = 77;
  const MpcResult a = mpc_run(s, cfg);
  const MpcResult b = mpc_run(s, cfg);
  EXPECT_EQ(a.closed_loop.sim.final_state.stacked(), b.closed_loop.sim.final_state.stacked());
  EXPECT_EQ(a.open_loop.sim.final_state.stacked(), b.open_loop.sim.final_state.stacked());
  cfg.seed = 78;
  const MpcResult c = mpc_run(s, cfg);
  EXPECT_NE(a.closed_loop.sim.final_state.stacked(), c.closed_loop.sim.final_state.stacked());
}

TEST(Mpc, OpenLoopSharesFirstSegmentEstimates) {
  const Scenario s = small_scenario();
  MpcConfig cfg;
  cfg.n_segments = 3;
  const MpcResult m = mpc_run(s, cfg);
  EXPECT_EQ(m.open_loop.segments.front().deputy_estimate.stacked(),
            m.closed_loop.segments.front().deputy_estimate.stacked());
  EXPECT_EQ(m.open_loop.segments.front().chief_estimate.stacked(),
            m.closed_loop.segments.front().chief_estimate.stacked());
}

}  // namespace
}  // namespace lunarkd
