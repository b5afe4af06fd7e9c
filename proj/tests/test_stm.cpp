#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lunarkd/simulate.hpp"
#include "lunarkd/stm.hpp"

namespace lunarkd {
namespace {

const Cr3bpSystem kSys = Cr3bpSystem::earth_moon();

SynodicState nrho_apolune() {
  return nondimensionalize({Vec3(-13395.0, 0.0, -70841.0), Vec3(0.0, 0.1055, 0.0), 0.0}, kSys);
}

double rel(const Mat6& a, const Mat6& b) { return (a - b).norm() / b.norm(); }

// Linearised relative motion about a Keplerian chief, integrated in the
// radial / transverse / normal frame and mapped to LVLH axes.
Mat6 kepler_relative_oracle(const KeplerElements& el, double t0, double t1) {
  const double p = el.semi_latus_rectum();
  const double h = std::sqrt(el.gm * p);
  const double nu0 = el.true_anomaly_at(t0);
  const double gm = el.gm;
  Dopri5 ode(
      [h, gm](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy.resize(9);
        const double r = y(0), rd = y(1);
        const double nud = h / (r * r);
        const double nudd = -2.0 * h * rd / (r * r * r);
        const double k = gm / (r * r * r);
        dy(0) = rd;
        dy(1) = h * h / (r * r * r) - gm / (r * r);
        dy(2) = nud;
        const double x = y(3), yy = y(4), z = y(5), xd = y(6), yd = y(7), zd = y(8);
        dy(3) = xd;
        dy(4) = yd;
        dy(5) = zd;
        dy(6) = 2.0 * nud * yd + nudd * yy + nud * nud * x + 2.0 * k * x;
        dy(7) = -2.0 * nud * xd - nudd * x + nud * nud * yy - k * yy;
        dy(8) = -k * z;
      },
      OdeOptions{1e-13, 1e-15});
  Mat6 phi;
  for (int c = 0; c < 6; ++c) {
    Vec6 e_lvlh = Vec6::Zero();
    e_lvlh(c) = 1.0;
    Eigen::VectorXd y(9);
    y << p / (1.0 + el.e * std::cos(nu0)), std::sqrt(gm / p) * el.e * std::sin(nu0), nu0,
        rtn_from_lvlh(e_lvlh.head<3>()), rtn_from_lvlh(e_lvlh.tail<3>());
    const Eigen::VectorXd out = ode.integrate(t0, y, t1);
    phi.col(c) << lvlh_from_rtn(out.segment<3>(3)), lvlh_from_rtn(out.segment<3>(6));
  }
  return phi;
}

TEST(Stm, StrategyValidationAndTags) {
  EXPECT_THROW(StmStrategy::matrix_exponential(0.0).validate(), ConfigError);
  EXPECT_THROW(StmStrategy::numerical_integration(-1.0).validate(), ConfigError);
  EXPECT_THROW(StmStrategy::hcw(-1.0).validate(), ConfigError);
  for (const StmStrategy& s : {StmStrategy::matrix_exponential(0.01), StmStrategy::numerical_integration(),
                               StmStrategy::hcw(), StmStrategy::yamanaka_ankersen()}) {
    EXPECT_EQ(StmStrategy::kind_from_tag(s.tag()), s.kind);
  }
  EXPECT_THROW(StmStrategy::kind_from_tag("bogus"), ConfigError);
}

TEST(Stm, IdentityAtZeroElapsedTime) {
  const ChiefTrajectory chief(nrho_apolune(), 0.5, kSys);
  const SynodicState mid = chief.at(0.2);
  EXPECT_EQ(integrated_stm(mid, 0.2, kSys).phi, Mat6::Identity());
  EXPECT_EQ(chained_stm(chief, 0.2, 0.2, 0.01).phi, Mat6::Identity());
  EXPECT_EQ(hcw_stm(1.0, 0.0).phi, Mat6::Identity());
  const KeplerElements el = osculating_elements(chief.initial(), kSys);
  EXPECT_EQ(ya_stm(el, 0.3, 0.3).phi, Mat6::Identity());
}

TEST(Stm, IntegratedSemigroup) {
  const double t1 = 0.4, t2 = 1.1;
  const ChiefTrajectory chief(nrho_apolune(), t2, kSys);
  const Mat6 a = integrated_stm(chief.initial(), t1, kSys).phi;
  const Mat6 b = integrated_stm(propagate_absolute(chief.initial(), t1, kSys, 1e-14), t2, kSys).phi;
  const Mat6 ab = integrated_stm(chief.initial(), t2, kSys).phi;
  EXPECT_LT(rel(b * a, ab), 1e-10);
}

TEST(Stm, IntegratedMatchesGroundTruthPropagation) {
  const SynodicState c0 = nrho_apolune();
  const double tf = 1.3;
  const Mat6 phi = integrated_stm(c0, tf, kSys).phi;
  for (int k = 0; k < 6; ++k) {
    Vec6 x = Vec6::Zero();
    x(k) = 1e-3;
    const RelativeState truth =
        propagate_ground_truth(c0, RelativeState::from_stacked(x, 0.0), {}, tf, kSys);
    EXPECT_LT((truth.stacked() - phi * x).norm(), 1e-8 * (phi * x).norm()) << k;
  }
}

TEST(Stm, IntegratedDeterminantIsExponentialOfTraceIntegral) {
  // The plant has trace zero, so the flow preserves volume.
  const Mat6 phi = integrated_stm(nrho_apolune(), 1.0, kSys).phi;
  EXPECT_NEAR(phi.determinant(), 1.0, 1e-8);
}

TEST(Stm, ChainedComposesAtSegmentBoundaries) {
  const double step = 0.01;
  const ChiefTrajectory chief(nrho_apolune(), 0.6, kSys);
  const Mat6 whole = chained_stm(chief, 0.0, 0.6, step).phi;
  const Mat6 tail = chained_stm(chief, 0.3, 0.6, step).phi;
  const Mat6 head = chained_stm(chief, 0.0, 0.3, step).phi;
  EXPECT_LT(rel(tail * head, whole), 1e-12);
}

TEST(Stm, ChainedConvergesToIntegrated) {
  const ChiefTrajectory chief(nrho_apolune(), 0.6, kSys);
  const Mat6 truth = integrated_stm(chief.initial(), 0.6, kSys).phi;
  double prev_left = 0.0, prev_mid = 0.0;
  for (double step : {4e-3, 2e-3, 1e-3}) {
    const double left = rel(chained_stm(chief, 0.0, 0.6, step).phi, truth);
    const double mid = rel(chained_stm(chief, 0.0, 0.6, step, true).phi, truth);
    if (prev_left > 0.0) {
      EXPECT_NEAR(prev_left / left, 2.0, 0.3);  // first order
      EXPECT_NEAR(prev_mid / mid, 4.0, 0.6);    // second order
    }
    EXPECT_LT(mid, left);
    prev_left = left;
    prev_mid = mid;
  }
  EXPECT_LT(prev_left, 1e-2);
}

TEST(Stm, LtiStmIsExponential) {
  const PlantMatrix a = plant_matrix(nrho_apolune(), kSys);
  const Stm s = lti_stm(a, 0.0);
  EXPECT_EQ(s.phi, Mat6::Identity());
  EXPECT_THROW(lti_stm(a, -1.0), Error);
  const Mat6 half = lti_stm(a, 0.05).phi;
  EXPECT_LT(rel(half * half, lti_stm(a, 0.1).phi), 1e-13);
}

TEST(Stm, HcwMatchesIntegratedCircularRelativeMotion) {
  KeplerElements el;
  el.gm = kSys.mu;
  el.a = 0.02;
  el.e = 0.0;
  const double n = el.mean_motion();
  for (double dt : {0.1 / n, 1.0 / n, 7.5 / n}) {
    EXPECT_LT(rel(hcw_stm(n, dt).phi, kepler_relative_oracle(el, 0.0, dt)), 1e-9) << dt;
  }
}

TEST(Stm, YaReducesToHcwForCircularOrbits) {
  KeplerElements el;
  el.gm = kSys.mu;
  el.a = 0.03;
  el.e = 0.0;
  el.true_anomaly = 0.7;
  const double n = el.mean_motion();
  for (double dt : {0.3 / n, 2.0 / n, 11.0 / n}) {
    EXPECT_LT(rel(ya_stm(el, 1.0, 1.0 + dt).phi, hcw_stm(n, dt).phi), 1e-9) << dt;
  }
}

class YaEccentric : public ::testing::TestWithParam<double> {};

TEST_P(YaEccentric, MatchesIntegratedKeplerRelativeMotion) {
  KeplerElements el;
  el.gm = kSys.mu;
  el.a = 0.04;
  el.e = GetParam();
  el.true_anomaly = 0.4;
  el.epoch = 0.2;
  const double period = 2.0 * std::acos(-1.0) / el.mean_motion();
  for (double frac : {0.13, 0.5, 1.7}) {
    const double t0 = 0.35, t1 = t0 + frac * period;
    EXPECT_LT(rel(ya_stm(el, t0, t1).phi, kepler_relative_oracle(el, t0, t1)), 1e-8) << frac;
  }
}

INSTANTIATE_TEST_SUITE_P(Eccentricities, YaEccentric, ::testing::Values(0.05, 0.3, 0.7, 0.9));

TEST(Stm, YaRejectsUnboundOrbit) {
  KeplerElements el;
  el.gm = kSys.mu;
  el.a = 0.04;
  el.e = 1.2;
  EXPECT_THROW(ya_stm(el, 0.0, 1.0), Error);
}

TEST(Stm, OsculatingElementsOfCircularOrbit) {
  const double r = 0.02;
  const double v_inertial = std::sqrt(kSys.mu / r);
  // Synodic velocity is the inertial velocity minus z x r.
  const SynodicState s{Vec3(r, 0.0, 0.0), Vec3(0.0, v_inertial - r, 0.0), 0.0};
  const KeplerElements el = osculating_elements(s, kSys);
  EXPECT_NEAR(el.a, r, 1e-12);
  EXPECT_LT(el.e, 1e-10);
}

class GridStrategy : public ::testing::TestWithParam<StmStrategy> {};

TEST_P(GridStrategy, GridHoldsControlMapsOfEachTime) {
  const StmStrategy strategy = GetParam();
  const double tf = 0.5;
  const ChiefTrajectory chief(nrho_apolune(), tf, kSys);
  const int n = 25;
  const ControlGrid grid = build_control_grid(chief, strategy, n);
  ASSERT_EQ(grid.size(), static_cast<std::size_t>(n + 1));
  EXPECT_EQ(grid.times.front(), 0.0);
  EXPECT_EQ(grid.times.back(), tf);
  EXPECT_EQ(grid.strategy_tag, strategy.tag());
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    EXPECT_NEAR(grid.times[j + 1] - grid.times[j], tf / n, 1e-15);
    EXPECT_EQ(grid.gammas[j].t, grid.times[j]);
  }
  EXPECT_LT((grid.gammas.back().gamma - control_matrix()).norm(), 1e-15);
  EXPECT_LT((grid.gammas.front().gamma - grid.phi0.phi * control_matrix()).norm(), 1e-15);
  if (strategy.kind == StmKind::NumericalIntegration) {
    for (std::size_t j : {0u, 7u, 19u}) {
      const Mat6 phi = integrated_stm(chief.at(grid.times[j]), tf, kSys).phi;
      EXPECT_LT((grid.gammas[j].gamma - phi * control_matrix()).norm() / phi.norm(), 1e-9);
    }
  }
  if (strategy.kind == StmKind::Hcw) {
    const double nm = osculating_elements(chief.initial(), kSys).mean_motion();
    EXPECT_EQ(grid.gammas[3].gamma, Mat63(hcw_stm(nm, tf - grid.times[3]).phi * control_matrix()));
  }
}

TEST_P(GridStrategy, PropagationStmsMatchGrid) {
  const StmStrategy strategy = GetParam();
  const double tf = 0.5;
  const ChiefTrajectory chief(nrho_apolune(), tf, kSys);
  const ControlGrid grid = build_control_grid(chief, strategy, 10);
  const std::vector<Mat6> forward = propagation_stms(chief, strategy, {0.0, 0.2, tf});
  ASSERT_EQ(forward.size(), 3u);
  EXPECT_LT((forward[0] - Mat6::Identity()).norm(), 1e-14);
  EXPECT_LT(rel(forward[2], grid.phi0.phi), 1e-9);
  EXPECT_THROW(propagation_stms(chief, strategy, {0.3, 0.2}), Error);
}

TEST_P(GridStrategy, CacheRoundTripIsExact) {
  const ChiefTrajectory chief(nrho_apolune(), 0.3, kSys);
  const ControlGrid grid = build_control_grid(chief, GetParam(), 12);
  const auto path = std::filesystem::temp_directory_path() / ("lunarkd_grid_" + grid.strategy_tag + ".txt");
  write_control_grid(grid, path.string());
  const ControlGrid back = read_control_grid(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), grid.size());
  EXPECT_EQ(back.strategy_tag, grid.strategy_tag);
  EXPECT_EQ(back.phi0.phi, grid.phi0.phi);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    EXPECT_EQ(back.times[j], grid.times[j]);
    EXPECT_EQ(back.gammas[j].gamma, grid.gammas[j].gamma);
  }
}

INSTANTIATE_TEST_SUITE_P(Strategies, GridStrategy,
                         ::testing::Values(StmStrategy::matrix_exponential(0.01),
                                           StmStrategy::numerical_integration(),
                                           StmStrategy::hcw(), StmStrategy::yamanaka_ankersen()),
                         [](const auto& info) { return info.param.tag(); });

TEST(Stm, GridRejectsEmptyStepCount) {
  const ChiefTrajectory chief(nrho_apolune(), 0.3, kSys);
  EXPECT_THROW(build_control_grid(chief, StmStrategy::hcw(), 0), ConfigError);
}

TEST(Stm, ReadingMissingCacheFails) {
  EXPECT_THROW(read_control_grid("/nonexistent/grid.txt"), IoError);
}

TEST(ChiefTrajectory, DenseOutputMatchesDirectPropagation) {
  const SynodicState c0 = nrho_apolune();
  const ChiefTrajectory chief(c0, 1.0, kSys);
  for (double t : {0.0, 0.123, 0.5, 0.987, 1.0}) {
    const SynodicState direct = propagate_absolute(c0, t, kSys);
    EXPECT_LT((chief.at(t).stacked() - direct.stacked()).norm(), 1e-9) << t;
  }
  EXPECT_THROW(chief.at(1.5), Error);
  EXPECT_THROW(ChiefTrajectory(c0, -1.0, kSys), Error);
}

}  // namespace
}  // namespace lunarkd
