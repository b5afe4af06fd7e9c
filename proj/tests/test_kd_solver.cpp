#include <gtest/gtest.h>

#include <random>

#include "lunarkd/kd_solver.hpp"
#include "lunarkd/random.hpp"
#include "lunarkd/socp.hpp"
#include "oracles.hpp"

namespace lunarkd {
namespace {

const Cr3bpSystem kSys = Cr3bpSystem::earth_moon();

SynodicState nrho_apolune() {
  return nondimensionalize({Vec3(-13395.0, 0.0, -70841.0), Vec3(0.0, 0.1055, 0.0), 0.0}, kSys);
}

RelativeState rel_km(const Vec3& rho_km, const Vec3& rho_dot_kmps) {
  return {rho_km / kSys.du_km, rho_dot_kmps / kSys.vu_kmps(), 0.0};
}

ControlGrid toy_grid(const std::vector<Mat63>& gammas) {
  ControlGrid grid;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    grid.times.push_back(static_cast<double>(j));
    grid.gammas.push_back({gammas[j], static_cast<double>(j)});
  }
  grid.phi0.phi = Mat6::Identity();
  return grid;
}

Mat63 random_gamma(CounterRng& rng) {
  std::normal_distribution<double> g;
  Mat63 m;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = g(rng);
  return m;
}

struct NrhoProblem {
  ChiefTrajectory chief{nrho_apolune(), 0.6, kSys};
  RelativeState x0 = rel_km(Vec3(-10.0, 5.0, 3.0), Vec3(1e-4, 0.0, -2e-4));
  RelativeState xf = rel_km(Vec3(20.0, -4.0, 8.0), Vec3::Zero());
};

TEST(SolverConfig, Validation) {
  EXPECT_NO_THROW(SolverConfig{}.validate());
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](SolverConfig& c) { c.eps_cost = 0.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.eps_remove = 1.0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.init_stride = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.init_keep = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.max_refine_iters = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](SolverConfig& c) { c.socp_tol = -1.0; }).validate(), ConfigError);
}

TEST(KdSolver, ContactIsSupportFunction) {
  CounterRng rng = CounterRng::stream(1, 1);
  const Mat63 g = random_gamma(rng);
  const Vec6 lam = g * Vec3(1.0, -2.0, 0.5);
  const Contact c = contact(g, lam);
  EXPECT_FALSE(c.degenerate);
  EXPECT_NEAR(c.direction.norm(), 1.0, 1e-15);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
    EXPECT_LE(lam.dot(g * d), c.value + 1e-12);
  }
  EXPECT_NEAR(lam.dot(g * c.direction), c.value, 1e-12);
  EXPECT_TRUE(contact(g, Vec6::Zero()).degenerate);
}

TEST(KdSolver, TwoCandidateToyMatchesUniqueSolution) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng = CounterRng::stream(seed, 2);
    const Mat63 g0 = random_gamma(rng), g1 = random_gamma(rng);
    const Vec3 u0(0.3, -0.1, 0.2), u1(-0.05, 0.4, 0.1);
    const ControlGrid grid = toy_grid({g0, g1});
    const RelativeState xf = RelativeState::from_stacked(g0 * u0 + g1 * u1, 1.0);
    SolverConfig cfg;
    cfg.init_stride = 1;
    const PlanResult r = solve(grid, RelativeState{}, xf, cfg);
    EXPECT_NEAR(r.plan.cost, u0.norm() + u1.norm(), 1e-6) << seed;
    ASSERT_EQ(r.plan.impulses.size(), 2u);
    EXPECT_LT((r.plan.impulses[0].dv - u0).norm(), 1e-6);
    EXPECT_LT((r.plan.impulses[1].dv - u1).norm(), 1e-6);
  }
}

TEST(KdSolver, SmallToyMatchesSampledOptimum) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CounterRng rng = CounterRng::stream(seed, 3);
    std::vector<Mat63> gammas;
    for (int j = 0; j < 4; ++j) gammas.push_back(random_gamma(rng));
    const Vec6 omega = gammas[0] * Vec3(1.0, 0.0, 0.0) + gammas[2] * Vec3(0.0, 0.5, 0.5) +
                       gammas[3] * Vec3(0.2, 0.2, -0.1);
    SolverConfig cfg;
    cfg.init_stride = 1;
    cfg.init_keep = 2;
    const PlanResult r = solve(toy_grid(gammas), RelativeState{}, RelativeState::from_stacked(omega, 3.0), cfg);
    const double oracle = test::sampled_primal_optimum(gammas, omega, seed);
    EXPECT_NEAR(r.plan.cost, oracle, 1e-3 * oracle) << seed;
    EXPECT_LT(r.plan.residual, 1e-8 * omega.norm());
  }
}

TEST(KdSolver, NrhoPlanSatisfiesOptimalityConditions) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::numerical_integration(), 300);
  const SolverConfig cfg;
  const PlanResult r = solve(grid, p.x0, p.xf, cfg);
  const Pseudostate omega = pseudostate(p.x0, p.xf, grid);

  EXPECT_GE(r.plan.impulses.size(), 1u);
  EXPECT_LE(r.plan.impulses.size(), 6u);
  EXPECT_LT(r.plan.residual, 1e-8 * omega.omega.norm());
  EXPECT_FALSE(r.plan.reachability_deficient);
  EXPECT_LE(r.report.max_contact, 1.0 + cfg.eps_cost);
  EXPECT_NEAR(r.plan.cost, r.report.dual_value, 1e-6 * r.plan.cost);
  EXPECT_NEAR(omega.omega.dot(r.report.lambda_opt.lambda), r.report.dual_value, 1e-9 * r.plan.cost);
  const std::vector<double> g = contact_sweep(grid, r.report.lambda_opt.lambda);
  EXPECT_LE(*std::max_element(g.begin(), g.end()), 1.0 + 1e-4);
  for (const Impulse& imp : r.plan.impulses) {
    EXPECT_EQ(imp.t, grid.times[imp.grid_index]);
    EXPECT_NEAR(g[imp.grid_index], 1.0, 1e-4);
    const Contact c = contact(grid.gammas[imp.grid_index].gamma, r.report.lambda_opt.lambda);
    EXPECT_GT(imp.dv.normalized().dot(c.direction), 1.0 - 1e-6);
  }
  EXPECT_EQ(r.report.candidate_history.size(), static_cast<std::size_t>(r.report.refine_iterations));
}

TEST(KdSolver, NrhoPlanMatchesFullGridConeSolve) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::numerical_integration(), 120);
  const PlanResult r = solve(grid, p.x0, p.xf, SolverConfig{});
  std::vector<Mat63> all;
  for (const ControlMap& m : grid.gammas) all.push_back(m.gamma);
  // Unit-free scaling keeps the direct solve well conditioned.
  const double s = 1.0 / all[0].norm();
  for (Mat63& m : all) m *= s;
  const Pseudostate omega = pseudostate(p.x0, p.xf, grid);
  const ConeSolution direct = solve_cone_dual(all, omega.omega);
  EXPECT_NEAR(r.plan.cost, direct.primal_value * s, 1e-5 * r.plan.cost);
}

TEST(KdSolver, CostIsPositivelyHomogeneous) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::numerical_integration(), 200);
  const PlanResult a = solve(grid, p.x0, p.xf, SolverConfig{});
  const RelativeState x0s = RelativeState::from_stacked(3.0 * p.x0.stacked(), 0.0);
  const RelativeState xfs = RelativeState::from_stacked(3.0 * p.xf.stacked(), 0.0);
  const PlanResult b = solve(grid, x0s, xfs, SolverConfig{});
  EXPECT_NEAR(b.plan.cost, 3.0 * a.plan.cost, 1e-6 * b.plan.cost);
}

TEST(KdSolver, ZeroTargetNeedsNoImpulse) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::numerical_integration(), 50);
  const RelativeState drift = RelativeState::from_stacked(grid.phi0.phi * p.x0.stacked(), 0.6);
  const PlanResult r = solve(grid, p.x0, drift, SolverConfig{});
  EXPECT_TRUE(r.report.zero_target);
  EXPECT_TRUE(r.plan.impulses.empty());
  EXPECT_EQ(r.plan.cost, 0.0);
}

TEST(KdSolver, InitializationKeepsStrongestStridedCandidates) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::hcw(), 100);
  const Pseudostate omega = pseudostate(p.x0, p.xf, grid);
  SolverConfig cfg;
  cfg.init_stride = 7;
  cfg.init_keep = 4;
  const CandidateSet set = initialize(omega, grid, cfg);
  ASSERT_EQ(set.indices.size(), 4u);
  const Vec6 dir = omega.omega.normalized();
  double weakest_kept = 1e300;
  for (std::size_t i : set.indices) {
    EXPECT_EQ(i % 7, 0u);
    weakest_kept = std::min(weakest_kept, contact(grid.gammas[i].gamma, dir).value);
  }
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    if (std::find(set.indices.begin(), set.indices.end(), i) == set.indices.end()) {
      EXPECT_LE(contact(grid.gammas[i].gamma, dir).value, weakest_kept);
    }
  }
  EXPECT_THROW(initialize(Pseudostate{}, grid, cfg), SolverError);
}

TEST(KdSolver, UnreachableTargetRaises) {
  Mat63 g = Mat63::Zero();
  g.bottomRows<3>() = Mat3::Identity();  // velocity only
  Vec6 omega = Vec6::Zero();
  omega(0) = 1.0;
  EXPECT_THROW(solve(toy_grid({g, g, g}), RelativeState{}, RelativeState::from_stacked(omega, 2.0),
                     SolverConfig{}),
               InfeasibleTargetError);
}

TEST(KdSolver, RefineBudgetExhaustionRaises) {
  const NrhoProblem p;
  const ControlGrid grid = build_control_grid(p.chief, StmStrategy::numerical_integration(), 300);
  SolverConfig cfg;
  cfg.max_refine_iters = 1;
  cfg.init_keep = 1;
  EXPECT_THROW(solve(grid, p.x0, p.xf, cfg), NonConvergenceError);
}

}  // namespace
}  // namespace lunarkd
