#include <benchmark/benchmark.h>

#include <random>

#include "lunarkd/chief_trajectory.hpp"
#include "lunarkd/expm.hpp"
#include "lunarkd/kd_solver.hpp"
#include "lunarkd/relative_dynamics.hpp"
#include "lunarkd/stm.hpp"

namespace {

using namespace lunarkd;

const Cr3bpSystem kSys = Cr3bpSystem::earth_moon();

SynodicState nrho_apolune() {
  return nondimensionalize({Vec3(-13395.0, 0.0, -70841.0), Vec3(0.0, 0.1055, 0.0), 0.0}, kSys);
}

RelativeState rel_km(const Vec3& rho_km) { return {rho_km / kSys.du_km, Vec3::Zero(), 0.0}; }

void BM_ExpmPlant(benchmark::State& state) {
  const Mat6 a = plant_matrix(nrho_apolune(), kSys).a * (static_cast<double>(state.range(0)) * 60.0 / kSys.tu_s);
  for (auto _ : state) benchmark::DoNotOptimize(expm(a));
}
BENCHMARK(BM_ExpmPlant)->Arg(1)->Arg(10)->Arg(100);

void BM_GridBuild(benchmark::State& state) {
  const ChiefTrajectory chief(nrho_apolune(), 66.84 * 3600.0 / kSys.tu_s, kSys);
  const StmStrategy strategies[] = {StmStrategy::matrix_exponential(600.0 / kSys.tu_s),
                                    StmStrategy::numerical_integration(), StmStrategy::hcw(),
                                    StmStrategy::yamanaka_ankersen()};
  const StmStrategy& st = strategies[state.range(0)];
  state.SetLabel(st.tag());
  for (auto _ : state) benchmark::DoNotOptimize(build_control_grid(chief, st, 1000));
}
BENCHMARK(BM_GridBuild)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const ChiefTrajectory chief(nrho_apolune(), 66.84 * 3600.0 / kSys.tu_s, kSys);
  const ControlGrid grid = build_control_grid(chief, StmStrategy::numerical_integration(),
                                              static_cast<int>(state.range(0)));
  const RelativeState x0 = rel_km(Vec3(-300.0, -400.0, -200.0));
  const RelativeState xf = rel_km(Vec3(300.0, 400.0, 200.0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(grid, x0, xf, SolverConfig{}));
}
BENCHMARK(BM_Solve)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
