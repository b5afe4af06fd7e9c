// lunarkd: plan, simulate and analyse impulsive relative-motion
// reconfigurations in the Earth-Moon CR3BP.
//
// Exit codes: 0 ok, 2 usage, 3 scenario/config parse, 4 solver,
// 5 simulation, 6 I/O.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lunarkd/halo_catalog.hpp"
#include "lunarkd/monte_carlo.hpp"
#include "lunarkd/mpc.hpp"
#include "lunarkd/scenario_io.hpp"

#ifndef LUNARKD_INSTALL_DATA_DIR
#define LUNARKD_INSTALL_DATA_DIR "share/lunarkd"
#endif
#ifndef LUNARKD_SOURCE_DATA_DIR
#define LUNARKD_SOURCE_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;
using namespace lunarkd;

enum Exit : int { kOk = 0, kUsage = 2, kParse = 3, kSolver = 4, kSimulation = 5, kIo = 6 };

constexpr double kDefaultMeStepMinutes = 10.0;

struct Globals {
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string strategy;
  std::string constants;
  int jobs = 1;
};

struct Context {
  Globals g;
  Cr3bpSystem sys;
  std::string scenario_path;
  std::string scenario_text;
  ScenarioFile file;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Cr3bpSystem resolve_constants(const Globals& g) {
  std::string path = g.constants;
  if (path.empty()) {
    if (const char* env = std::getenv("LUNARKD_CONSTANTS")) path = env;
  }
  return path.empty() ? Cr3bpSystem::earth_moon() : Cr3bpSystem::from_file(path);
}

std::string out_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());
  return (fs::path(g.out) / name).string();
}

void load(Context& ctx) {
  ctx.sys = resolve_constants(ctx.g);
  ctx.scenario_text = slurp(ctx.scenario_path);
  ctx.file = parse_scenario(ctx.scenario_text, ctx.sys);
  ctx.sys = ctx.file.scenario.sys;
  if (!ctx.g.strategy.empty()) {
    StmStrategy& st = ctx.file.scenario.strategy;
    st.kind = StmStrategy::kind_from_tag(ctx.g.strategy);
    if (st.kind == StmKind::MatrixExponential && !(st.step > 0.0)) {
      st.step = kDefaultMeStepMinutes * 60.0 / ctx.sys.tu_s;
    }
    st.validate();
  }
  if (ctx.g.seed) {
    ctx.file.mpc.seed = *ctx.g.seed;
    ctx.file.montecarlo.seed = *ctx.g.seed;
  }
  if (ctx.g.trials) ctx.file.montecarlo.n_trials = *ctx.g.trials;
  ctx.file.montecarlo.jobs = ctx.g.jobs;
}

std::map<std::string, std::string> manifest_fields(const Context& ctx, const std::string& command) {
  std::map<std::string, std::string> f;
  f["command"] = command;
  f["scenario"] = ctx.scenario_path;
  std::string effective = ctx.scenario_text + "\n--strategy=" + ctx.g.strategy;
  if (ctx.g.seed) effective += "\n--seed=" + std::to_string(*ctx.g.seed);
  if (ctx.g.trials) effective += "\n--trials=" + std::to_string(*ctx.g.trials);
  f["config_hash"] = content_hash(effective);
  f["strategy"] = ctx.file.scenario.strategy.tag();
  if (ctx.g.seed) f["seed"] = std::to_string(*ctx.g.seed);
  return f;
}

void print_metrics(const RunMetrics& m) {
  std::printf("cost_mps: %.10g\n", m.cost_mps);
  std::printf("final_rms_error_km: %.10g\n", m.final_rms_error_km);
  std::printf("final_position_error_km: %.10g\n", m.final_position_error_km);
  std::printf("final_error_pct: %.10g\n", m.final_error_pct);
}

int cmd_plan(Context& ctx) {
  load(ctx);
  const Scenario& sc = ctx.file.scenario;
  const RunResult r = run_scenario(sc);
  write_plan_csv(r.planned.plan, ctx.sys, out_path(ctx.g, "plan.csv"));
  write_report(r.planned.report, r.planned.plan, r.sim.metrics, ctx.sys,
               out_path(ctx.g, "report.txt"));
  write_trajectory_csv(r.sim.log, ctx.sys, out_path(ctx.g, "trajectory.csv"));
  write_manifest(manifest_fields(ctx, "plan"), ctx.sys, out_path(ctx.g, "manifest.json"));
  std::printf("scenario: %s\nstrategy: %s\nimpulses: %zu\n", sc.name.c_str(),
              sc.strategy.tag().c_str(), r.planned.plan.impulses.size());
  print_metrics(r.sim.metrics);
  return kOk;
}

int cmd_simulate(Context& ctx, const std::string& plan_path) {
  load(ctx);
  const Scenario& sc = ctx.file.scenario;
  SimResult sim;
  if (plan_path.empty()) {
    sim = run_scenario(sc).sim;
  } else {
    ManeuverPlan p;
    p.impulses = read_plan_csv(plan_path, ctx.sys);
    p.update_cost();
    sim = simulate(p, sc);
  }
  write_trajectory_csv(sim.log, ctx.sys, out_path(ctx.g, "trajectory.csv"));
  write_manifest(manifest_fields(ctx, "simulate"), ctx.sys, out_path(ctx.g, "manifest.json"));
  print_metrics(sim.metrics);
  return kOk;
}

int cmd_errors(Context& ctx, int samples) {
  load(ctx);
  const Scenario& sc = ctx.file.scenario;
  std::vector<StmStrategy> strategies;
  if (ctx.g.strategy.empty()) {
    StmStrategy me = sc.strategy;
    me.kind = StmKind::MatrixExponential;
    if (!(me.step > 0.0)) me.step = kDefaultMeStepMinutes * 60.0 / ctx.sys.tu_s;
    strategies = {me, StmStrategy::numerical_integration(sc.strategy.tol), StmStrategy::hcw(),
                  StmStrategy::yamanaka_ankersen()};
  } else {
    strategies = {sc.strategy};
  }
  std::vector<double> times;
  for (int i = 1; i <= samples; ++i) times.push_back(sc.t0() + sc.window * i / samples);
  std::vector<std::string> tags;
  std::vector<std::vector<ErrorSample>> series;
  for (const StmStrategy& s : strategies) {
    tags.push_back(s.tag());
    series.push_back(rms_propagation_error(s, sc, times));
    std::printf("%s terminal_rms_km: %.10g\n", s.tag().c_str(), series.back().back().rms_km);
  }
  write_error_series(tags, series, ctx.sys, out_path(ctx.g, "errors.csv"));
  write_manifest(manifest_fields(ctx, "errors"), ctx.sys, out_path(ctx.g, "manifest.json"));
  return kOk;
}

int cmd_montecarlo(Context& ctx, const std::string& catalog_path) {
  if (!ctx.g.seed || !ctx.g.trials) {
    std::fprintf(stderr, "montecarlo: --seed and --trials are required\n");
    return kUsage;
  }
  if (ctx.scenario_path.empty()) {
    ctx.sys = resolve_constants(ctx.g);
    ctx.file.scenario.sys = ctx.sys;
    ctx.file.montecarlo.seed = *ctx.g.seed;
    ctx.file.montecarlo.n_trials = *ctx.g.trials;
    ctx.file.montecarlo.jobs = ctx.g.jobs;
  } else {
    load(ctx);
  }
  const McConfig& cfg = ctx.file.montecarlo;
  const HaloCatalog catalog = load_halo_catalog(catalog_path, ctx.sys);
  std::vector<StmStrategy> strategies = campaign_strategies(cfg, ctx.sys);
  if (!ctx.g.strategy.empty()) {
    const StmKind k = StmStrategy::kind_from_tag(ctx.g.strategy);
    std::erase_if(strategies, [k](const StmStrategy& s) { return s.kind != k; });
  }
  const CampaignTable table =
      monte_carlo(cfg, catalog, ctx.sys, ctx.file.scenario.solver, strategies);
  write_campaign_trials(table, ctx.sys, out_path(ctx.g, "campaign_trials.csv"));
  write_campaign_summary(table, out_path(ctx.g, "campaign_summary.csv"));
  write_campaign_runtimes(table, out_path(ctx.g, "campaign_runtimes.csv"));
  auto fields = manifest_fields(ctx, "montecarlo");
  fields["catalog"] = catalog_path;
  fields["catalog_hash"] = content_hash(slurp(catalog_path));
  fields["trials"] = std::to_string(cfg.n_trials);
  write_manifest(fields, ctx.sys, out_path(ctx.g, "manifest.json"));
  for (const StrategySummary& s : table.summaries) {
    std::printf("%-22s median_err_km %-12.6g median_err_pct %-12.6g median_cost_mps %-10.6g "
                "failures %d\n",
                s.strategy.c_str(), s.position_error_km.median, s.position_error_pct.median,
                s.cost_mps.median, s.failures);
  }
  return kOk;
}

int cmd_mpc(Context& ctx) {
  load(ctx);
  const Scenario& sc = ctx.file.scenario;
  const MpcResult r = mpc_run(sc, ctx.file.mpc);
  write_mpc_summary(r, out_path(ctx.g, "mpc_summary.csv"));
  for (const SegmentPlan& seg : r.closed_loop.segments) {
    char name[64];
    std::snprintf(name, sizeof name, "mpc_segment_%02d.csv", seg.segment);
    write_plan_csv(seg.planned.plan, ctx.sys, out_path(ctx.g, name));
  }
  write_plan_csv(r.closed_loop.executed, ctx.sys, out_path(ctx.g, "mpc_executed.csv"));
  write_plan_csv(r.open_loop.executed, ctx.sys, out_path(ctx.g, "open_loop_executed.csv"));
  write_trajectory_csv(r.closed_loop.sim.log, ctx.sys, out_path(ctx.g, "mpc_trajectory.csv"));
  write_trajectory_csv(r.open_loop.sim.log, ctx.sys, out_path(ctx.g, "open_loop_trajectory.csv"));
  auto fields = manifest_fields(ctx, "mpc");
  fields["seed"] = std::to_string(ctx.file.mpc.seed);
  write_manifest(fields, ctx.sys, out_path(ctx.g, "manifest.json"));
  const RunMetrics& c = r.closed_loop.sim.metrics;
  const RunMetrics& o = r.open_loop.sim.metrics;
  std::printf("%-30s %14s %14s\n", "metric", "mpc", "open_loop");
  std::printf("%-30s %14.6g %14.6g\n", "terminal_position_error_km", c.final_position_error_km,
              o.final_position_error_km);
  std::printf("%-30s %14.6g %14.6g\n", "terminal_position_error_pct", c.final_error_pct,
              o.final_error_pct);
  std::printf("%-30s %14.6g %14.6g\n", "cost_mps", c.cost_mps, o.cost_mps);
  return kOk;
}

std::string default_catalog() {
  if (const char* env = std::getenv("LUNARKD_CATALOG")) return env;
  const fs::path installed = fs::path(LUNARKD_INSTALL_DATA_DIR) / "halo_catalog.csv";
  if (fs::exists(installed)) return installed.string();
  return (fs::path(LUNARKD_SOURCE_DATA_DIR) / "halo_catalog.csv").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal impulsive reconfiguration planning in cislunar relative motion"};
  app.set_version_flag("--version", std::string(lunarkd::version()));
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx;
  Globals& g = ctx.g;
  app.add_option("--out,-o", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed (montecarlo, mpc)");
  app.add_option("--trials", g.trials, "Number of Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--strategy", g.strategy,
                 "STM strategy override: matrix_exponential, numerical_integration, hcw, ya");
  app.add_option("--constants", g.constants,
                 "Constants JSON (default: $LUNARKD_CONSTANTS, else built-in Earth-Moon)");
  app.add_option("--jobs,-j", g.jobs, "Worker threads for campaigns")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* plan = app.add_subcommand("plan", "Plan a reconfiguration and simulate it");
  plan->add_option("scenario", ctx.scenario_path, "Scenario JSON")->required();

  std::string plan_csv;
  auto* sim = app.add_subcommand("simulate", "Ground-truth simulation of a plan");
  sim->add_option("scenario", ctx.scenario_path, "Scenario JSON")->required();
  sim->add_option("--plan", plan_csv, "Plan CSV to fly (default: plan the scenario)");

  int samples = 240;
  auto* errors = app.add_subcommand("errors", "Free-drift STM propagation error series");
  errors->add_option("scenario", ctx.scenario_path, "Scenario JSON")->required();
  errors->add_option("--samples", samples, "Sample epochs over the window")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string catalog = default_catalog();
  auto* mc = app.add_subcommand("montecarlo", "Randomised campaign over the halo catalog");
  mc->add_option("scenario", ctx.scenario_path, "Scenario JSON with montecarlo/solver sections");
  mc->add_option("--catalog", catalog, "Halo catalog CSV (default: $LUNARKD_CATALOG)")
      ->capture_default_str();

  auto* mpc = app.add_subcommand("mpc", "Model predictive control against open loop");
  mpc->add_option("scenario", ctx.scenario_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*plan) return cmd_plan(ctx);
    if (*sim) return cmd_simulate(ctx, plan_csv);
    if (*errors) return cmd_errors(ctx, samples);
    if (*mc) return cmd_montecarlo(ctx, catalog);
    if (*mpc) return cmd_mpc(ctx);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kParse;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return kSimulation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSimulation;
  }
  return kUsage;
}
