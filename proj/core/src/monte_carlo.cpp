#include "lunarkd/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "lunarkd/random.hpp"

namespace lunarkd {
namespace {

constexpr std::uint64_t kSamplingStream = 1;

double log_uniform(CounterRng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

Vec3 sample_position_km(CounterRng& rng, const McConfig& cfg) {
  std::bernoulli_distribution sign(0.5);
  Vec3 p;
  for (int k = 0; k < 3; ++k) {
    const double m = log_uniform(rng, cfg.pos_min_km, cfg.pos_max_km);
    p(k) = sign(rng) ? m : -m;
  }
  return p;
}

Vec3 sample_velocity_kmps(CounterRng& rng, const McConfig& cfg) {
  std::normal_distribution<double> n(0.0, cfg.vel_std_kmps);
  return {n(rng), n(rng), n(rng)};
}

}  // namespace

void McConfig::validate() const {
  if (n_trials < 1) throw ConfigError("montecarlo.n_trials: must be at least 1");
  if (!(pos_min_km > 0.0 && pos_max_km >= pos_min_km)) {
    throw ConfigError("montecarlo.pos_min_km/pos_max_km: need 0 < min <= max");
  }
  if (!(vel_std_kmps >= 0.0)) throw ConfigError("montecarlo.vel_std_kmps: must be non-negative");
  if (!(window_min_tu > 0.0 && window_max_tu >= window_min_tu)) {
    throw ConfigError("montecarlo.window_min_tu/window_max_tu: need 0 < min <= max");
  }
  if (n_grid_steps < 1) throw ConfigError("montecarlo.n_grid_steps: must be at least 1");
  if (!(me_step_s > 0.0)) throw ConfigError("montecarlo.me_step_s: must be positive");
  if (jobs < 1) throw ConfigError("montecarlo.jobs: must be at least 1");
}

TrialSample sample_trial(const McConfig& cfg, const HaloCatalog& catalog, const Cr3bpSystem& sys,
                         std::size_t trial) {
  if (catalog.size() == 0) throw ConfigError("halo catalog is empty");
  CounterRng rng = CounterRng::stream(cfg.seed, kSamplingStream, trial);
  TrialSample s;
  s.trial = trial;
  std::uniform_int_distribution<std::size_t> pick(0, catalog.size() - 1);
  s.catalog_index = pick(rng);
  s.family = catalog.family_of(s.catalog_index);
  s.chief0 = catalog.state(s.catalog_index);
  s.chief0.t = 0.0;
  const Vec3 p0 = sample_position_km(rng, cfg);
  const Vec3 v0 = sample_velocity_kmps(rng, cfg);
  const Vec3 pf = sample_position_km(rng, cfg);
  const Vec3 vf = sample_velocity_kmps(rng, cfg);
  s.window = log_uniform(rng, cfg.window_min_tu, cfg.window_max_tu);
  s.deputy0 = {p0 / sys.du_km, v0 / sys.vu_kmps(), 0.0};
  s.deputy_f = {pf / sys.du_km, vf / sys.vu_kmps(), s.window};
  return s;
}

MetricStats summarize(std::vector<double> values) {
  MetricStats st;
  st.count = static_cast<int>(values.size());
  if (values.empty()) return st;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  st.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(n);
  st.min = values.front();
  st.max = values.back();
  return st;
}

std::vector<StmStrategy> campaign_strategies(const McConfig& cfg, const Cr3bpSystem& sys) {
  return {StmStrategy::matrix_exponential(cfg.me_step_s / sys.tu_s),
          StmStrategy::numerical_integration(), StmStrategy::hcw(),
          StmStrategy::yamanaka_ankersen()};
}

CampaignTable monte_carlo(const McConfig& cfg, const HaloCatalog& catalog, const Cr3bpSystem& sys,
                          const SolverConfig& solver, const std::vector<StmStrategy>& strategies) {
  cfg.validate();
  solver.validate();
  if (strategies.empty()) throw ConfigError("montecarlo: no strategies selected");

  CampaignTable table;
  table.config = cfg;
  table.strategies = strategies;
  const auto n_trials = static_cast<std::size_t>(cfg.n_trials);
  const std::size_t n_strat = strategies.size();
  table.samples.resize(n_trials);
  table.outcomes.resize(n_trials * n_strat);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      const TrialSample s = sample_trial(cfg, catalog, sys, i);
      table.samples[i] = s;
      for (std::size_t k = 0; k < n_strat; ++k) {
        TrialOutcome& out = table.outcomes[i * n_strat + k];
        out.trial = i;
        out.strategy = strategies[k].tag();
        try {
          Scenario sc;
          sc.name = "trial-" + std::to_string(i);
          sc.sys = sys;
          sc.chief0 = s.chief0;
          sc.deputy0 = s.deputy0;
          sc.deputy_f = s.deputy_f;
          sc.window = s.window;
          sc.n_grid_steps = cfg.n_grid_steps;
          sc.strategy = strategies[k];
          sc.solver = solver;
          const RunResult r = run_scenario(sc);
          out.metrics = r.sim.metrics;
          out.n_impulses = static_cast<int>(r.planned.plan.impulses.size());
          out.refine_iterations = r.planned.report.refine_iterations;
          out.ok = true;
        } catch (const std::exception& e) {
          out.ok = false;
          out.error = e.what();
        }
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, cfg.n_trials);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k < n_strat; ++k) {
    StrategySummary sum;
    sum.strategy = strategies[k].tag();
    std::vector<double> err, pct, rms, cost, stm, solve, iters;
    for (std::size_t i = 0; i < n_trials; ++i) {
      const TrialOutcome& o = table.outcomes[i * n_strat + k];
      if (!o.ok) {
        ++sum.failures;
        continue;
      }
      err.push_back(o.metrics.final_position_error_km);
      pct.push_back(o.metrics.final_error_pct);
      rms.push_back(o.metrics.final_rms_error_km);
      cost.push_back(o.metrics.cost_mps);
      stm.push_back(o.metrics.stm_runtime_s);
      solve.push_back(o.metrics.solver_runtime_s);
      iters.push_back(o.refine_iterations);
    }
    sum.position_error_km = summarize(err);
    sum.position_error_pct = summarize(pct);
    sum.rms_error_km = summarize(rms);
    sum.cost_mps = summarize(cost);
    sum.stm_runtime_s = summarize(stm);
    sum.solver_runtime_s = summarize(solve);
    sum.refine_iterations = summarize(iters);
    table.summaries.push_back(sum);
  }
  return table;
}

}  // namespace lunarkd
