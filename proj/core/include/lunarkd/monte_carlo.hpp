#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "lunarkd/halo_catalog.hpp"
#include "lunarkd/simulate.hpp"

namespace lunarkd {

/// Campaign sampling. Relative positions: each component has a magnitude
/// log-uniform in [pos_min_km, pos_max_km] and an independent random sign.
/// Velocities: zero-mean normal. Window: log-uniform in TU.
struct McConfig {
  int n_trials = 100;
  std::uint64_t seed = 1;
  double pos_min_km = 0.1;
  double pos_max_km = 5000.0;
  double vel_std_kmps = 1e-3;
  double window_min_tu = 0.1 * std::numbers::pi;
  double window_max_tu = 4.0 * std::numbers::pi;
  int n_grid_steps = 1000;
  double me_step_s = 60.0;
  int jobs = 1;

  void validate() const;
};

struct TrialSample {
  std::size_t trial = 0;
  std::size_t catalog_index = 0;
  std::string family;
  SynodicState chief0;
  RelativeState deputy0;
  RelativeState deputy_f;
  double window = 0.0;  // TU
};

/// Draws trial `trial` from its own substream; independent of other trials.
TrialSample sample_trial(const McConfig& cfg, const HaloCatalog& catalog, const Cr3bpSystem& sys,
                         std::size_t trial);

struct TrialOutcome {
  std::size_t trial = 0;
  std::string strategy;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
  int n_impulses = 0;
  int refine_iterations = 0;
};

struct MetricStats {
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  int count = 0;
};

MetricStats summarize(std::vector<double> values);

struct StrategySummary {
  std::string strategy;
  int failures = 0;
  MetricStats position_error_km;
  MetricStats position_error_pct;
  MetricStats rms_error_km;
  MetricStats cost_mps;
  MetricStats stm_runtime_s;
  MetricStats solver_runtime_s;
  MetricStats refine_iterations;
};

struct CampaignTable {
  McConfig config;
  std::vector<StmStrategy> strategies;
  std::vector<TrialSample> samples;
  std::vector<TrialOutcome> outcomes;  // trial-major, strategies in the given order
  std::vector<StrategySummary> summaries;
};

/// The four strategies of the comparison, with the campaign's LTI step.
std::vector<StmStrategy> campaign_strategies(const McConfig& cfg, const Cr3bpSystem& sys);

/// Runs every strategy on every trial. Trials run on cfg.jobs worker threads;
/// per-trial failures are recorded and the campaign continues.
CampaignTable monte_carlo(const McConfig& cfg, const HaloCatalog& catalog, const Cr3bpSystem& sys,
                          const SolverConfig& solver, const std::vector<StmStrategy>& strategies);

}  // namespace lunarkd
