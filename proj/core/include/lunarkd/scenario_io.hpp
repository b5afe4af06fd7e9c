#pragma once

#include <map>
#include <string>
#include <vector>

#include "lunarkd/monte_carlo.hpp"
#include "lunarkd/mpc.hpp"
#include "lunarkd/simulate.hpp"

namespace lunarkd {

/// A parsed scenario document (JSON). Field units: km, km/s, hours for the
/// window, minutes for the LTI step, TU for the Monte Carlo windows.
///
///   name, constants{mu,du_km,tu_s}, chief0{r_km,v_kmps},
///   deputy0{rho_km,rho_dot_kmps}, deputy_f{...}, window_hours, n_grid_steps,
///   strategy{kind,me_step_minutes,tol,midpoint,mean_motion},
///   solver{eps_cost,eps_remove,init_stride,init_keep,max_refine_iters,socp_tol},
///   mpc{n_segments,seed,noise{...}}, montecarlo{n_trials,seed,...}
///
/// Unknown keys are rejected; errors name the key path.
struct ScenarioFile {
  Scenario scenario;
  MpcConfig mpc;
  McConfig montecarlo;
  bool has_constants = false;
};

/// `default_sys` applies unless the document carries a constants block.
ScenarioFile parse_scenario(const std::string& json_text, const Cr3bpSystem& default_sys);
ScenarioFile load_scenario(const std::string& path, const Cr3bpSystem& default_sys);

/// Strategy from its tag; the LTI step (minutes) is only used by the
/// matrix-exponential kind.
StmStrategy strategy_from_tag(const std::string& tag, double me_step_minutes,
                              const Cr3bpSystem& sys);

inline constexpr const char* kPlanHeader = "t_hours,dv_x_mps,dv_y_mps,dv_z_mps";

void write_plan_csv(const ManeuverPlan& plan, const Cr3bpSystem& sys, const std::string& path);
std::vector<Impulse> read_plan_csv(const std::string& path, const Cr3bpSystem& sys);

/// "key: value" text, one entry per line.
void write_report(const SolverReport& report, const ManeuverPlan& plan, const RunMetrics& metrics,
                  const Cr3bpSystem& sys, const std::string& path);

/// Time in hours, chief synodic state (km, km/s), deputy LVLH state (km, km/s).
void write_trajectory_csv(const TrajectoryLog& log, const Cr3bpSystem& sys, const std::string& path);

/// One column per strategy: t_hours,<tag>_rms_km,<tag>_norm_km,...
void write_error_series(const std::vector<std::string>& tags,
                        const std::vector<std::vector<ErrorSample>>& series, const Cr3bpSystem& sys,
                        const std::string& path);

/// Per-trial samples and outcomes; deterministic given the seed.
void write_campaign_trials(const CampaignTable& table, const Cr3bpSystem& sys,
                           const std::string& path);
/// Error and cost statistics per strategy; deterministic given the seed.
void write_campaign_summary(const CampaignTable& table, const std::string& path);
/// Runtime statistics per strategy (wall-clock, not reproducible).
void write_campaign_runtimes(const CampaignTable& table, const std::string& path);

/// metric,mpc,open_loop rows for terminal error (km, %) and cost (m/s).
void write_mpc_summary(const MpcResult& result, const std::string& path);

/// 64-bit FNV-1a digest, hex encoded.
std::string content_hash(const std::string& text);

/// Library version string.
const char* version();

/// JSON manifest; `fields` are written as strings.
void write_manifest(const std::map<std::string, std::string>& fields, const Cr3bpSystem& sys,
                    const std::string& path);

}  // namespace lunarkd
