#include "lunarkd/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lunarkd/csv.hpp"

#ifndef LUNARKD_VERSION
#define LUNARKD_VERSION "unknown"
#endif

namespace lunarkd {
namespace {

using nlohmann::json;

/// Walks one JSON object, recording which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(where(key) + "missing");
    return *it;
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(where(key) + "expected 3 numbers");
    Vec3 out;
    for (int k = 0; k < 3; ++k) {
      if (!v[k].is_number()) throw ConfigError(where(key) + "expected 3 numbers");
      out(k) = v[k].get<double>();
      if (!std::isfinite(out(k))) throw ConfigError(where(key) + "must be finite");
    }
    return out;
  }

  Section sub(const std::string& key) { return Section(raw(key), path_ + key + "."); }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError(where(item.key()) + "unknown key");
    }
  }

 private:
  std::string where(const std::string& key) const {
    std::string p = path_ + key;
    if (!p.empty() && p.back() == '.') p.pop_back();
    return (p.empty() ? std::string("scenario") : p) + ": ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Cr3bpSystem read_constants(Section s) {
  Cr3bpSystem sys;
  sys.mu = s.number("mu");
  sys.du_km = s.number("du_km");
  sys.tu_s = s.number("tu_s");
  s.finish();
  try {
    sys.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("constants: ") + e.what());
  }
  return sys;
}

RelativeState read_relative(Section s, const Cr3bpSystem& sys) {
  RelativeState x;
  x.rho = s.vec3("rho_km") / sys.du_km;
  x.rho_dot = s.vec3("rho_dot_kmps") / sys.vu_kmps();
  s.finish();
  return x;
}

StmStrategy read_strategy(Section s, const Cr3bpSystem& sys) {
  const std::string kind = s.string("kind", "numerical_integration");
  StmStrategy st;
  try {
    st.kind = StmStrategy::kind_from_tag(kind);
  } catch (const ConfigError&) {
    throw ConfigError("strategy.kind: unknown strategy '" + kind + "'");
  }
  st.step = s.number("me_step_minutes", 10.0) * 60.0 / sys.tu_s;
  st.tol = s.number("tol", 1e-12);
  st.midpoint = s.boolean("midpoint", false);
  st.mean_motion = s.number("mean_motion", 0.0);
  s.finish();
  return st;
}

SolverConfig read_solver(Section s) {
  SolverConfig c;
  c.eps_cost = s.number("eps_cost", c.eps_cost);
  c.eps_remove = s.number("eps_remove", c.eps_remove);
  c.init_stride = s.integer("init_stride", c.init_stride);
  c.init_keep = s.integer("init_keep", c.init_keep);
  c.max_refine_iters = s.integer("max_refine_iters", c.max_refine_iters);
  c.socp_tol = s.number("socp_tol", c.socp_tol);
  s.finish();
  return c;
}

MpcConfig read_mpc(Section s) {
  MpcConfig c;
  c.n_segments = s.integer("n_segments", c.n_segments);
  c.seed = s.unsigned_integer("seed", c.seed);
  if (s.has("noise")) {
    Section n = s.sub("noise");
    NoiseModel& m = c.noise;
    m.chief_pos_km = n.number("chief_pos_km", m.chief_pos_km);
    m.chief_vel_kmps = n.number("chief_vel_kmps", m.chief_vel_kmps);
    m.deputy_pos_km = n.number("deputy_pos_km", m.deputy_pos_km);
    m.deputy_vel_kmps = n.number("deputy_vel_kmps", m.deputy_vel_kmps);
    m.maneuver_time_s = n.number("maneuver_time_s", m.maneuver_time_s);
    m.maneuver_mag_kmps = n.number("maneuver_mag_kmps", m.maneuver_mag_kmps);
    m.maneuver_dir_deg = n.number("maneuver_dir_deg", m.maneuver_dir_deg);
    n.finish();
  }
  s.finish();
  c.validate();
  return c;
}

McConfig read_montecarlo(Section s) {
  McConfig c;
  c.n_trials = s.integer("n_trials", c.n_trials);
  c.seed = s.unsigned_integer("seed", c.seed);
  c.pos_min_km = s.number("pos_min_km", c.pos_min_km);
  c.pos_max_km = s.number("pos_max_km", c.pos_max_km);
  c.vel_std_kmps = s.number("vel_std_kmps", c.vel_std_kmps);
  c.window_min_tu = s.number("window_min_tu", c.window_min_tu);
  c.window_max_tu = s.number("window_max_tu", c.window_max_tu);
  c.n_grid_steps = s.integer("n_grid_steps", c.n_grid_steps);
  c.me_step_s = s.number("me_step_s", c.me_step_s);
  c.jobs = s.integer("jobs", c.jobs);
  s.finish();
  c.validate();
  return c;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("error writing '" + path + "'");
}

std::vector<double> stats_row(const MetricStats& s) { return {s.median, s.mean, s.max, s.min}; }

}  // namespace

ScenarioFile parse_scenario(const std::string& json_text, const Cr3bpSystem& default_sys) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  Section root(j, "");
  ScenarioFile f;
  Scenario& sc = f.scenario;
  sc.name = root.string("name", "scenario");
  sc.sys = default_sys;
  if (root.has("constants")) {
    sc.sys = read_constants(root.sub("constants"));
    f.has_constants = true;
  }
  const Cr3bpSystem& sys = sc.sys;
  {
    Section c = root.sub("chief0");
    sc.chief0.r = c.vec3("r_km") / sys.du_km;
    sc.chief0.v = c.vec3("v_kmps") / sys.vu_kmps();
    sc.chief0.t = 0.0;
    c.finish();
  }
  sc.deputy0 = read_relative(root.sub("deputy0"), sys);
  sc.deputy_f = read_relative(root.sub("deputy_f"), sys);
  const double hours = root.number("window_hours");
  if (!(hours > 0.0)) throw ConfigError("window_hours: must be positive");
  sc.window = hours * 3600.0 / sys.tu_s;
  sc.deputy0.t = 0.0;
  sc.deputy_f.t = sc.window;
  sc.n_grid_steps = root.integer("n_grid_steps", sc.n_grid_steps);
  if (root.has("strategy")) sc.strategy = read_strategy(root.sub("strategy"), sys);
  if (root.has("solver")) sc.solver = read_solver(root.sub("solver"));
  if (root.has("mpc")) f.mpc = read_mpc(root.sub("mpc"));
  if (root.has("montecarlo")) f.montecarlo = read_montecarlo(root.sub("montecarlo"));
  root.finish();
  sc.validate();
  return f;
}

ScenarioFile load_scenario(const std::string& path, const Cr3bpSystem& default_sys) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), default_sys);
}

StmStrategy strategy_from_tag(const std::string& tag, double me_step_minutes,
                              const Cr3bpSystem& sys) {
  StmStrategy st;
  st.kind = StmStrategy::kind_from_tag(tag);
  st.step = me_step_minutes * 60.0 / sys.tu_s;
  st.validate();
  return st;
}

void write_plan_csv(const ManeuverPlan& plan, const Cr3bpSystem& sys, const std::string& path) {
  csv::Writer w(path, {"t_hours", "dv_x_mps", "dv_y_mps", "dv_z_mps"});
  const double mps = sys.vu_kmps() * 1e3;
  for (const Impulse& imp : plan.impulses) {
    w.row({imp.t * sys.hours_per_tu(), imp.dv.x() * mps, imp.dv.y() * mps, imp.dv.z() * mps});
  }
  w.close();
}

std::vector<Impulse> read_plan_csv(const std::string& path, const Cr3bpSystem& sys) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty() || lines.front() != kPlanHeader) {
    throw ConfigError(path + ": row 1: expected header '" + std::string(kPlanHeader) + "'");
  }
  const double mps = sys.vu_kmps() * 1e3;
  std::vector<Impulse> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    const std::string row = path + ": row " + std::to_string(i + 1);
    if (f.size() != 4) throw ConfigError(row + ": expected 4 fields");
    Impulse imp;
    imp.t = csv::parse_double(f[0], row) / sys.hours_per_tu();
    for (int k = 0; k < 3; ++k) imp.dv(k) = csv::parse_double(f[k + 1], row) / mps;
    out.push_back(imp);
  }
  return out;
}

void write_report(const SolverReport& r, const ManeuverPlan& plan, const RunMetrics& m,
                  const Cr3bpSystem& sys, const std::string& path) {
  std::ofstream out = open_out(path);
  const double mps = sys.vu_kmps() * 1e3;
  out << "impulses: " << plan.impulses.size() << '\n';
  out << "cost_mps: " << plan.cost * mps << '\n';
  out << "dual_value_mps: " << r.dual_value * mps << '\n';
  out << "primal_cost_mps: " << r.primal_cost * mps << '\n';
  out << "max_contact: " << r.max_contact << '\n';
  out << "refine_iterations: " << r.refine_iterations << '\n';
  out << "zero_target: " << (r.zero_target ? "true" : "false") << '\n';
  out << "reachability_deficient: " << (plan.reachability_deficient ? "true" : "false") << '\n';
  out << "residual: " << plan.residual << '\n';
  out << "lambda_opt:";
  for (int k = 0; k < 6; ++k) out << ' ' << r.lambda_opt.lambda(k);
  out << '\n';
  out << "candidate_counts:";
  for (const auto& c : r.candidate_history) out << ' ' << c.size();
  out << '\n';
  out << "eps_cost: " << r.config.eps_cost << '\n';
  out << "eps_remove: " << r.config.eps_remove << '\n';
  out << "final_rms_error_km: " << m.final_rms_error_km << '\n';
  out << "final_position_error_km: " << m.final_position_error_km << '\n';
  out << "final_error_pct: " << m.final_error_pct << '\n';
  out << "stm_runtime_s: " << r.stm_runtime_s << '\n';
  out << "solver_runtime_s: " << r.solver_runtime_s << '\n';
  close_out(out, path);
}

void write_trajectory_csv(const TrajectoryLog& log, const Cr3bpSystem& sys,
                          const std::string& path) {
  csv::Writer w(path, {"t_hours", "chief_x_km", "chief_y_km", "chief_z_km", "chief_vx_kmps",
                       "chief_vy_kmps", "chief_vz_kmps", "rho_x_km", "rho_y_km", "rho_z_km",
                       "rho_dot_x_kmps", "rho_dot_y_kmps", "rho_dot_z_kmps"});
  const double du = sys.du_km;
  const double vu = sys.vu_kmps();
  for (std::size_t i = 0; i < log.t.size(); ++i) {
    const SynodicState& c = log.chief[i];
    const RelativeState& d = log.deputy[i];
    w.row({log.t[i] * sys.hours_per_tu(), c.r.x() * du, c.r.y() * du, c.r.z() * du, c.v.x() * vu,
           c.v.y() * vu, c.v.z() * vu, d.rho.x() * du, d.rho.y() * du, d.rho.z() * du,
           d.rho_dot.x() * vu, d.rho_dot.y() * vu, d.rho_dot.z() * vu});
  }
  w.close();
}

void write_error_series(const std::vector<std::string>& tags,
                        const std::vector<std::vector<ErrorSample>>& series, const Cr3bpSystem& sys,
                        const std::string& path) {
  if (tags.size() != series.size() || series.empty()) {
    throw ConfigError("error series: one tag per series required");
  }
  std::vector<std::string> header{"t_hours"};
  for (const std::string& t : tags) {
    header.push_back(t + "_rms_km");
    header.push_back(t + "_norm_km");
  }
  csv::Writer w(path, header);
  for (std::size_t i = 0; i < series.front().size(); ++i) {
    std::vector<double> row{series.front()[i].t * sys.hours_per_tu()};
    for (const auto& s : series) {
      row.push_back(s.at(i).rms_km);
      row.push_back(s.at(i).norm_km);
    }
    w.row(row);
  }
  w.close();
}

void write_campaign_trials(const CampaignTable& table, const Cr3bpSystem& sys,
                           const std::string& path) {
  std::ofstream out = open_out(path);
  out << "trial,family,catalog_index,window_hours,strategy,ok,impulses,refine_iterations,"
         "cost_mps,final_position_error_km,final_error_pct,final_rms_error_km,error\n";
  for (const TrialOutcome& o : table.outcomes) {
    const TrialSample& s = table.samples.at(o.trial);
    out << o.trial << ',' << s.family << ',' << s.catalog_index << ','
        << csv::format(s.window * sys.hours_per_tu()) << ',' << o.strategy << ','
        << (o.ok ? 1 : 0) << ',' << o.n_impulses << ',' << o.refine_iterations << ','
        << csv::format(o.metrics.cost_mps) << ',' << csv::format(o.metrics.final_position_error_km)
        << ',' << csv::format(o.metrics.final_error_pct) << ','
        << csv::format(o.metrics.final_rms_error_km) << ',';
    std::string msg = o.error;
    for (char& c : msg) {
      if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    out << msg << '\n';
  }
  close_out(out, path);
}

void write_campaign_summary(const CampaignTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "strategy,metric,median,mean,max,min,count,failures\n";
  for (const StrategySummary& s : table.summaries) {
    const std::pair<const char*, const MetricStats*> rows[] = {
        {"final_position_error_km", &s.position_error_km},
        {"final_position_error_pct", &s.position_error_pct},
        {"final_rms_error_km", &s.rms_error_km},
        {"cost_mps", &s.cost_mps},
        {"refine_iterations", &s.refine_iterations}};
    for (const auto& [name, st] : rows) {
      out << s.strategy << ',' << name;
      for (double v : stats_row(*st)) out << ',' << csv::format(v);
      out << ',' << st->count << ',' << s.failures << '\n';
    }
  }
  close_out(out, path);
}

void write_campaign_runtimes(const CampaignTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "strategy,metric,median,mean,max,min,count\n";
  for (const StrategySummary& s : table.summaries) {
    const std::pair<const char*, const MetricStats*> rows[] = {
        {"stm_runtime_s", &s.stm_runtime_s}, {"solver_runtime_s", &s.solver_runtime_s}};
    for (const auto& [name, st] : rows) {
      out << s.strategy << ',' << name;
      for (double v : stats_row(*st)) out << ',' << csv::format(v);
      out << ',' << st->count << '\n';
    }
  }
  close_out(out, path);
}

void write_mpc_summary(const MpcResult& r, const std::string& path) {
  std::ofstream out = open_out(path);
  const RunMetrics& c = r.closed_loop.sim.metrics;
  const RunMetrics& o = r.open_loop.sim.metrics;
  out << "metric,mpc,open_loop\n";
  out << "terminal_position_error_km," << csv::format(c.final_position_error_km) << ','
      << csv::format(o.final_position_error_km) << '\n';
  out << "terminal_position_error_pct," << csv::format(c.final_error_pct) << ','
      << csv::format(o.final_error_pct) << '\n';
  out << "cost_mps," << csv::format(c.cost_mps) << ',' << csv::format(o.cost_mps) << '\n';
  out << "impulses," << r.closed_loop.executed.impulses.size() << ','
      << r.open_loop.executed.impulses.size() << '\n';
  close_out(out, path);
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* version() { return LUNARKD_VERSION; }

void write_manifest(const std::map<std::string, std::string>& fields, const Cr3bpSystem& sys,
                    const std::string& path) {
  json j;
  for (const auto& [k, v] : fields) j[k] = v;
  j["constants"] = {{"mu", sys.mu}, {"du_km", sys.du_km}, {"tu_s", sys.tu_s}};
  j["version"] = version();
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  close_out(out, path);
}

}  // namespace lunarkd
