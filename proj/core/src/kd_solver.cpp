#include "lunarkd/kd_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include "lunarkd/nnls.hpp"
#include "lunarkd/socp.hpp"

namespace lunarkd {
namespace {

constexpr double kZeroTarget = 1e-12;  // |omega| relative to the boundary states
constexpr double kResidualTol = 1e-6;  // reachability deficiency threshold, relative to |omega|
constexpr std::size_t kMaxImpulses = 6;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Removes impulses along null-space directions of the impulse matrix until at
// most six remain; the fitted state is unchanged and the cost does not grow.
void caratheodory_reduce(Eigen::MatrixXd& cols, Eigen::VectorXd& m, std::vector<std::size_t>& ids) {
  while (static_cast<std::size_t>(m.size()) > kMaxImpulses) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cols);
    Eigen::VectorXd d = lu.kernel().col(0);
    if (d.sum() < 0.0) d = -d;
    if (d.maxCoeff() <= 0.0) d = -d;
    double step = std::numeric_limits<double>::infinity();
    Eigen::Index drop = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d(i) > 0.0 && m(i) / d(i) < step) {
        step = m(i) / d(i);
        drop = i;
      }
    }
    m -= step * d;
    m(drop) = 0.0;
    const Eigen::Index n = m.size() - 1;
    Eigen::MatrixXd c2(cols.rows(), n);
    Eigen::VectorXd m2(n);
    std::vector<std::size_t> ids2;
    for (Eigen::Index i = 0, k = 0; i < m.size(); ++i) {
      if (i == drop) continue;
      c2.col(k) = cols.col(i);
      m2(k) = std::max(m(i), 0.0);
      ids2.push_back(ids[static_cast<std::size_t>(i)]);
      ++k;
    }
    cols = std::move(c2);
    m = std::move(m2);
    ids = std::move(ids2);
  }
}

}  // namespace

void ManeuverPlan::update_cost() {
  cost = 0.0;
  for (const Impulse& imp : impulses) cost += imp.dv.norm();
}

void SolverConfig::validate() const {
  if (!(eps_cost > 0.0)) throw ConfigError("solver.eps_cost: must be positive");
  if (!(eps_remove > 0.0 && eps_remove < 1.0)) {
    throw ConfigError("solver.eps_remove: must lie in (0, 1)");
  }
  if (init_stride < 1) throw ConfigError("solver.init_stride: must be at least 1");
  if (init_keep < 1) throw ConfigError("solver.init_keep: must be at least 1");
  if (max_refine_iters < 1) throw ConfigError("solver.max_refine_iters: must be at least 1");
  if (!(socp_tol > 0.0)) throw ConfigError("solver.socp_tol: must be positive");
}

Pseudostate pseudostate(const RelativeState& x0, const RelativeState& xf, const ControlGrid& grid) {
  return {xf.stacked() - grid.phi0.phi * x0.stacked()};
}

Contact contact(const Mat63& gamma, const Vec6& lambda) {
  Contact c;
  const Vec3 z = gamma.transpose() * lambda;
  c.value = z.norm();
  if (c.value >= kDegenerateContact) {
    c.direction = z / c.value;
    c.degenerate = false;
  }
  return c;
}

std::vector<double> contact_sweep(const ControlGrid& grid, const Vec6& lambda) {
  std::vector<double> g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    g[i] = (grid.gammas[i].gamma.transpose() * lambda).norm();
  }
  return g;
}

CandidateSet initialize(const Pseudostate& omega, const ControlGrid& grid, const SolverConfig& cfg) {
  const double wn = omega.omega.norm();
  if (!(wn > 0.0)) throw SolverError("initialize: zero pseudostate");
  const Vec6 dir = omega.omega / wn;
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(cfg.init_stride)) {
    scored.emplace_back(contact(grid.gammas[i].gamma, dir).value, i);
  }
  const std::size_t keep = std::min(scored.size(), static_cast<std::size_t>(cfg.init_keep));
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  CandidateSet set;
  for (std::size_t i = 0; i < keep; ++i) set.indices.push_back(scored[i].second);
  std::sort(set.indices.begin(), set.indices.end());
  return set;
}

DualVector solve_dual(const Pseudostate& omega, const CandidateSet& set, const ControlGrid& grid,
                      const SolverConfig& cfg) {
  if (set.indices.empty()) throw SolverError("solve_dual: empty candidate set");
  std::vector<Mat63> gammas;
  gammas.reserve(set.indices.size());
  for (std::size_t i : set.indices) gammas.push_back(grid.gammas.at(i).gamma);
  ConeSolverOptions opts;
  opts.tol = cfg.socp_tol;
  return {solve_cone_dual(gammas, omega.omega, opts).lambda};
}

namespace {

CandidateSet widen(const CandidateSet& set, const ControlGrid& grid, const SolverConfig& cfg) {
  std::vector<std::size_t> strided;
  for (std::size_t i = 0; i < grid.size(); i += static_cast<std::size_t>(cfg.init_stride)) {
    strided.push_back(i);
  }
  CandidateSet out;
  std::set_union(set.indices.begin(), set.indices.end(), strided.begin(), strided.end(),
                 std::back_inserter(out.indices));
  if (out.indices.size() == set.indices.size()) {
    out.indices.resize(grid.size());
    std::iota(out.indices.begin(), out.indices.end(), std::size_t{0});
  }
  return out;
}

}  // namespace

RefineResult refine(const Pseudostate& omega, const ControlGrid& grid, const SolverConfig& cfg) {
  RefineResult out;
  out.set = initialize(omega, grid, cfg);
  for (int it = 1; it <= cfg.max_refine_iters; ++it) {
    out.history.push_back(out.set.indices);
    try {
      out.lambda = solve_dual(omega, out.set, grid, cfg);
    } catch (const InfeasibleTargetError&) {
      // The working set does not span the target: widen it, first to the
      // strided grid, then to every candidate.
      if (out.set.indices.size() == grid.size()) throw;
      out.set = widen(out.set, grid, cfg);
      continue;
    }
    out.iterations = it;
    const std::vector<double> g = contact_sweep(grid, out.lambda.lambda);

    std::vector<std::size_t> next;
    for (std::size_t i : out.set.indices) {
      if (g[i] >= 1.0 - cfg.eps_remove) next.push_back(i);
    }
    bool violated = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] > 1.0 + cfg.eps_cost) {
        next.push_back(i);
        violated = true;
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    out.set.indices = std::move(next);
    if (!violated) return out;
  }
  throw NonConvergenceError("refine did not converge within " +
                            std::to_string(cfg.max_refine_iters) + " iterations");
}

ManeuverPlan extract_inputs(const Pseudostate& omega, const CandidateSet& set,
                            const DualVector& lambda_opt, const ControlGrid& grid,
                            const SolverConfig& cfg) {
  ManeuverPlan plan;
  const double wn = omega.omega.norm();
  if (!(wn > 0.0)) return plan;

  struct Column {
    std::size_t index;
    Vec3 dir;
    Vec6 col;
    double g;
  };
  std::vector<Column> all;
  for (std::size_t i : set.indices) {
    const Contact c = contact(grid.gammas.at(i).gamma, lambda_opt.lambda);
    if (c.degenerate) continue;
    all.push_back({i, c.direction, grid.gammas[i].gamma * c.direction, c.value});
  }
  if (all.empty()) throw SolverError("extract_inputs: no usable candidate direction");

  // Widen the pool from the tightly active candidates outwards until the fit
  // reproduces omega; the first acceptable pool carries the optimal support.
  const double tiers[] = {1e-9, 1e-7, 1e-5, cfg.eps_cost, cfg.eps_remove, 1.0};
  std::vector<std::size_t> ids;
  Eigen::MatrixXd cols;
  Eigen::VectorXd m;
  double residual = std::numeric_limits<double>::infinity();
  for (double tier : tiers) {
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < all.size(); ++k) {
      if (all[k].g >= 1.0 - tier) pool.push_back(k);
    }
    if (pool.empty()) continue;
    Eigen::MatrixXd a(6, static_cast<Eigen::Index>(pool.size()));
    for (std::size_t k = 0; k < pool.size(); ++k) a.col(static_cast<Eigen::Index>(k)) = all[pool[k]].col;
    const NnlsResult fit = nnls(a, omega.omega);
    if (fit.residual_norm < residual) {
      residual = fit.residual_norm;
      ids = pool;
      cols = a;
      m = fit.x;
    }
    if (residual <= kResidualTol * wn) break;
  }

  // Prune zero magnitudes.
  const double mmax = m.size() > 0 ? m.maxCoeff() : 0.0;
  std::vector<std::size_t> kept;
  std::vector<Eigen::Index> kept_cols;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (m(k) > 1e-12 * mmax) {
      kept.push_back(ids[static_cast<std::size_t>(k)]);
      kept_cols.push_back(k);
    }
  }
  Eigen::MatrixXd kc(6, static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd km(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    kc.col(static_cast<Eigen::Index>(k)) = cols.col(kept_cols[k]);
    km(static_cast<Eigen::Index>(k)) = m(kept_cols[k]);
  }
  caratheodory_reduce(kc, km, kept);

  Vec6 fitted = Vec6::Zero();
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const Column& c = all[kept[k]];
    const double mag = km(static_cast<Eigen::Index>(k));
    if (!(mag > 0.0)) continue;
    plan.impulses.push_back({grid.times[c.index], c.index, mag * c.dir});
    fitted += mag * c.col;
  }
  std::sort(plan.impulses.begin(), plan.impulses.end(),
            [](const Impulse& a, const Impulse& b) { return a.t < b.t; });
  plan.update_cost();
  plan.residual = (omega.omega - fitted).norm();
  plan.reachability_deficient = plan.residual > kResidualTol * wn;
  return plan;
}

namespace {

// Equivalent problem with sum_j Gamma_j Gamma_j' = I. With the factorisation
// [Gamma_0 ... Gamma_N]' P = Q R, the map M = R^-T P' sends every Gamma_j to
// its block of Q', so the dual is solved on orthonormal data; lambda = M' mu.
// Left unbalanced if the stacked maps are numerically rank deficient.
struct Balanced {
  ControlGrid grid;
  Pseudostate omega;
  Mat6 m = Mat6::Identity();
};

Balanced balance(const ControlGrid& grid, const Pseudostate& omega) {
  Balanced b{grid, omega};
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd gt(3 * n, 6);
  for (Eigen::Index j = 0; j < n; ++j) {
    gt.middleRows<3>(3 * j) = grid.gammas[static_cast<std::size_t>(j)].gamma.transpose();
  }
  if (gt.rows() < 6) return b;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gt);
  const Mat6 r = qr.matrixR().topLeftCorner<6, 6>().triangularView<Eigen::Upper>();
  const double r0 = std::abs(r(0, 0));
  if (!(r0 > 0.0) || std::abs(r(5, 5)) <= 1e-13 * r0) return b;
  const Mat6 pt = qr.colsPermutation().transpose().toDenseMatrix().cast<double>();
  b.m = r.transpose().triangularView<Eigen::Lower>().solve(pt);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(3 * n, 6);
  for (Eigen::Index j = 0; j < n; ++j) {
    b.grid.gammas[static_cast<std::size_t>(j)].gamma = q.middleRows<3>(3 * j).transpose();
  }
  b.omega.omega = b.m * omega.omega;
  return b;
}

}  // namespace

PlanResult solve(const ControlGrid& grid, const RelativeState& x0, const RelativeState& xf,
                 const SolverConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  PlanResult out;
  out.report.config = cfg;
  out.report.stm_runtime_s = grid.build_seconds;
  const Pseudostate omega = pseudostate(x0, xf, grid);
  const double scale = std::max(x0.stacked().norm(), xf.stacked().norm());
  if (omega.omega.norm() <= kZeroTarget * scale || omega.omega.norm() == 0.0) {
    out.report.zero_target = true;
    out.report.solver_runtime_s = seconds_since(start);
    return out;
  }
  const Balanced bal = balance(grid, omega);
  const RefineResult ref = refine(bal.omega, bal.grid, cfg);
  out.plan = extract_inputs(bal.omega, ref.set, ref.lambda, bal.grid, cfg);
  Vec6 fitted = Vec6::Zero();
  for (const Impulse& imp : out.plan.impulses) fitted += grid.gammas[imp.grid_index].gamma * imp.dv;
  out.plan.residual = (omega.omega - fitted).norm();
  out.report.lambda_opt.lambda = bal.m.transpose() * ref.lambda.lambda;
  out.report.refine_iterations = ref.iterations;
  out.report.candidate_history = ref.history;
  out.report.dual_value = bal.omega.omega.dot(ref.lambda.lambda);
  out.report.primal_cost = out.plan.cost;
  const std::vector<double> g = contact_sweep(bal.grid, ref.lambda.lambda);
  out.report.max_contact = *std::max_element(g.begin(), g.end());
  out.report.solver_runtime_s = seconds_since(start);
  return out;
}

PlanResult plan(const ChiefTrajectory& chief, const RelativeState& x0, const RelativeState& xf,
                const StmStrategy& strategy, int n_grid_steps, const SolverConfig& cfg) {
  const ControlGrid grid = build_control_grid(chief, strategy, n_grid_steps);
  return solve(grid, x0, xf, cfg);
}

}  // namespace lunarkd
