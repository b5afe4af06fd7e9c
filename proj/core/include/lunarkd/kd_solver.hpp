#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lunarkd/stm.hpp"

namespace lunarkd {

/// omega = x_f - Phi(t0, tf) x0, nondimensional.
struct Pseudostate {
  Vec6 omega = Vec6::Zero();
};

struct DualVector {
  Vec6 lambda = Vec6::Zero();
};

/// Working set of candidate grid indices, sorted and unique.
struct CandidateSet {
  std::vector<std::size_t> indices;
};

struct Impulse {
  double t = 0.0;        // TU
  std::size_t grid_index = 0;
  Vec3 dv = Vec3::Zero();  // LVLH, VU
};

struct ManeuverPlan {
  std::vector<Impulse> impulses;
  double cost = 0.0;  // sum of |dv|, VU
  double residual = 0.0;  // |omega - sum Gamma_j dv_j|, nondimensional
  bool reachability_deficient = false;

  /// Recomputes `cost` from the impulses.
  void update_cost();
};

struct SolverConfig {
  double eps_cost = 1e-5;
  double eps_remove = 1e-2;
  int init_stride = 10;
  int init_keep = 10;
  int max_refine_iters = 100;
  double socp_tol = 1e-10;

  void validate() const;
};

struct SolverReport {
  DualVector lambda_opt;
  int refine_iterations = 0;
  double dual_value = 0.0;
  double primal_cost = 0.0;
  double max_contact = 0.0;  // over the full grid at lambda_opt
  std::vector<std::vector<std::size_t>> candidate_history;
  double stm_runtime_s = 0.0;
  double solver_runtime_s = 0.0;
  SolverConfig config;
  bool zero_target = false;
};

struct Contact {
  double value = 0.0;
  Vec3 direction = Vec3::Zero();
  bool degenerate = true;
};

inline constexpr double kDegenerateContact = 1e-14;

Pseudostate pseudostate(const RelativeState& x0, const RelativeState& xf, const ControlGrid& grid);

/// Support function of the unit ball through Gamma: |Gamma' lambda| and its argmax.
Contact contact(const Mat63& gamma, const Vec6& lambda);

/// Contact value at every grid index (parallel sweep, deterministic).
std::vector<double> contact_sweep(const ControlGrid& grid, const Vec6& lambda);

/// Indices of the init_keep largest contact values of omega/|omega| among every
/// init_stride-th grid time.
CandidateSet initialize(const Pseudostate& omega, const ControlGrid& grid, const SolverConfig& cfg);

/// Dual program restricted to the candidate set.
DualVector solve_dual(const Pseudostate& omega, const CandidateSet& set, const ControlGrid& grid,
                      const SolverConfig& cfg);

struct RefineResult {
  CandidateSet set;
  DualVector lambda;
  int iterations = 0;
  std::vector<std::vector<std::size_t>> history;
};

/// Alternates dual solves with full-grid sweeps until no grid time has contact
/// above 1 + eps_cost. Throws NonConvergenceError after max_refine_iters.
RefineResult refine(const Pseudostate& omega, const ControlGrid& grid, const SolverConfig& cfg);

/// Directions from the contact function at lambda_opt, magnitudes from a
/// nonnegative least-squares fit of omega. At most six impulses survive.
ManeuverPlan extract_inputs(const Pseudostate& omega, const CandidateSet& set,
                            const DualVector& lambda_opt, const ControlGrid& grid,
                            const SolverConfig& cfg = {});

struct PlanResult {
  ManeuverPlan plan;
  SolverReport report;
};

/// Solver stages on a prebuilt grid.
PlanResult solve(const ControlGrid& grid, const RelativeState& x0, const RelativeState& xf,
                 const SolverConfig& cfg);

/// Grid build followed by the solver; x0 and xf nondimensional.
PlanResult plan(const ChiefTrajectory& chief, const RelativeState& x0, const RelativeState& xf,
                const StmStrategy& strategy, int n_grid_steps, const SolverConfig& cfg);

}  // namespace lunarkd
