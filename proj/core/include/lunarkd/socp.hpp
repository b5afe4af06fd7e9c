#pragma once

#include <vector>

#include "lunarkd/types.hpp"

namespace lunarkd {

/// Solution of the pair
///   dual:    maximize  omega' lambda   s.t. |Gamma_j' lambda|_2 <= 1
///   primal:  minimize  sum_j |u_j|_2   s.t. sum_j Gamma_j u_j = omega
struct ConeSolution {
  Vec6 lambda = Vec6::Zero();
  std::vector<Vec3> u;       // primal impulses, one per cone
  double dual_value = 0.0;
  double primal_value = 0.0;
  double primal_residual = 0.0;  // |sum Gamma_j u_j - omega|
  int newton_steps = 0;
  bool polished = false;
};

struct ConeSolverOptions {
  double tol = 1e-10;        // relative duality gap at termination
  int max_newton_steps = 2000;
  double accept_gap = 1e-5;  // largest relative gap returned when the polish fails
};

/// Log-barrier interior-point method on the dual with primal recovery from
/// the centring conditions, followed by a Newton polish on the active cones.
/// Throws InfeasibleTargetError if omega is outside the span of the Gammas
/// (dual unbounded) and NonConvergenceError if the step budget is exhausted.
ConeSolution solve_cone_dual(const std::vector<Mat63>& gammas, const Vec6& omega,
                             const ConeSolverOptions& opts = {});

}  // namespace lunarkd
