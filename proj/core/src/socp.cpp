#include "lunarkd/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lunarkd {
namespace {

struct Barrier {
  const std::vector<Mat63>& gammas;
  const Vec6& omega;
  Eigen::MatrixXd basis;  // orthonormal basis of the span of the Gammas

  // Gradient and Hessian of  -t w'l - sum log(1 - |G'l|^2)  restricted to `basis`.
  void derivatives(const Vec6& lambda, double t, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    Vec6 g = -t * omega;
    Mat6 h = Mat6::Zero();
    for (const Mat63& gam : gammas) {
      const Vec3 z = gam.transpose() * lambda;
      const double delta = 1.0 - z.squaredNorm();
      g += gam * (2.0 * z / delta);
      const Mat3 d = (2.0 / delta) * Mat3::Identity() + (4.0 / (delta * delta)) * z * z.transpose();
      h += gam * d * gam.transpose();
    }
    grad = basis.transpose() * g;
    hess = basis.transpose() * h * basis;
  }

  bool strictly_feasible(const Vec6& lambda) const {
    return std::all_of(gammas.begin(), gammas.end(), [&](const Mat63& gam) {
      return (gam.transpose() * lambda).squaredNorm() < 1.0;
    });
  }
};

Eigen::MatrixXd span_basis(const std::vector<Mat63>& gammas, const Vec6& omega) {
  Mat6 s = Mat6::Zero();
  for (const Mat63& g : gammas) s += g * g.transpose();
  Eigen::SelfAdjointEigenSolver<Mat6> eig(s);
  const double cutoff = 1e-13 * std::max(eig.eigenvalues().maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < 6; ++i) {
    if (eig.eigenvalues()(i) > cutoff) {
      keep.push_back(i);
    } else if (std::abs(eig.eigenvectors().col(i).dot(omega)) > 1e-9 * omega.norm()) {
      throw InfeasibleTargetError(
          "target pseudostate is outside the span of the candidate control maps");
    }
  }
  Eigen::MatrixXd basis(6, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    basis.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors().col(keep[i]);
  }
  return basis;
}

void recover_primal(const std::vector<Mat63>& gammas, const Vec6& omega, double t,
                    ConeSolution& sol) {
  sol.u.resize(gammas.size());
  Vec6 sum = Vec6::Zero();
  sol.primal_value = 0.0;
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    const Vec3 z = gammas[j].transpose() * sol.lambda;
    sol.u[j] = 2.0 * z / (t * (1.0 - z.squaredNorm()));
    sum += gammas[j] * sol.u[j];
    sol.primal_value += sol.u[j].norm();
  }
  sol.dual_value = omega.dot(sol.lambda);
  sol.primal_residual = (sum - omega).norm();
}

// Newton iteration on the KKT conditions of the cones that carry impulse:
//   sum_A Gamma_j z_j m_j = omega,   |z_j| = 1,   z_j = Gamma_j' lambda.
// Returns false if the iteration fails; `m` holds the last magnitudes.
bool kkt_newton(const std::vector<Mat63>& gammas, const Vec6& omega,
                const std::vector<std::size_t>& active, Vec6& lambda, Eigen::VectorXd& m) {
  const auto na = static_cast<Eigen::Index>(active.size());
  const double wn = omega.norm();
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd f(6 + na);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(6 + na, 6 + na);
    Vec6 f1 = -omega;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Mat63& g = gammas[active[static_cast<std::size_t>(a)]];
      const Vec3 z = g.transpose() * lambda;
      const Vec6 gz = g * z;
      f1 += m(a) * gz;
      f(6 + a) = 0.5 * (z.squaredNorm() - 1.0);
      jac.topLeftCorner<6, 6>() += m(a) * g * g.transpose();
      jac.block(0, 6 + a, 6, 1) = gz;
      jac.block(6 + a, 0, 1, 6) = gz.transpose();
    }
    f.head<6>() = f1;
    const double res = std::max(f1.norm() / wn, f.tail(na).cwiseAbs().maxCoeff());
    // Stop at machine precision or once the residual stagnates at a small level.
    if (res < 1e-14 || (res < 1e-9 && res > 0.5 * prev_res)) return true;
    prev_res = res;
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) return false;
    lambda += step.head<6>();
    m += step.tail(na);
  }
  return false;
}

// Replaces the barrier iterate by an exact KKT point. The support is seeded
// from the barrier's primal magnitudes (largest first) and then adjusted:
// cones with negative magnitude leave, the most violated cone joins.
bool polish(const std::vector<Mat63>& gammas, const Vec6& omega, ConeSolution& sol) {
  double umax = 0.0;
  for (const Vec3& u : sol.u) umax = std::max(umax, u.norm());
  if (umax <= 0.0) return false;
  constexpr double kFeasTol = 1e-10;

  for (const double tier : {1e-2, 1e-4, 1e-6}) {
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      if (sol.u[j].norm() > tier * umax) active.push_back(j);
    }
    for (int round = 0; round < 20 && !active.empty(); ++round) {
      Vec6 lambda = sol.lambda;
      Eigen::VectorXd m(static_cast<Eigen::Index>(active.size()));
      for (std::size_t a = 0; a < active.size(); ++a) {
        m(static_cast<Eigen::Index>(a)) = std::max(sol.u[active[a]].norm(), 1e-3 * umax);
      }
      const bool ok = kkt_newton(gammas, omega, active, lambda, m);
      if (!ok) break;
      Eigen::Index worst = 0;
      if (m.minCoeff(&worst) < 0.0) {
        active.erase(active.begin() + worst);
        continue;
      }
      std::size_t violated = gammas.size();
      double gmax = 1.0 + kFeasTol;
      for (std::size_t j = 0; j < gammas.size(); ++j) {
        const double g = (gammas[j].transpose() * lambda).norm();
        if (g > gmax) {
          gmax = g;
          violated = j;
        }
      }
      if (violated < gammas.size()) {
        active.push_back(violated);
        continue;
      }

      ConeSolution out = sol;
      out.lambda = lambda;
      out.dual_value = omega.dot(lambda);
      std::fill(out.u.begin(), out.u.end(), Vec3::Zero());
      Vec6 sum = Vec6::Zero();
      out.primal_value = 0.0;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Vec3 z = gammas[active[a]].transpose() * lambda;
        const double mag = m(static_cast<Eigen::Index>(a));
        out.u[active[a]] = mag * z / z.norm();
        sum += gammas[active[a]] * out.u[active[a]];
        out.primal_value += mag;
      }
      out.primal_residual = (sum - omega).norm();
      // Keep the polished point only if it is at least as good a certificate.
      const double gap_old = std::abs(sol.primal_value - sol.dual_value) + sol.primal_residual;
      const double gap_new = std::abs(out.primal_value - out.dual_value) + out.primal_residual;
      if (gap_new > gap_old) return false;
      out.polished = true;
      sol = out;
      return true;
    }
  }
  return false;
}

}  // namespace

ConeSolution solve_cone_dual(const std::vector<Mat63>& gammas, const Vec6& omega,
                             const ConeSolverOptions& opts) {
  if (gammas.empty()) throw InfeasibleTargetError("no candidate control maps");
  ConeSolution sol;
  sol.u.assign(gammas.size(), Vec3::Zero());
  if (omega.norm() == 0.0) return sol;

  Barrier bar{gammas, omega, span_basis(gammas, omega)};
  const Eigen::Index r = bar.basis.cols();

  // Initial barrier weight: makes the first Newton step from lambda = 0 land
  // roughly halfway to the nearest cone boundary, independent of |omega|.
  Eigen::VectorXd grad(r);
  Eigen::MatrixXd hess(r, r);
  bar.derivatives(Vec6::Zero(), 1.0, grad, hess);
  const double q = grad.dot(hess.ldlt().solve(grad));
  double t = q > 0.0 ? 0.5 / std::sqrt(q) : 1.0;

  const double m = static_cast<double>(gammas.size());
  constexpr double kGrowth = 20.0;
  Vec6 lambda = Vec6::Zero();
  int steps = 0;
  // The barrier alone loses accuracy near the boundary; it hands over to the
  // active-set polish once the gap is small.
  const double barrier_tol = std::max(opts.tol, 1e-7);
  bool stalled = false;

  while (!stalled) {
    // Centring by damped Newton; the barrier is self-concordant so the
    // damped step stays strictly feasible.
    double prev_dec2 = std::numeric_limits<double>::infinity();
    for (;;) {
      if (++steps > opts.max_newton_steps) {
        throw NonConvergenceError("cone solver exceeded its Newton step budget");
      }
      bar.derivatives(lambda, t, grad, hess);
      const auto ldlt = hess.ldlt();
      const Eigen::VectorXd dx = -ldlt.solve(grad);
      const double dec2 = -grad.dot(dx);
      if (!std::isfinite(dec2)) {
        stalled = true;
        break;
      }
      if (dec2 < 1e-10 || (dec2 < 1e-6 && dec2 >= 0.5 * prev_dec2)) break;
      prev_dec2 = dec2;
      const double dec = std::sqrt(dec2);
      double alpha = dec > 0.25 ? 1.0 / (1.0 + dec) : 1.0;
      Vec6 trial = lambda + alpha * (bar.basis * dx);
      while (!bar.strictly_feasible(trial) && alpha > 1e-12) {
        alpha *= 0.5;
        trial = lambda + alpha * (bar.basis * dx);
      }
      if (alpha <= 1e-12 || trial == lambda) {
        stalled = true;
        break;
      }
      lambda = trial;
    }
    sol.lambda = lambda;
    recover_primal(gammas, omega, t, sol);
    const double scale = std::max(sol.dual_value, 1e-300);
    if (m / t <= barrier_tol * scale) break;
    t *= kGrowth;
  }
  sol.newton_steps = steps;
  polish(gammas, omega, sol);

  const double rel_gap = std::abs(sol.primal_value - sol.dual_value) / std::max(sol.dual_value, 1e-300);
  if (!std::isfinite(rel_gap) || rel_gap > std::max(opts.tol, opts.accept_gap)) {
    throw NonConvergenceError("cone solver stalled with relative duality gap " +
                              std::to_string(rel_gap));
  }
  return sol;
}

}  // namespace lunarkd
