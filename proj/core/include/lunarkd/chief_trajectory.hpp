#pragma once

#include <vector>

#include "lunarkd/cr3bp.hpp"
#include "lunarkd/ode.hpp"

namespace lunarkd {

/// The chief's nonlinear trajectory over [t0, t1], integrated once with dense
/// output and shared by every STM builder of a scenario.
class ChiefTrajectory {
 public:
  ChiefTrajectory(const SynodicState& initial, double t1, const Cr3bpSystem& sys,
                  double tol = 1e-12);

  /// Chief state at t in [t0, t1] from the continuous extension of the
  /// integrator. The endpoints are returned exactly.
  SynodicState at(double t) const;

  double t0() const { return initial_.t; }
  double t1() const { return final_.t; }
  const SynodicState& initial() const { return initial_; }
  const SynodicState& final() const { return final_; }
  const Cr3bpSystem& system() const { return sys_; }
  std::size_t steps() const { return steps_.size(); }

 private:
  SynodicState initial_;
  SynodicState final_;
  Cr3bpSystem sys_;
  std::vector<DenseStep> steps_;
};

}  // namespace lunarkd
