#include "lunarkd/chief_trajectory.hpp"

#include <algorithm>

namespace lunarkd {

ChiefTrajectory::ChiefTrajectory(const SynodicState& initial, double t1, const Cr3bpSystem& sys,
                                 double tol)
    : initial_(initial), final_(initial), sys_(sys) {
  if (t1 < initial.t) throw Error("chief trajectory must run forward in time");
  if (t1 == initial.t) return;
  Dopri5 ode(
      [this](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys_);
      },
      OdeOptions{tol, tol});
  const Eigen::VectorXd y =
      ode.integrate(initial.t, initial.stacked(), t1, [this](const DenseStep& s) { steps_.push_back(s); });
  final_ = SynodicState::from_stacked(y, t1);
}

SynodicState ChiefTrajectory::at(double t) const {
  if (t == initial_.t) return initial_;
  if (t == final_.t) return final_;
  if (t < initial_.t || t > final_.t) throw Error("chief trajectory sampled outside its span");
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double value, const DenseStep& s) { return value < s.t0; });
  const DenseStep& step = *std::prev(it);
  return SynodicState::from_stacked(step.eval(t), t);
}

}  // namespace lunarkd
