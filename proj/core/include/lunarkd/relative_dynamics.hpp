#pragma once

#include "lunarkd/cr3bp.hpp"
#include "lunarkd/lvlh.hpp"

namespace lunarkd {

/// Deputy position and velocity relative to the chief, LVLH components.
struct RelativeState {
  Vec3 rho = Vec3::Zero();
  Vec3 rho_dot = Vec3::Zero();
  double t = 0.0;

  Vec6 stacked() const {
    Vec6 x;
    x << rho, rho_dot;
    return x;
  }
  static RelativeState from_stacked(const Vec6& x, double t) {
    return {x.head<3>(), x.tail<3>(), t};
  }
};

/// Linearised relative-motion plant
///   A = [ 0        I     ]
///       [ A_rr   -2 Om   ]
struct PlantMatrix {
  Mat6 a = Mat6::Zero();
};

/// Impulses change the relative velocity only: B = [0; I].
inline Mat63 control_matrix() {
  Mat63 b = Mat63::Zero();
  b.bottomRows<3>().setIdentity();
  return b;
}

/// Lower-left block of the plant: frame kinematics plus the tidal tensors of
/// both primaries, all in LVLH components.
Mat3 grav_gradient_block(const SynodicState& chief, const Cr3bpSystem& sys);

/// Same as above from a precomputed frame.
Mat3 grav_gradient_block(const SynodicState& chief, const LvlhFrame& frame, const Cr3bpSystem& sys);

/// Tidal (gravitational) part only: the two primaries' gravity-gradient tensors.
Mat3 tidal_tensor(const SynodicState& chief, const Mat3& basis, const Cr3bpSystem& sys);

PlantMatrix plant_matrix(const SynodicState& chief, const Cr3bpSystem& sys);

/// x_dot = A x + B u.
Vec6 relative_rate(const RelativeState& x, const PlantMatrix& a, const Vec3& u);

}  // namespace lunarkd
