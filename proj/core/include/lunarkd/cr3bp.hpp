#pragma once

#include <string>

#include "lunarkd/types.hpp"

namespace lunarkd {

/// Earth-Moon CR3BP constants. `du_km` is the primaries' separation and
/// `tu_s` the inverse of their mean motion.
struct Cr3bpSystem {
  double mu = 0.0;
  double du_km = 0.0;
  double tu_s = 0.0;

  /// Earth-Moon values of the JPL three-body periodic-orbit catalogue.
  static Cr3bpSystem earth_moon();

  /// Reads a JSON object with keys {mu, du_km, tu_s}; unknown keys are rejected.
  static Cr3bpSystem from_file(const std::string& path);

  /// Throws ConfigError if the invariants 0 < mu < 0.5, du > 0, tu > 0 fail.
  void validate() const;

  double vu_kmps() const { return du_km / tu_s; }
  double hours_per_tu() const { return tu_s / 3600.0; }

  /// Position of the Earth in the moon-centred synodic frame: +1 DU along x.
  static Vec3 earth_position() { return Vec3::UnitX(); }
};

/// Chief absolute state in the moon-centred synodic frame. The x axis points
/// from the Moon to the Earth and z is along the system angular momentum.
/// Internally nondimensional; km, km/s and seconds at I/O.
struct SynodicState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double t = 0.0;

  Vec6 stacked() const {
    Vec6 x;
    x << r, v;
    return x;
  }
  static SynodicState from_stacked(const Vec6& x, double t) {
    return {x.head<3>(), x.tail<3>(), t};
  }
};

/// Minimum distance to either primary accepted by the dynamics (DU).
inline constexpr double kSingularityDistance = 1e-9;

/// Acceleration of a massless particle in the rotating moon-centred frame:
/// both primaries' gravity, the Moon's orbital acceleration (the frame origin
/// is non-inertial), centrifugal and Coriolis terms.
Vec3 cr3bp_accel(const SynodicState& s, const Cr3bpSystem& sys);

/// Time derivative of cr3bp_accel along the flow (jerk), given the acceleration.
Vec3 cr3bp_jerk(const SynodicState& s, const Vec3& accel, const Cr3bpSystem& sys);

/// Partial derivative of cr3bp_accel with respect to position.
Mat3 cr3bp_accel_position_jacobian(const Vec3& r, const Cr3bpSystem& sys);

/// Jacobi constant C = 2U - |v|^2 (barycentric effective potential).
double jacobi_constant(const SynodicState& s, const Cr3bpSystem& sys);

/// Convert km / km/s / seconds to nondimensional units and back.
SynodicState nondimensionalize(const SynodicState& km, const Cr3bpSystem& sys);
SynodicState dimensionalize(const SynodicState& nd, const Cr3bpSystem& sys);

/// Adaptive Dormand-Prince 5(4) propagation of the nonlinear CR3BP from
/// s.t to t1 (t1 may precede s.t). Tolerances apply to each step.
SynodicState propagate_absolute(const SynodicState& s, double t1, const Cr3bpSystem& sys,
                                double tol = 1e-12);

struct AbsoluteFlow {
  SynodicState state;
  Mat6 stm;  // d state(t1) / d state(t0)
};

/// Propagation together with the variational equations of the absolute motion.
AbsoluteFlow propagate_absolute_with_stm(const SynodicState& s, double t1, const Cr3bpSystem& sys,
                                         double tol = 1e-12);

}  // namespace lunarkd
