#pragma once

#include "lunarkd/cr3bp.hpp"

namespace lunarkd {

/// Chief-centred Local-Vertical Local-Horizontal frame. k points from the chief
/// to the Moon, j is anti-parallel to the chief's angular momentum about the
/// Moon (synodic-frame velocity) and i completes the right-handed triad.
struct LvlhFrame {
  /// Rows are the LVLH axes in synodic components: v_lvlh = basis * v_synodic.
  Mat3 basis = Mat3::Identity();
  /// Angular velocity of LVLH relative to inertial space, LVLH components (1/TU).
  Vec3 omega = Vec3::Zero();
  /// Inertial angular acceleration of LVLH, LVLH components (1/TU^2).
  Vec3 omega_dot = Vec3::Zero();
  /// Angular velocity and acceleration relative to the synodic frame, LVLH components.
  Vec3 omega_synodic = Vec3::Zero();
  Vec3 omega_dot_synodic = Vec3::Zero();
};

/// Angular momentum magnitude below which the frame is rejected.
inline constexpr double kDegenerateMomentum = 1e-12;

/// Builds the frame and its kinematics. Angular acceleration is obtained
/// analytically from the chief's acceleration and jerk.
LvlhFrame lvlh_frame(const SynodicState& chief, const Cr3bpSystem& sys);

/// Basis only (no kinematics); used by finite-difference oracles.
Mat3 lvlh_basis(const Vec3& r, const Vec3& v);

/// Signed axis permutation RTN = {-k, i, -j}.
inline Vec3 rtn_from_lvlh(const Vec3& v) { return {-v.z(), v.x(), -v.y()}; }
inline Vec3 lvlh_from_rtn(const Vec3& v) { return {v.y(), -v.z(), -v.x()}; }

}  // namespace lunarkd
