#include "lunarkd/relative_dynamics.hpp"

#include <cmath>

namespace lunarkd {

Mat3 tidal_tensor(const SynodicState& chief, const Mat3& basis, const Cr3bpSystem& sys) {
  const Vec3 r = basis * chief.r;
  // Chief position relative to the Earth.
  const Vec3 d = basis * (chief.r - Cr3bpSystem::earth_position());
  const double rn = r.norm();
  const double dn = d.norm();
  if (rn < kSingularityDistance) throw SingularityError("chief coincides with the Moon");
  if (dn < kSingularityDistance) throw SingularityError("chief coincides with the Earth");
  const Mat3 eye = Mat3::Identity();
  return -sys.mu / (rn * rn * rn) * (eye - 3.0 * r * r.transpose() / (rn * rn)) -
         (1.0 - sys.mu) / (dn * dn * dn) * (eye - 3.0 * d * d.transpose() / (dn * dn));
}

Mat3 grav_gradient_block(const SynodicState& chief, const LvlhFrame& frame,
                         const Cr3bpSystem& sys) {
  const Mat3 om = skew(frame.omega);
  return -skew(frame.omega_dot) - om * om + tidal_tensor(chief, frame.basis, sys);
}

Mat3 grav_gradient_block(const SynodicState& chief, const Cr3bpSystem& sys) {
  return grav_gradient_block(chief, lvlh_frame(chief, sys), sys);
}

PlantMatrix plant_matrix(const SynodicState& chief, const Cr3bpSystem& sys) {
  const LvlhFrame frame = lvlh_frame(chief, sys);
  PlantMatrix p;
  p.a.topRightCorner<3, 3>().setIdentity();
  p.a.bottomLeftCorner<3, 3>() = grav_gradient_block(chief, frame, sys);
  p.a.bottomRightCorner<3, 3>() = -2.0 * skew(frame.omega);
  return p;
}

Vec6 relative_rate(const RelativeState& x, const PlantMatrix& a, const Vec3& u) {
  Vec6 rate = a.a * x.stacked();
  rate.tail<3>() += u;
  return rate;
}

}  // namespace lunarkd
