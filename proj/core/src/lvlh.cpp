#include "lunarkd/lvlh.hpp"

#include <cmath>

namespace lunarkd {

Mat3 lvlh_basis(const Vec3& r, const Vec3& v) {
  const Vec3 h = r.cross(v);
  const double hn = h.norm();
  if (hn < kDegenerateMomentum) throw DegenerateFrameError("chief angular momentum vanishes");
  const double rn = r.norm();
  if (rn < kSingularityDistance) throw SingularityError("chief coincides with the Moon");
  const Vec3 k = -r / rn;
  const Vec3 j = -h / hn;
  Mat3 basis;
  basis.row(0) = j.cross(k).transpose();
  basis.row(1) = j.transpose();
  basis.row(2) = k.transpose();
  return basis;
}

LvlhFrame lvlh_frame(const SynodicState& chief, const Cr3bpSystem& sys) {
  LvlhFrame f;
  f.basis = lvlh_basis(chief.r, chief.v);

  const Vec3 a = cr3bp_accel(chief, sys);
  const Vec3 jerk = cr3bp_jerk(chief, a, sys);

  // Radial / transverse / normal unit vectors of the chief's motion about the Moon.
  const double r = chief.r.norm();
  const Vec3 r_hat = chief.r / r;
  const Vec3 h = chief.r.cross(chief.v);
  const double hn = h.norm();
  const Vec3 n_hat = h / hn;
  const Vec3 t_hat = n_hat.cross(r_hat);

  const double v_r = chief.v.dot(r_hat);
  const double a_t = a.dot(t_hat);
  const double a_n = a.dot(n_hat);
  const double j_n = jerk.dot(n_hat);

  // omega_{L/M} = w_r * r_hat + w_n * n_hat.
  const double w_r = r * a_n / hn;
  const double w_n = hn / (r * r);
  const double w_r_dot = v_r * a_n / hn + r * (j_n - w_r * a_t) / hn - r * a_n * (r * a_t) / (hn * hn);
  const double w_n_dot = a_t / r - 2.0 * hn * v_r / (r * r * r);

  // LVLH components: i = t_hat, j = -n_hat, k = -r_hat.
  f.omega_synodic = Vec3(0.0, -w_n, -w_r);
  f.omega_dot_synodic = Vec3(0.0, -w_n_dot, -w_r_dot);

  const Vec3 z_lvlh = f.basis.col(2);  // synodic rotation axis in LVLH components
  f.omega = f.omega_synodic + z_lvlh;
  f.omega_dot = f.omega_dot_synodic + z_lvlh.cross(f.omega_synodic);
  return f;
}

}  // namespace lunarkd
