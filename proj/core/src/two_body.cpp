#include <algorithm>
#include <cmath>

#include "lunarkd/stm.hpp"

namespace lunarkd {

double KeplerElements::mean_motion() const {
  if (!(a > 0.0)) throw Error("two-body baseline: chief is not bound to the Moon");
  return std::sqrt(gm / (a * a * a));
}

namespace {

double mean_from_true(double nu, double e) {
  const double ecc_anom =
      2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(0.5 * nu), std::sqrt(1.0 + e) * std::cos(0.5 * nu));
  return ecc_anom - e * std::sin(ecc_anom);
}

}  // namespace

double KeplerElements::true_anomaly_at(double t) const {
  if (!(e >= 0.0 && e < 1.0)) throw Error("Kepler propagation requires 0 <= e < 1");
  const double m = mean_from_true(true_anomaly, e) + mean_motion() * (t - epoch);
  double ecc_anom = e < 0.8 ? m : M_PI;
  for (int it = 0; it < 100; ++it) {
    const double f = ecc_anom - e * std::sin(ecc_anom) - m;
    const double d = f / (1.0 - e * std::cos(ecc_anom));
    ecc_anom -= d;
    if (std::abs(d) < 1e-12) break;
  }
  return 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * ecc_anom),
                          std::sqrt(1.0 - e) * std::cos(0.5 * ecc_anom));
}

KeplerElements osculating_elements(const SynodicState& chief, const Cr3bpSystem& sys) {
  KeplerElements el;
  el.gm = sys.mu;
  el.epoch = chief.t;
  const Vec3& r = chief.r;
  const Vec3 v = chief.v + Vec3::UnitZ().cross(r);
  const double rn = r.norm();
  const double energy = 0.5 * v.squaredNorm() - el.gm / rn;
  el.a = -el.gm / (2.0 * energy);
  const Vec3 e_vec = ((v.squaredNorm() - el.gm / rn) * r - r.dot(v) * v) / el.gm;
  el.e = e_vec.norm();
  if (el.e < 1e-12) {
    // Circular: measure anomaly from the current position.
    el.e = 0.0;
    el.true_anomaly = 0.0;
  } else {
    double c = e_vec.dot(r) / (el.e * rn);
    c = std::clamp(c, -1.0, 1.0);
    el.true_anomaly = std::acos(c);
    if (r.dot(v) < 0.0) el.true_anomaly = 2.0 * M_PI - el.true_anomaly;
  }
  return el;
}

Stm hcw_stm(double n, double dt) {
  if (!(n > 0.0)) throw Error("hcw_stm: mean motion must be positive");
  Stm out;
  out.t_from = 0.0;
  out.t_to = dt;
  if (dt == 0.0) return out;
  const double s = std::sin(n * dt);
  const double c = std::cos(n * dt);
  const double nt = n * dt;
  // Radial / transverse / normal ordering.
  Mat6 rtn;
  rtn << 4.0 - 3.0 * c, 0.0, 0.0, s / n, 2.0 * (1.0 - c) / n, 0.0,
         6.0 * (s - nt), 1.0, 0.0, -2.0 * (1.0 - c) / n, (4.0 * s - 3.0 * nt) / n, 0.0,
         0.0, 0.0, c, 0.0, 0.0, s / n,
         3.0 * n * s, 0.0, 0.0, c, 2.0 * s, 0.0,
         -6.0 * n * (1.0 - c), 0.0, 0.0, -2.0 * s, 4.0 * c - 3.0, 0.0,
         0.0, 0.0, -n * s, 0.0, 0.0, c;
  // LVLH = P * RTN with x = T, y = -N, z = -R.
  Mat3 p;
  p << 0.0, 1.0, 0.0,
       0.0, 0.0, -1.0,
       -1.0, 0.0, 0.0;
  Mat6 p6 = Mat6::Zero();
  p6.topLeftCorner<3, 3>() = p;
  p6.bottomRightCorner<3, 3>() = p;
  out.phi = p6 * rtn * p6.transpose();
  return out;
}

namespace {

// LVLH state -> scaled variables (x~, y~, z~, x~', y~', z~') where ' = d/d(nu).
Mat6 ya_forward_transform(double nu, double e, double k2) {
  const double rho = 1.0 + e * std::cos(nu);
  Mat6 t = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    t(i, i) = rho;
    t(3 + i, i) = -e * std::sin(nu);
    t(3 + i, 3 + i) = 1.0 / (k2 * rho);
  }
  return t;
}

Mat6 ya_inverse_transform(double nu, double e, double k2) {
  const double rho = 1.0 + e * std::cos(nu);
  Mat6 t = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    t(i, i) = 1.0 / rho;
    t(3 + i, i) = k2 * e * std::sin(nu);
    t(3 + i, 3 + i) = k2 * rho;
  }
  return t;
}

}  // namespace

Stm ya_stm(const KeplerElements& el, double t_from, double t_to) {
  const double e = el.e;
  if (!(e >= 0.0 && e < 1.0)) throw Error("ya_stm: eccentricity must satisfy 0 <= e < 1");
  Stm out;
  out.t_from = t_from;
  out.t_to = t_to;
  if (t_from == t_to) return out;

  const double p = el.semi_latus_rectum();
  const double h = std::sqrt(el.gm * p);
  const double k2 = h / (p * p);
  const double nu1 = el.true_anomaly_at(t_from);
  const double nu2 = el.true_anomaly_at(t_to);
  const double j = k2 * (t_to - t_from);

  // In-plane fundamental matrix at nu2 (ordering x~, z~, x~', z~').
  const double rho2 = 1.0 + e * std::cos(nu2);
  const double s2 = rho2 * std::sin(nu2);
  const double c2 = rho2 * std::cos(nu2);
  const double sp2 = std::cos(nu2) + e * std::cos(2.0 * nu2);
  const double cp2 = -(std::sin(nu2) + e * std::sin(2.0 * nu2));
  Eigen::Matrix4d fund;
  fund << 1.0, -c2 * (1.0 + 1.0 / rho2), s2 * (1.0 + 1.0 / rho2), 3.0 * rho2 * rho2 * j,
          0.0, s2, c2, 2.0 - 3.0 * e * s2 * j,
          0.0, 2.0 * s2, 2.0 * c2 - e, 3.0 * (1.0 - 2.0 * e * s2 * j),
          0.0, sp2, cp2, -3.0 * e * (sp2 * j + s2 / (rho2 * rho2));

  // Its inverse at nu1 (J = 0), which maps initial conditions to constants.
  const double rho1 = 1.0 + e * std::cos(nu1);
  const double s1 = rho1 * std::sin(nu1);
  const double c1 = rho1 * std::cos(nu1);
  Eigen::Matrix4d inv;
  inv << 1.0 - e * e, 3.0 * e * s1 * (1.0 / rho1 + 1.0 / (rho1 * rho1)), -e * s1 * (1.0 + 1.0 / rho1), -e * c1 + 2.0,
         0.0, -3.0 * s1 * (1.0 / rho1 + e * e / (rho1 * rho1)), s1 * (1.0 + 1.0 / rho1), c1 - 2.0 * e,
         0.0, -3.0 * (c1 / rho1 + e), c1 * (1.0 + 1.0 / rho1) + e, -s1,
         0.0, 3.0 * rho1 + e * e - 1.0, -rho1 * rho1, e * s1;
  inv /= (1.0 - e * e);
  const Eigen::Matrix4d in_plane = fund * inv;

  Mat6 scaled = Mat6::Zero();
  constexpr int idx[4] = {0, 2, 3, 5};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) scaled(idx[r], idx[c]) = in_plane(r, c);
  const double dnu = nu2 - nu1;
  scaled(1, 1) = std::cos(dnu);
  scaled(1, 4) = std::sin(dnu);
  scaled(4, 1) = -std::sin(dnu);
  scaled(4, 4) = std::cos(dnu);

  out.phi = ya_inverse_transform(nu2, e, k2) * scaled * ya_forward_transform(nu1, e, k2);
  return out;
}

}  // namespace lunarkd
