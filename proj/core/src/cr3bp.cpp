#include "lunarkd/cr3bp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lunarkd/ode.hpp"

namespace lunarkd {

Cr3bpSystem Cr3bpSystem::earth_moon() {
  // JPL Solar System Dynamics three-body periodic orbit catalogue, Earth-Moon.
  return {1.215058560962404e-2, 389703.2648292776, 382981.2891290545};
}

void Cr3bpSystem::validate() const {
  if (!(mu > 0.0 && mu < 0.5)) throw ConfigError("mu: must satisfy 0 < mu < 0.5");
  if (!(du_km > 0.0)) throw ConfigError("du_km: must be positive");
  if (!(tu_s > 0.0)) throw ConfigError("tu_s: must be positive");
}

Cr3bpSystem Cr3bpSystem::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("constants: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("constants: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("constants: expected a JSON object");
  Cr3bpSystem sys;
  bool seen_mu = false, seen_du = false, seen_tu = false;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("constants." + key + ": expected a number");
    if (key == "mu") {
      sys.mu = value.get<double>();
      seen_mu = true;
    } else if (key == "du_km") {
      sys.du_km = value.get<double>();
      seen_du = true;
    } else if (key == "tu_s") {
      sys.tu_s = value.get<double>();
      seen_tu = true;
    } else {
      throw ConfigError("constants." + key + ": unknown key");
    }
  }
  if (!seen_mu) throw ConfigError("constants.mu: missing");
  if (!seen_du) throw ConfigError("constants.du_km: missing");
  if (!seen_tu) throw ConfigError("constants.tu_s: missing");
  sys.validate();
  return sys;
}

namespace {

void check_distances(double d_moon, double d_earth) {
  if (d_moon < kSingularityDistance) throw SingularityError("state coincides with the Moon");
  if (d_earth < kSingularityDistance) throw SingularityError("state coincides with the Earth");
}

}  // namespace

Vec3 cr3bp_accel(const SynodicState& s, const Cr3bpSystem& sys) {
  const Vec3 earth = Cr3bpSystem::earth_position();
  const Vec3 d = s.r - earth;
  const double rm = s.r.norm();
  const double re = d.norm();
  check_distances(rm, re);
  const double mu = sys.mu;
  Vec3 a = -mu / (rm * rm * rm) * s.r - (1.0 - mu) / (re * re * re) * d;
  // The Moon itself accelerates toward the Earth with magnitude (1 - mu).
  a -= (1.0 - mu) * earth;
  a.x() += s.r.x() + 2.0 * s.v.y();
  a.y() += s.r.y() - 2.0 * s.v.x();
  return a;
}

Mat3 cr3bp_accel_position_jacobian(const Vec3& r, const Cr3bpSystem& sys) {
  const Vec3 d = r - Cr3bpSystem::earth_position();
  const double rm = r.norm();
  const double re = d.norm();
  check_distances(rm, re);
  const double mu = sys.mu;
  const Mat3 eye = Mat3::Identity();
  Mat3 g = -mu / std::pow(rm, 3) * (eye - 3.0 * r * r.transpose() / (rm * rm)) -
           (1.0 - mu) / std::pow(re, 3) * (eye - 3.0 * d * d.transpose() / (re * re));
  g(0, 0) += 1.0;
  g(1, 1) += 1.0;
  return g;
}

Vec3 cr3bp_jerk(const SynodicState& s, const Vec3& accel, const Cr3bpSystem& sys) {
  Vec3 j = cr3bp_accel_position_jacobian(s.r, sys) * s.v;
  j.x() += 2.0 * accel.y();
  j.y() -= 2.0 * accel.x();
  return j;
}

double jacobi_constant(const SynodicState& s, const Cr3bpSystem& sys) {
  const double mu = sys.mu;
  const double xb = (1.0 - mu) - s.r.x();
  const double yb = -s.r.y();
  const double r_moon = s.r.norm();
  const double r_earth = (s.r - Cr3bpSystem::earth_position()).norm();
  const double u = 0.5 * (xb * xb + yb * yb) + (1.0 - mu) / r_earth + mu / r_moon;
  return 2.0 * u - s.v.squaredNorm();
}

SynodicState nondimensionalize(const SynodicState& km, const Cr3bpSystem& sys) {
  return {km.r / sys.du_km, km.v * (sys.tu_s / sys.du_km), km.t / sys.tu_s};
}

SynodicState dimensionalize(const SynodicState& nd, const Cr3bpSystem& sys) {
  return {nd.r * sys.du_km, nd.v * (sys.du_km / sys.tu_s), nd.t * sys.tu_s};
}

SynodicState propagate_absolute(const SynodicState& s, double t1, const Cr3bpSystem& sys,
                                double tol) {
  if (t1 == s.t) return s;
  Dopri5 ode(
      [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys);
      },
      OdeOptions{tol, tol});
  const Eigen::VectorXd y = ode.integrate(s.t, s.stacked(), t1);
  return SynodicState::from_stacked(y, t1);
}

AbsoluteFlow propagate_absolute_with_stm(const SynodicState& s, double t1, const Cr3bpSystem& sys,
                                         double tol) {
  Eigen::VectorXd y0(42);
  y0.head<6>() = s.stacked();
  Eigen::Map<Mat6>(y0.data() + 6).setIdentity();
  if (t1 == s.t) return {s, Mat6::Identity()};
  Dopri5 ode(
      [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys);
        Mat6 a = Mat6::Zero();
        a.topRightCorner<3, 3>().setIdentity();
        a.bottomLeftCorner<3, 3>() = cr3bp_accel_position_jacobian(st.r, sys);
        a(3, 4) = 2.0;
        a(4, 3) = -2.0;
        Eigen::Map<Mat6>(dy.data() + 6) = a * Eigen::Map<const Mat6>(y.data() + 6);
      },
      OdeOptions{tol, tol});
  const Eigen::VectorXd y = ode.integrate(s.t, y0, t1);
  return {SynodicState::from_stacked(y.head<6>(), t1), Eigen::Map<const Mat6>(y.data() + 6)};
}

}  // namespace lunarkd
