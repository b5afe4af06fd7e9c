#include "lunarkd/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "lunarkd/types.hpp"

namespace lunarkd {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // hnew >= 0.2 h
constexpr double kFacMax = 10.0;  // hnew <= 10 h
constexpr double kBeta = 0.04;

}  // namespace

Eigen::VectorXd DenseStep::eval(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return c1 + s * (c2 + s1 * (c3 + s * (c4 + s1 * c5)));
}

Dopri5::Dopri5(Rhs rhs, OdeOptions opts) : rhs_(std::move(rhs)), opts_(opts) {}

double Dopri5::initial_step(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                            double dir) const {
  const Eigen::ArrayXd sk = opts_.atol + opts_.rtol * y0.array().abs();
  const double dnf = (f0.array() / sk).square().mean();
  const double dny = (y0.array() / sk).square().mean();
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
  Eigen::VectorXd y1 = y0 + dir * h * f0;
  Eigen::VectorXd f1(y0.size());
  rhs_(t0 + dir * h, y1, f1);
  const double der2 = std::sqrt(((f1 - f0).array() / sk).square().mean()) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * h, h1);
  if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
  return h;
}

Eigen::VectorXd Dopri5::integrate(double t0, const Eigen::VectorXd& y0, double t1,
                                  const StepObserver& observer) {
  if (t1 == t0) return y0;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const Eigen::Index n = y0.size();

  Eigen::VectorXd y = y0, ynew(n), ytmp(n);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  rhs_(t0, y, k1);
  if (!k1.allFinite()) throw IntegrationError("non-finite derivative at integration start");

  double h = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step(t0, y, k1, dir);
  if (last_h_ > 0.0 && opts_.initial_step <= 0.0) h = last_h_;
  double t = t0;
  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > opts_.max_steps) throw IntegrationError("step budget exhausted");
    if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
    bool last = false;
    if (dir * (t + dir * h - t1) >= 0.0) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double min_h = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (last && h < min_h) {
      // Remaining interval is at roundoff level: finish with an Euler step.
      y += dir * h * k1;
      break;
    }
    if (h < min_h) throw IntegrationError("step size underflow at t = " + std::to_string(t));

    const double hs = dir * h;
    ytmp = y + hs * a21 * k1;
    rhs_(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    rhs_(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs_(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tnew = last ? t1 : t + hs;
    rhs_(tnew, ytmp, k6);
    ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(tnew, ynew, k7);

    const Eigen::ArrayXd errv =
        hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7).array();
    const Eigen::ArrayXd sk =
        opts_.atol + opts_.rtol * y.array().abs().max(ynew.array().abs());
    double err = std::sqrt((errv / sk).square().mean());
    if (!std::isfinite(err) || !ynew.allFinite()) err = 1e10;

    const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      ++accepted_;
      if (observer) {
        DenseStep ds;
        ds.t0 = t;
        ds.h = hs;
        ds.c1 = y;
        ds.c2 = ynew - y;
        ds.c3 = hs * k1 - ds.c2;
        ds.c4 = ds.c2 - hs * k7 - ds.c3;
        ds.c5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        observer(ds);
      }
      k1 = k7;
      y = ynew;
      t = tnew;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      if (!last) last_h_ = hnew;
      h = hnew;
    } else {
      ++rejected_;
      last_rejected = true;
      h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
    }
  }
  return y;
}

std::vector<Eigen::VectorXd> Dopri5::integrate_to_times(const std::vector<double>& times,
                                                        const Eigen::VectorXd& y0) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  out.push_back(y0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    out.push_back(integrate(times[i - 1], out.back(), times[i]));
  }
  return out;
}

}  // namespace lunarkd
