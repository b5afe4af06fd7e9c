// Generates the bundled L2 southern halo catalog: six resonant family members
// (9:2, 4:1, 7:2, 3:1, 5:2, 2:1 with the synodic month), each sampled
// uniformly in time over one period starting at apolune.
//
// The 9:2 member is seeded with the published apolune state of the 9:2 NRHO.
// The others come from pseudo-arclength continuation of the symmetric halo
// family (single shooting to the perpendicular x-z plane crossing) followed
// by a fixed-period correction.

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lunarkd/halo_catalog.hpp"
#include "lunarkd/ode.hpp"

namespace {

using namespace lunarkd;
using Vec4 = Eigen::Vector4d;

constexpr double kSynodicMonthDays = 29.5306;
constexpr double kMaxCorrection = 5e-3;  // DU per Newton step

struct Shot {
  Eigen::Vector3d residual;           // y, vx, vz at the half period
  Eigen::Matrix<double, 3, 4> jac;    // wrt x0, z0, vy0, half period
};

// u = (x0, z0, vy0, T/2) of a symmetric orbit starting on the x-z plane.
SynodicState start_of(const Vec4& u) {
  return {Vec3(u(0), 0.0, u(1)), Vec3(0.0, u(2), 0.0), 0.0};
}

Shot shoot(const Vec4& u, const Cr3bpSystem& sys) {
  const AbsoluteFlow flow = propagate_absolute_with_stm(start_of(u), u(3), sys);
  const Vec3 acc = cr3bp_accel(flow.state, sys);
  Shot s;
  s.residual << flow.state.r.y(), flow.state.v.x(), flow.state.v.z();
  const int rows[3] = {1, 3, 5};
  const Vec6 rate = (Vec6() << flow.state.v, acc).finished();
  for (int i = 0; i < 3; ++i) {
    s.jac(i, 0) = flow.stm(rows[i], 0);
    s.jac(i, 1) = flow.stm(rows[i], 2);
    s.jac(i, 2) = flow.stm(rows[i], 4);
    s.jac(i, 3) = rate(rows[i]);
  }
  return s;
}

Vec4 family_tangent(const Eigen::Matrix<double, 3, 4>& jac, const Vec4& previous) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(jac, Eigen::ComputeFullV);
  Vec4 t = svd.matrixV().col(3);
  if (t.dot(previous) < 0.0) t = -t;
  return t;
}

// Fixed half period: solve for (x0, z0, vy0).
Vec4 correct_fixed_period(Vec4 u, const Cr3bpSystem& sys) {
  for (int it = 0; it < 200; ++it) {
    const Shot s = shoot(u, sys);
    if (s.residual.cwiseAbs().maxCoeff() < 1e-12) return u;
    Eigen::Vector3d d = s.jac.leftCols<3>().fullPivLu().solve(-s.residual);
    if (d.norm() > kMaxCorrection) d *= kMaxCorrection / d.norm();
    u.head<3>() += d;
  }
  throw NonConvergenceError("fixed-period correction did not converge");
}

std::vector<SynodicState> sample_orbit(const SynodicState& start, double period, int n,
                                       const Cr3bpSystem& sys) {
  std::vector<double> times;
  for (int k = 0; k < n; ++k) times.push_back(period * k / n);
  Dopri5 ode(
      [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys);
      },
      OdeOptions{1e-13, 1e-13});
  const auto ys = ode.integrate_to_times(times, start.stacked());
  std::vector<SynodicState> out;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    SynodicState s = SynodicState::from_stacked(ys[k], 0.0);
    out.push_back(s);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the resonant L2 halo catalog"};
  std::string out = "halo_catalog.csv";
  int samples = 1000;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Report continuation progress");
  app.add_option("-o,--out", out, "Output CSV path");
  app.add_option("-n,--samples", samples, "States per family")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    const Cr3bpSystem sys = Cr3bpSystem::earth_moon();
    const double month = kSynodicMonthDays * 86400.0 / sys.tu_s;
    struct Target {
      const char* name;
      double fraction;  // period / synodic month
    };
    const std::vector<Target> targets = {{"9:2", 2.0 / 9.0}, {"4:1", 1.0 / 4.0}, {"7:2", 2.0 / 7.0},
                                         {"3:1", 1.0 / 3.0}, {"5:2", 2.0 / 5.0}, {"2:1", 1.0 / 2.0}};

    HaloCatalog cat;
    const SynodicState nrho = nondimensionalize(
        {Vec3(-13395.0, 0.0, -70841.0), Vec3(0.0, 0.1055, 0.0), 0.0}, sys);
    cat.families.push_back({"9:2", sample_orbit(nrho, targets[0].fraction * month, samples, sys), 0.0});
    std::fprintf(stderr, "9:2 seeded from the published apolune state\n");

    // Exact 9:2 member at the nominal period to start the continuation.
    const Vec4 u0(nrho.r.x(), nrho.r.z(), nrho.v.y(), 0.5 * targets[0].fraction * month);
    Vec4 u = correct_fixed_period(u0, sys);

    Vec4 t = family_tangent(shoot(u, sys).jac, Vec4(0, 0, 0, 1));
    double ds = 0.01;
    std::size_t next = 1;
    while (next < targets.size()) {
      const Vec4 predicted = u + ds * t;
      Vec4 v = predicted;
      bool ok = false;
      Shot s;
      for (int it = 0; it < 15; ++it) {
        s = shoot(v, sys);
        Vec4 g;
        g << s.residual, t.dot(v - predicted);
        if (g.cwiseAbs().maxCoeff() < 1e-11) {
          ok = true;
          break;
        }
        Eigen::Matrix4d jj;
        jj << s.jac, t.transpose();
        v -= jj.fullPivLu().solve(g);
      }
      if (!ok) {
        ds *= 0.5;
        if (ds < 1e-8) throw NonConvergenceError("continuation step collapsed");
        continue;
      }
      const double half_target = 0.5 * targets[next].fraction * month;
      if ((u(3) - half_target) * (v(3) - half_target) <= 0.0) {
        const double w = (half_target - u(3)) / (v(3) - u(3));
        Vec4 guess = u + w * (v - u);
        guess(3) = half_target;
        const Vec4 member = correct_fixed_period(guess, sys);
        const SynodicState start = start_of(member);
        const SynodicState other = propagate_absolute(start, member(3), sys);
        // Start at apolune: the crossing farther from the Moon.
        const SynodicState apo = other.r.norm() > start.r.norm() ? SynodicState{other.r, other.v, 0.0}
                                                                 : start;
        cat.families.push_back(
            {targets[next].name, sample_orbit(apo, 2.0 * member(3), samples, sys), 0.0});
        const SynodicState km = dimensionalize(apo, sys);
        std::fprintf(stderr, "%s period %.6f TU apolune (%.3f, %.3f, %.3f) km vy %.6f km/s\n",
                     targets[next].name, 2.0 * member(3), km.r.x(), km.r.y(), km.r.z(), km.v.y());
        ++next;
        continue;  // re-test the same step against the next target
      }
      t = family_tangent(s.jac, t);
      u = v;
      if (verbose) {
        std::fprintf(stderr, "  T %.5f TU x0 %.1f z0 %.1f km ds %.3g\n", 2.0 * u(3),
                     u(0) * sys.du_km, u(1) * sys.du_km, ds);
      }
      ds = std::min(1.5 * ds, 0.05);
    }

    write_halo_catalog(cat, out, sys);
    load_halo_catalog(out, sys);  // validates the Jacobi consistency of what was written
    std::fprintf(stderr, "wrote %zu states to %s\n", cat.size(), out.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
