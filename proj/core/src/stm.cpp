#include "lunarkd/stm.hpp"

#include <cmath>

#include "lunarkd/expm.hpp"
#include "lunarkd/ode.hpp"

namespace lunarkd {

StmStrategy StmStrategy::matrix_exponential(double step_tu, bool midpoint) {
  StmStrategy s;
  s.kind = StmKind::MatrixExponential;
  s.step = step_tu;
  s.midpoint = midpoint;
  return s;
}

StmStrategy StmStrategy::numerical_integration(double tol) {
  StmStrategy s;
  s.kind = StmKind::NumericalIntegration;
  s.tol = tol;
  return s;
}

StmStrategy StmStrategy::hcw(double mean_motion) {
  StmStrategy s;
  s.kind = StmKind::Hcw;
  s.mean_motion = mean_motion;
  return s;
}

StmStrategy StmStrategy::yamanaka_ankersen() {
  StmStrategy s;
  s.kind = StmKind::YamanakaAnkersen;
  return s;
}

void StmStrategy::validate() const {
  if (kind == StmKind::MatrixExponential && !(step > 0.0))
    throw ConfigError("strategy.step_s: must be positive");
  if (kind == StmKind::NumericalIntegration && !(tol > 0.0))
    throw ConfigError("strategy.tol: must be positive");
  if (kind == StmKind::Hcw && mean_motion < 0.0)
    throw ConfigError("strategy.mean_motion: must be non-negative");
}

std::string StmStrategy::tag() const {
  switch (kind) {
    case StmKind::MatrixExponential: return "matrix_exponential";
    case StmKind::NumericalIntegration: return "numerical_integration";
    case StmKind::Hcw: return "hcw";
    case StmKind::YamanakaAnkersen: return "ya";
  }
  return "unknown";
}

StmKind StmStrategy::kind_from_tag(const std::string& tag) {
  if (tag == "matrix_exponential" || tag == "me") return StmKind::MatrixExponential;
  if (tag == "numerical_integration" || tag == "ni") return StmKind::NumericalIntegration;
  if (tag == "hcw") return StmKind::Hcw;
  if (tag == "ya" || tag == "yamanaka_ankersen") return StmKind::YamanakaAnkersen;
  throw ConfigError("strategy.kind: unknown strategy '" + tag + "'");
}

Stm lti_stm(const PlantMatrix& a, double dt) {
  if (dt < 0.0) throw Error("lti_stm: negative time step");
  Stm s;
  s.phi = dt == 0.0 ? Mat6::Identity().eval() : expm(Mat6(a.a * dt));
  s.t_from = 0.0;
  s.t_to = dt;
  return s;
}

Stm chained_stm(const ChiefTrajectory& chief, double t, double t_f, double step, bool midpoint) {
  if (t > t_f) throw Error("chained_stm: t must not exceed t_f");
  if (!(step > 0.0)) throw Error("chained_stm: step must be positive");
  const Cr3bpSystem& sys = chief.system();
  Stm out;
  out.t_from = t;
  out.t_to = t_f;
  for (long k = 0;; ++k) {
    const double a = t + static_cast<double>(k) * step;
    if (a >= t_f) break;
    double b = t + static_cast<double>(k + 1) * step;
    if (b > t_f || t_f - b < 1e-9 * step) b = t_f;
    const double t_eval = midpoint ? 0.5 * (a + b) : a;
    const PlantMatrix plant = plant_matrix(chief.at(t_eval), sys);
    out.phi = expm(Mat6(plant.a * (b - a))) * out.phi;
    if (b == t_f) break;
  }
  return out;
}

namespace {

// Chief (6) followed by a column-major 6x6 matrix.
constexpr int kAugmented = 42;

}  // namespace

Stm integrated_stm(const SynodicState& chief_at_t, double t_f, const Cr3bpSystem& sys, double tol) {
  if (t_f < chief_at_t.t) throw Error("integrated_stm: t must not exceed t_f");
  Stm out;
  out.t_from = chief_at_t.t;
  out.t_to = t_f;
  if (t_f == chief_at_t.t) return out;
  Eigen::VectorXd y0(kAugmented);
  y0.head<6>() = chief_at_t.stacked();
  Eigen::Map<Mat6>(y0.data() + 6) = Mat6::Identity();
  Dopri5 ode(
      [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys);
        const PlantMatrix p = plant_matrix(st, sys);
        Eigen::Map<Mat6>(dy.data() + 6) = p.a * Eigen::Map<const Mat6>(y.data() + 6);
      },
      OdeOptions{tol, tol});
  const Eigen::VectorXd y = ode.integrate(chief_at_t.t, y0, t_f);
  out.phi = Eigen::Map<const Mat6>(y.data() + 6);
  return out;
}

}  // namespace lunarkd
