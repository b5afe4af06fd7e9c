#pragma once

#include <string>
#include <vector>

#include "lunarkd/chief_trajectory.hpp"
#include "lunarkd/relative_dynamics.hpp"

namespace lunarkd {

/// State transition matrix mapping a relative state at t_from to t_to.
struct Stm {
  Mat6 phi = Mat6::Identity();
  double t_from = 0.0;
  double t_to = 0.0;
};

enum class StmKind { MatrixExponential, NumericalIntegration, Hcw, YamanakaAnkersen };

/// How Phi(t, t_f) is produced. `step` is the LTI segment length (TU) of the
/// matrix-exponential chain, `tol` the integrator tolerance of the numerical
/// strategy. `mean_motion` overrides the HCW rate (0 derives it from the
/// chief's osculating orbit about the Moon).
struct StmStrategy {
  StmKind kind = StmKind::NumericalIntegration;
  double step = 0.0;
  double tol = 1e-12;
  bool midpoint = false;
  double mean_motion = 0.0;

  static StmStrategy matrix_exponential(double step_tu, bool midpoint = false);
  static StmStrategy numerical_integration(double tol = 1e-12);
  static StmStrategy hcw(double mean_motion = 0.0);
  static StmStrategy yamanaka_ankersen();

  void validate() const;
  /// Short identifier: "matrix_exponential", "numerical_integration", "hcw", "ya".
  std::string tag() const;
  static StmKind kind_from_tag(const std::string& tag);
};

/// Phi_LTI = exp(A dt).
Stm lti_stm(const PlantMatrix& a, double dt);

/// Product of LTI transition matrices over segments of length <= step that
/// start at t; each segment uses the plant at its start (or midpoint).
Stm chained_stm(const ChiefTrajectory& chief, double t, double t_f, double step,
                bool midpoint = false);

/// Integrates the chief jointly with dPhi/dt = A(t) Phi from Phi(t) = I.
/// `chief_at_t.t` is the start epoch.
Stm integrated_stm(const SynodicState& chief_at_t, double t_f, const Cr3bpSystem& sys,
                   double tol = 1e-12);

// ---------------------------------------------------------------------------
// Two-body baselines

/// Osculating Keplerian elements of the chief about the Moon. Only the
/// quantities the relative-motion STMs need are kept.
struct KeplerElements {
  double gm = 0.0;              // gravitational parameter (DU^3/TU^2)
  double a = 0.0;               // semi-major axis (DU)
  double e = 0.0;               // eccentricity
  double true_anomaly = 0.0;    // at epoch (rad)
  double epoch = 0.0;           // TU

  double mean_motion() const;
  double semi_latus_rectum() const { return a * (1.0 - e * e); }
  /// True anomaly at time t by Kepler's equation (tolerance 1e-12 rad).
  double true_anomaly_at(double t) const;
};

/// Osculating elements from the synodic state, using the Moon-centred inertial
/// velocity v + z x r and the Moon's gravitational parameter.
KeplerElements osculating_elements(const SynodicState& chief, const Cr3bpSystem& sys);

/// Clohessy-Wiltshire transition matrix in the LVLH axes used here
/// (x along-track, y anti-normal, z toward the central body).
Stm hcw_stm(double mean_motion, double dt);

/// Yamanaka-Ankersen transition matrix between two epochs. Throws for e >= 1.
Stm ya_stm(const KeplerElements& el, double t_from, double t_to);

// ---------------------------------------------------------------------------
// Control grid

/// Gamma(t) = Phi(t, t_f) B at one candidate maneuver time.
struct ControlMap {
  Mat63 gamma = Mat63::Zero();
  double t = 0.0;
};

/// Candidate maneuver times t_0 < ... < t_f with their control maps and the
/// free-drift transition matrix Phi(t_0, t_f).
struct ControlGrid {
  std::vector<double> times;
  std::vector<ControlMap> gammas;
  Stm phi0;
  std::string strategy_tag;
  double build_seconds = 0.0;

  std::size_t size() const { return times.size(); }
};

/// Uniform grid of n_steps + 1 candidate times over [chief.t0, chief.t1].
ControlGrid build_control_grid(const ChiefTrajectory& chief, const StmStrategy& strategy,
                               int n_steps);

/// Phi(t0 -> t_k) for increasing sample times t_k >= t0 (free-drift
/// propagation used by the error analysis).
std::vector<Mat6> propagation_stms(const ChiefTrajectory& chief, const StmStrategy& strategy,
                                   const std::vector<double>& sample_times);

/// Text cache of a control grid: a header line
///   n_times,t0,tf,strategy
/// followed by one line per time with t and the row-major 6x3 Gamma block.
/// The first data line is preceded by the 36 row-major entries of Phi(t0, tf).
void write_control_grid(const ControlGrid& grid, const std::string& path);
ControlGrid read_control_grid(const std::string& path);

}  // namespace lunarkd
