#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace lunarkd {

/// Step-size control for the Dormand-Prince 5(4) pair.
struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects an automatic first step
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 5'000'000;
};

/// One accepted step together with the coefficients of the Dormand-Prince
/// continuous extension (fourth-order dense output).
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Eigen::VectorXd c1, c2, c3, c4, c5;

  Eigen::VectorXd eval(double t) const;
};

/// Embedded explicit Runge-Kutta 5(4) integrator of Dormand and Prince with
/// the standard PI-free error control used by Hairer's DOPRI5.
class Dopri5 {
 public:
  using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
  using StepObserver = std::function<void(const DenseStep&)>;

  Dopri5(Rhs rhs, OdeOptions opts = {});

  /// Integrates y from t0 to t1 (either direction); returns y(t1). If an
  /// observer is installed it receives every accepted step.
  Eigen::VectorXd integrate(double t0, const Eigen::VectorXd& y0, double t1,
                            const StepObserver& observer = {});

  /// Integrates across an ordered list of output times and hits each one
  /// exactly; `out[i]` receives y(times[i]). times.front() is the start.
  std::vector<Eigen::VectorXd> integrate_to_times(const std::vector<double>& times,
                                                  const Eigen::VectorXd& y0);

  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }
  /// Last accepted step size, reused as the first guess of the next call.
  double last_step() const { return last_h_; }

 private:
  double initial_step(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                      double dir) const;

  Rhs rhs_;
  OdeOptions opts_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  double last_h_ = 0.0;
};

}  // namespace lunarkd
