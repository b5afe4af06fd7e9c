#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lunarkd/expm.hpp"
#include "lunarkd/ode.hpp"
#include "lunarkd/stm.hpp"

namespace lunarkd {
namespace {

std::vector<double> uniform_times(double t0, double tf, int n_steps) {
  std::vector<double> times(static_cast<std::size_t>(n_steps) + 1);
  const double dt = (tf - t0) / n_steps;
  for (int i = 0; i < n_steps; ++i) times[i] = t0 + i * dt;
  times.back() = tf;
  return times;
}

// Segment boundaries t0, t0 + step, ..., tf. A trailing sliver shorter than
// 1e-9 step is merged into the previous segment.
std::vector<double> segment_boundaries(double t0, double tf, double step) {
  std::vector<double> b{t0};
  for (long k = 1;; ++k) {
    const double t = t0 + static_cast<double>(k) * step;
    if (t >= tf || tf - t < 1e-9 * step) break;
    b.push_back(t);
  }
  b.push_back(tf);
  return b;
}

Mat6 segment_exp(const ChiefTrajectory& chief, double a, double b, bool midpoint) {
  if (b == a) return Mat6::Identity();
  const double t_eval = midpoint ? 0.5 * (a + b) : a;
  return expm(Mat6(plant_matrix(chief.at(t_eval), chief.system()).a * (b - a)));
}

// Phi(t_j, t_f) on a grid, LTI segments anchored at t0.
std::vector<Mat6> chained_grid(const ChiefTrajectory& chief, const std::vector<double>& times,
                               double step, bool midpoint) {
  const std::vector<double> bounds = segment_boundaries(chief.t0(), chief.t1(), step);
  const std::size_t nseg = bounds.size() - 1;
  // suffix[k] = Phi(bounds[k], tf)
  std::vector<Mat6> suffix(bounds.size(), Mat6::Identity());
  for (std::size_t k = nseg; k-- > 0;) {
    suffix[k] = suffix[k + 1] * segment_exp(chief, bounds[k], bounds[k + 1], midpoint);
  }
  std::vector<Mat6> out(times.size());
  std::size_t k = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    while (k + 1 < bounds.size() && bounds[k + 1] <= t) ++k;
    if (t == bounds[k]) {
      out[j] = suffix[k];
    } else {
      out[j] = suffix[k + 1] * segment_exp(chief, t, bounds[k + 1], midpoint);
    }
  }
  return out;
}

Eigen::VectorXd augmented_state(const SynodicState& chief) {
  Eigen::VectorXd y(42);
  y.head<6>() = chief.stacked();
  Eigen::Map<Mat6>(y.data() + 6) = Mat6::Identity();
  return y;
}

// Phi(t_j, t_f) for every grid time by one backward sweep of
//   d/dt Phi(t, t_f) = -Phi(t, t_f) A(t),   Phi(t_f, t_f) = I.
std::vector<Mat6> integrated_grid(const ChiefTrajectory& chief, const std::vector<double>& times,
                                  double tol) {
  const Cr3bpSystem& sys = chief.system();
  Dopri5 ode(
      [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const SynodicState st{y.head<3>(), y.segment<3>(3), t};
        dy.head<3>() = st.v;
        dy.segment<3>(3) = cr3bp_accel(st, sys);
        const PlantMatrix p = plant_matrix(st, sys);
        Eigen::Map<Mat6>(dy.data() + 6) = -Eigen::Map<const Mat6>(y.data() + 6) * p.a;
      },
      OdeOptions{tol, tol});
  std::vector<double> backward(times.rbegin(), times.rend());
  const auto states = ode.integrate_to_times(backward, augmented_state(chief.final()));
  std::vector<Mat6> out(times.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out[times.size() - 1 - i] = Eigen::Map<const Mat6>(states[i].data() + 6);
  }
  return out;
}

std::vector<Mat6> grid_stms(const ChiefTrajectory& chief, const StmStrategy& strategy,
                            const std::vector<double>& times) {
  const double tf = chief.t1();
  switch (strategy.kind) {
    case StmKind::MatrixExponential:
      return chained_grid(chief, times, strategy.step, strategy.midpoint);
    case StmKind::NumericalIntegration:
      return integrated_grid(chief, times, strategy.tol);
    case StmKind::Hcw: {
      const double n = strategy.mean_motion > 0.0
                           ? strategy.mean_motion
                           : osculating_elements(chief.initial(), chief.system()).mean_motion();
      std::vector<Mat6> out;
      out.reserve(times.size());
      for (double t : times) out.push_back(hcw_stm(n, tf - t).phi);
      return out;
    }
    case StmKind::YamanakaAnkersen: {
      const KeplerElements el = osculating_elements(chief.initial(), chief.system());
      std::vector<Mat6> out;
      out.reserve(times.size());
      for (double t : times) out.push_back(ya_stm(el, t, tf).phi);
      return out;
    }
  }
  throw Error("unknown STM strategy");
}

}  // namespace

ControlGrid build_control_grid(const ChiefTrajectory& chief, const StmStrategy& strategy,
                               int n_steps) {
  if (n_steps < 1) throw ConfigError("n_grid_steps: must be at least 1");
  strategy.validate();
  const auto start = std::chrono::steady_clock::now();
  ControlGrid grid;
  grid.strategy_tag = strategy.tag();
  grid.times = uniform_times(chief.t0(), chief.t1(), n_steps);
  const std::vector<Mat6> phis = grid_stms(chief, strategy, grid.times);
  const Mat63 b = control_matrix();
  grid.gammas.resize(grid.times.size());
  for (std::size_t j = 0; j < grid.times.size(); ++j) {
    grid.gammas[j].t = grid.times[j];
    grid.gammas[j].gamma = phis[j] * b;
  }
  grid.phi0.phi = phis.front();
  grid.phi0.t_from = chief.t0();
  grid.phi0.t_to = chief.t1();
  grid.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return grid;
}

std::vector<Mat6> propagation_stms(const ChiefTrajectory& chief, const StmStrategy& strategy,
                                   const std::vector<double>& sample_times) {
  strategy.validate();
  const double t0 = chief.t0();
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < t0 || sample_times[i] > chief.t1() ||
        (i > 0 && sample_times[i] < sample_times[i - 1]))
      throw Error("propagation_stms: sample times must be increasing within the chief span");
  }
  std::vector<Mat6> out;
  out.reserve(sample_times.size());
  switch (strategy.kind) {
    case StmKind::MatrixExponential: {
      const std::vector<double> bounds = segment_boundaries(t0, chief.t1(), strategy.step);
      Mat6 prefix = Mat6::Identity();  // Phi(t0, bounds[k])
      std::size_t k = 0;
      for (double t : sample_times) {
        while (k + 1 < bounds.size() && bounds[k + 1] <= t) {
          prefix = segment_exp(chief, bounds[k], bounds[k + 1], strategy.midpoint) * prefix;
          ++k;
        }
        out.push_back(t == bounds[k] ? prefix
                                     : Mat6(segment_exp(chief, bounds[k], t, strategy.midpoint) * prefix));
      }
      return out;
    }
    case StmKind::NumericalIntegration: {
      const Cr3bpSystem& sys = chief.system();
      Dopri5 ode(
          [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
            const SynodicState st{y.head<3>(), y.segment<3>(3), t};
            dy.head<3>() = st.v;
            dy.segment<3>(3) = cr3bp_accel(st, sys);
            const PlantMatrix p = plant_matrix(st, sys);
            Eigen::Map<Mat6>(dy.data() + 6) = p.a * Eigen::Map<const Mat6>(y.data() + 6);
          },
          OdeOptions{strategy.tol, strategy.tol});
      std::vector<double> times{t0};
      times.insert(times.end(), sample_times.begin(), sample_times.end());
      const auto states = ode.integrate_to_times(times, augmented_state(chief.initial()));
      for (std::size_t i = 1; i < states.size(); ++i)
        out.push_back(Eigen::Map<const Mat6>(states[i].data() + 6));
      return out;
    }
    case StmKind::Hcw: {
      const double n = strategy.mean_motion > 0.0
                           ? strategy.mean_motion
                           : osculating_elements(chief.initial(), chief.system()).mean_motion();
      for (double t : sample_times) out.push_back(hcw_stm(n, t - t0).phi);
      return out;
    }
    case StmKind::YamanakaAnkersen: {
      const KeplerElements el = osculating_elements(chief.initial(), chief.system());
      for (double t : sample_times) out.push_back(ya_stm(el, t0, t).phi);
      return out;
    }
  }
  throw Error("unknown STM strategy");
}

void write_control_grid(const ControlGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write control grid to '" + path + "'");
  out << std::setprecision(17);
  out << grid.times.size() << ',' << grid.times.front() << ',' << grid.times.back() << ','
      << grid.strategy_tag << '\n';
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) out << grid.phi0.phi(r, c) << (r == 5 && c == 5 ? '\n' : ',');
  for (const ControlMap& m : grid.gammas) {
    out << m.t;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 3; ++c) out << ',' << m.gamma(r, c);
    out << '\n';
  }
}

ControlGrid read_control_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read control grid '" + path + "'");
  auto fields = [](const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    return f;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error("control grid: empty file");
  const auto header = fields(line);
  if (header.size() != 4) throw Error("control grid: malformed header");
  const std::size_t n = std::stoul(header[0]);
  ControlGrid grid;
  grid.strategy_tag = header[3];
  if (!std::getline(in, line)) throw Error("control grid: missing Phi(t0, tf)");
  const auto phi = fields(line);
  if (phi.size() != 36) throw Error("control grid: Phi(t0, tf) needs 36 entries");
  for (int i = 0; i < 36; ++i) grid.phi0.phi(i / 6, i % 6) = std::stod(phi[i]);
  grid.phi0.t_from = std::stod(header[1]);
  grid.phi0.t_to = std::stod(header[2]);
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::getline(in, line)) throw Error("control grid: truncated at row " + std::to_string(j + 3));
    const auto row = fields(line);
    if (row.size() != 19) throw Error("control grid: row " + std::to_string(j + 3) + " needs 19 fields");
    ControlMap m;
    m.t = std::stod(row[0]);
    for (int i = 0; i < 18; ++i) m.gamma(i / 3, i % 3) = std::stod(row[1 + i]);
    grid.times.push_back(m.t);
    grid.gammas.push_back(m);
  }
  return grid;
}

}  // namespace lunarkd
