#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lunarkd {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state is too close to one of the primaries for the dynamics to be evaluated.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The chief's angular momentum vanishes and the LVLH frame is undefined.
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow, non-finite state or step budget exhausted.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// The dual program is unbounded: the target pseudostate cannot be produced by
/// impulses at the candidate times.
class InfeasibleTargetError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonConvergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Malformed input file or configuration. The message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Skew-symmetric cross-product matrix: skew(w) * v == w.cross(v).
inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

}  // namespace lunarkd
