#pragma once

#include "lunarkd/types.hpp"

namespace lunarkd {

/// Matrix exponential by scaling and squaring with diagonal Pade approximants
/// of order 3, 5, 7, 9 or 13 chosen from the 1-norm (Higham 2005).
/// Throws Error if the result overflows.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

Mat6 expm(const Mat6& a);

}  // namespace lunarkd
