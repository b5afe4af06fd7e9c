#include "lunarkd/nnls.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lunarkd/types.hpp"

namespace lunarkd {
namespace {

Eigen::VectorXd solve_passive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
  const Eigen::VectorXd sp = ap.colPivHouseholderQr().solve(b);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sp(static_cast<Eigen::Index>(k));
  return s;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter) {
  if (a.rows() != b.size()) throw SolverError("nnls: dimension mismatch");
  const Eigen::Index n = a.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);

  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max<double>(static_cast<double>(std::max(a.rows(), n)), 1.0) *
                     a.cwiseAbs().maxCoeff() * std::max(b.norm(), 1e-300);

  Eigen::VectorXd w = a.transpose() * (b - a * out.x);
  while (out.iterations < max_iter) {
    Eigen::Index jmax = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    }
    if (jmax < 0) break;
    passive[static_cast<std::size_t>(jmax)] = true;
    ++out.iterations;

    for (;;) {
      Eigen::VectorXd s = solve_passive(a, b, passive);
      bool all_positive = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) all_positive = false;
      }
      if (all_positive) {
        out.x = s;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          alpha = std::min(alpha, out.x(j) / (out.x(j) - s(j)));
        }
      }
      out.x += alpha * (s - out.x);
      const double xtol = 1e-14 * out.x.cwiseAbs().maxCoeff();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && out.x(j) <= xtol) {
          passive[static_cast<std::size_t>(j)] = false;
          out.x(j) = 0.0;
        }
      }
    }
    w = a.transpose() * (b - a * out.x);
  }
  out.residual_norm = (a * out.x - b).norm();
  return out;
}

}  // namespace lunarkd
