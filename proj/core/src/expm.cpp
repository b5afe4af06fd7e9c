#include "lunarkd/expm.hpp"

#include <array>
#include <cmath>

namespace lunarkd {
namespace {

template <typename M>
M pade_ratio(const M& u, const M& v) {
  return (v - u).partialPivLu().solve(v + u);
}

template <typename M>
M pade_low(const M& a, const double* b, int m) {
  const Eigen::Index n = a.rows();
  const M eye = M::Identity(n, n);
  const M a2 = a * a;
  M pow = eye;
  M u_inner = b[1] * eye;
  M v = b[0] * eye;
  for (int k = 2; k <= m; k += 2) {
    pow = pow * a2;
    v += b[k] * pow;
    u_inner += b[k + 1] * pow;
  }
  return pade_ratio<M>(a * u_inner, v);
}

template <typename M>
M pade13(const M& a) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  const Eigen::Index n = a.rows();
  const M eye = M::Identity(n, n);
  const M a2 = a * a;
  const M a4 = a2 * a2;
  const M a6 = a4 * a2;
  const M u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                   b[3] * a2 + b[1] * eye);
  const M v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
              b[0] * eye;
  return pade_ratio<M>(u, v);
}

template <typename M>
M expm_impl(const M& a) {
  static constexpr double b3[] = {120.0, 60.0, 12.0, 1.0};
  static constexpr double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                  25200.0,    1512.0,    56.0,      1.0};
  static constexpr double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                  30270240.0,    2162160.0,    110880.0,     3960.0,
                                  90.0,          1.0};
  static constexpr double theta3 = 1.495585217958292e-2;
  static constexpr double theta5 = 2.539398330063230e-1;
  static constexpr double theta7 = 9.504178996162932e-1;
  static constexpr double theta9 = 2.097847961257068e0;
  static constexpr double theta13 = 5.371920351148152e0;

  if (!a.allFinite()) throw Error("matrix exponential of a non-finite matrix");
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  M result;
  if (norm <= theta3) {
    result = pade_low<M>(a, b3, 3);
  } else if (norm <= theta5) {
    result = pade_low<M>(a, b5, 5);
  } else if (norm <= theta7) {
    result = pade_low<M>(a, b7, 7);
  } else if (norm <= theta9) {
    result = pade_low<M>(a, b9, 9);
  } else {
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    result = pade13<M>(a * std::ldexp(1.0, -s));
    for (int i = 0; i < s; ++i) result = result * result;
  }
  if (!result.allFinite()) throw Error("matrix exponential overflow");
  return result;
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error("matrix exponential of a non-square matrix");
  return expm_impl<Eigen::MatrixXd>(a);
}

Mat6 expm(const Mat6& a) { return expm_impl<Mat6>(a); }

}  // namespace lunarkd
