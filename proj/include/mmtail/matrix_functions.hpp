#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "mmtail/error.hpp"

namespace mmtail {

inline constexpr double kDefaultExpAbscissaCap = 700.0;

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      using std::isfinite;
      const auto v = m(i, j);
      if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
        if (!isfinite(v.real()) || !isfinite(v.imag())) return false;
      } else {
        if (!isfinite(v)) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Maximal real part over the spectrum of a square matrix.
template <typename Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) return -std::numeric_limits<double>::infinity();
  if (!detail::all_finite(m)) return std::numeric_limits<double>::infinity();
  if (m.rows() == 1) return std::real(m(0, 0));
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m.eval(), false);
    return es.eigenvalues().real().maxCoeff();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m.eval(), false);
    return es.eigenvalues().real().maxCoeff();
  }
}

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant. Throws Error(Overflow) when the spectral abscissa of m
/// exceeds `abscissa_cap` or the input is not finite.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(
    const Eigen::MatrixBase<Derived>& m,
    double abscissa_cap = kDefaultExpAbscissaCap) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = m.rows();
  if (!detail::all_finite(m)) {
    throw Error(ErrorCode::Overflow, "matrix exponential of non-finite input");
  }
  if (const double tau = spectral_abscissa(m); tau > abscissa_cap) {
    throw Error(ErrorCode::Overflow,
                "matrix exponential overflow: spectral abscissa " +
                    std::to_string(tau) + " exceeds cap " +
                    std::to_string(abscissa_cap));
  }

  static constexpr double b[] = {64764752532480000.0,
                                 32382376266240000.0,
                                 7771770303897600.0,
                                 1187353796428800.0,
                                 129060195264000.0,
                                 10559470521600.0,
                                 670442572800.0,
                                 33522128640.0,
                                 1323241920.0,
                                 40840800.0,
                                 960960.0,
                                 16380.0,
                                 182.0,
                                 1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  }
  const Mat a = m / std::ldexp(1.0, squarings);

  const Mat ident = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const Mat u =
      a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const Mat v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  const Mat v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

  Mat result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  if (!detail::all_finite(result)) {
    throw Error(ErrorCode::Overflow, "matrix exponential overflowed");
  }
  return result;
}

/// exp(M) together with its directional derivative along D, read off the
/// exponential of the block matrix [[M, D], [0, M]].
template <typename DerivedM, typename DerivedD>
std::pair<Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, Eigen::Dynamic>,
          Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
expm_with_derivative(const Eigen::MatrixBase<DerivedM>& m,
                     const Eigen::MatrixBase<DerivedD>& d,
                     double abscissa_cap = kDefaultExpAbscissaCap) {
  using Scalar = typename DerivedM::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = m.rows();
  Mat block = Mat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = m;
  block.topRightCorner(n, n) = d;
  block.bottomRightCorner(n, n) = m;
  const Mat e = expm(block, abscissa_cap);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

}  // namespace mmtail
