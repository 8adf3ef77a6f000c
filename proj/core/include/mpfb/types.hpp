#pragma once

#include <complex>
#include <cstddef>
#include <limits>

#include <Eigen/Core>

namespace mpfb {

using Cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec6c = Eigen::Matrix<Cplx, 6, 1>;
using Mat3c = Eigen::Matrix<Cplx, 3, 3>;
using Mat6c = Eigen::Matrix<Cplx, 6, 6>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr Cplx kI{0.0, 1.0};

/// (2 pi)^{-3}: the constant in F[fg] = (2 pi)^{-3} (f^ * g^) and in
/// ||f||_inf = (2 pi)^{-3} ||f^||_1 for nonnegative f^.
inline constexpr double kInvTwoPiCubed = 1.0 / (8.0 * kPi * kPi * kPi);

/// Number of complex components of U = (u, omega).
inline constexpr int kComponents = 6;

}  // namespace mpfb
