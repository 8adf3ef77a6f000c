#pragma once

#include <array>
#include <utility>

#include "mpfb/types.hpp"

namespace mpfb {

/// Per-frequency matrices of the linearised system with kappa = mu = 1,
/// chi = nu = 1/2:
///   A = [[ |xi|^2 I, B ], [ B, (|xi|^2 + 2) I + C ]],  B v = -i xi x v,  C = xi xi^T.
struct SymbolBundle {
  Vec3 xi = Vec3::Zero();
  double s = 0.0;  // |xi|^2
  Mat3c B;
  Mat3 C;
  Mat6c A, A1, A2;
  /// Columns are eigenvectors for eigenvalues[k]; unnormalised on the explicit path.
  Mat6c Q, Q_inv;
  /// Ordered as |xi|^2, 2|xi|^2+2, lambda_-, lambda_-, lambda_+, lambda_+.
  std::array<double, 6> eigenvalues{};
  double xi_tilde_plus = 0.0;   // sqrt(|xi|^2+1) + 1
  double xi_tilde_minus = 0.0;  // sqrt(|xi|^2+1) - 1
  /// True when the explicit Q was rejected in favour of a numerical eigenbasis.
  bool fallback = false;
  /// 2-norm condition number of the explicit Q (inf when it was not formed).
  double q_condition = 0.0;
};

SymbolBundle build_symbol(const Vec3& xi);

/// B = -i [xi]_x, so B v = -i (xi x v).
Mat3c curl_symbol(const Vec3& xi);
/// xi xi^T / |xi|^2, zero at xi = 0.
Mat3 longitudinal(const Vec3& xi);

/// The explicit diagonaliser as printed; entries divide by xi1 and xi3.
Mat6c explicit_q(const Vec3& xi);

/// exp(-t A) v through the bundle's eigenbasis.
Vec6c semigroup_apply(const SymbolBundle& b, double t, const Vec6c& v);
Mat6c semigroup_matrix(const SymbolBundle& b, double t);

/// (G_m, G_r) with G_m = blockdiag(e^{-ts} I, R(xi,t)) and G_r = e^{-tA} - G_m.
std::pair<Mat6c, Mat6c> split_main_remainder(const SymbolBundle& b, double t);

/// R(xi,t) = e^{-ts}(I - xi xi^T/s) + e^{-2ts} xi xi^T/s, identity at xi = 0.
Mat3 r_block(const Vec3& xi, double t);

/// exp(M) by scaling and squaring a truncated Taylor series; the truncation
/// bound of the scaled series is kept below tol.
Mat6c matrix_exp_oracle(const Mat6c& M, double tol);

/// Smallest eigenvalue |xi|^2 + 1 - sqrt(|xi|^2+1), in a cancellation-free form.
double lambda_min(double s) noexcept;

/// Scalar function values on the four distinct eigenvalues of A(xi).
struct SpectralWeights {
  Cplx g_long_u;  // g(s)
  Cplx g_long_w;  // g(2s+2)
  Cplx g_minus;   // g(lambda_-)
  Cplx g_plus;    // g(lambda_+)
};

/// Eigenvalues s, 2s+2, lambda_-, lambda_+ for s = |xi|^2.
std::array<double, 4> distinct_eigenvalues(double s) noexcept;

template <class G>
SpectralWeights spectral_weights(double s, G&& g) {
  const auto ev = distinct_eigenvalues(s);
  return {g(ev[0]), g(ev[1]), g(ev[2]), g(ev[3])};
}

/// g(A(xi)) v by the closed-form spectral projectors of A (valid at xi = 0).
Vec6c spectral_apply(const Vec3& xi, const SpectralWeights& w, const Vec6c& v);
/// g(A(xi)) as a dense matrix.
Mat6c spectral_matrix(const Vec3& xi, const SpectralWeights& w);

/// Blocks of a matrix function g(A): uu = a P_L + b P_T, uw = wu = c B,
/// ww = d P_L + e P_T. Cheap representation for the quadrature kernels.
struct BlockFunction {
  Cplx uu_long, uu_trans, coupling, ww_long, ww_trans;
};
BlockFunction block_function(double s, const SpectralWeights& w);

}  // namespace mpfb
