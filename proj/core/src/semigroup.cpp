#include "mpfb/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mpfb/error.hpp"

namespace mpfb {

Mat3c curl_symbol(const Vec3& xi) {
  // B v = -i (xi x v)
  Mat3c B;
  const Cplx mi(0.0, -1.0);
  B << 0.0, -mi * xi[2], mi * xi[1],
       mi * xi[2], 0.0, -mi * xi[0],
       -mi * xi[1], mi * xi[0], 0.0;
  return B;
}

Mat3 longitudinal(const Vec3& xi) {
  const double s = xi.squaredNorm();
  if (s == 0.0) return Mat3::Zero();
  return xi * xi.transpose() / s;
}

namespace {

constexpr double kPlaneTol = 1e-6;
constexpr double kMaxCondition = 1e8;
constexpr double kReconstructionTol = 1e-8;

}  // namespace

double lambda_min(double s) noexcept {
  const double r = std::sqrt(1.0 + s);
  return s * (s + 1.0) / (s + 1.0 + r);
}

std::array<double, 4> distinct_eigenvalues(double s) noexcept {
  const double r = std::sqrt(1.0 + s);
  return {s, 2.0 * s + 2.0, lambda_min(s), s + 1.0 + r};
}

Mat6c explicit_q(const Vec3& xi) {
  const double x1 = xi[0], x2 = xi[1], x3 = xi[2];
  const double s = xi.squaredNorm();
  const double r = std::sqrt(s + 1.0);
  const double tp = r + 1.0, tm = r - 1.0;
  const Cplx I(0.0, 1.0);
  const double a = x1 * s;
  Mat6c Q;
  Q << x1 / x3, 0.0, -I * x3 * tp / s, I * x2 * tp / s, I * x3 * tm / s, -I * x2 * tm / s,
       x2 / x3, 0.0, -I * x2 * x3 * tp / a, -I * (x1 * x1 + x3 * x3) * tp / a,
           I * x2 * x3 * tm / a, I * (x1 * x1 + x3 * x3) * tm / a,
       1.0, 0.0, I * (x1 * x1 + x2 * x2) * tp / a, I * x2 * x3 * tp / a,
           -I * (x1 * x1 + x2 * x2) * tm / a, -I * x2 * x3 * tm / a,
       0.0, x1 / x3, -x2 / x1, -x3 / x1, -x2 / x1, -x3 / x1,
       0.0, x2 / x3, 1.0, 0.0, 1.0, 0.0,
       0.0, 1.0, 0.0, 1.0, 0.0, 1.0;
  return Q;
}

SymbolBundle build_symbol(const Vec3& xi) {
  const double norm = xi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::SingularFrequency, "symbol undefined at xi = 0");
  SymbolBundle b;
  b.xi = xi;
  b.s = xi.squaredNorm();
  b.B = curl_symbol(xi);
  b.C = xi * xi.transpose();
  const Mat3c I3 = Mat3c::Identity();

  b.A.setZero();
  b.A.topLeftCorner<3, 3>() = b.s * I3;
  b.A.topRightCorner<3, 3>() = b.B;
  b.A.bottomLeftCorner<3, 3>() = b.B;
  b.A.bottomRightCorner<3, 3>() = (b.s + 2.0) * I3 + b.C.cast<Cplx>();

  b.A1.setZero();
  b.A1.topLeftCorner<3, 3>() = b.s * I3;
  b.A1.bottomRightCorner<3, 3>() = b.s * I3 + b.C.cast<Cplx>();
  b.A2 = b.A - b.A1;

  const auto ev = distinct_eigenvalues(b.s);
  b.eigenvalues = {ev[0], ev[1], ev[2], ev[2], ev[3], ev[3]};
  const double r = std::sqrt(b.s + 1.0);
  b.xi_tilde_plus = r + 1.0;
  b.xi_tilde_minus = b.s / (r + 1.0);

  b.q_condition = kInf;
  if (std::min(std::abs(xi[0]), std::abs(xi[2])) >= kPlaneTol * norm) {
    b.Q = explicit_q(xi);
    Eigen::JacobiSVD<Mat6c> svd(b.Q);
    const auto& sv = svd.singularValues();
    b.q_condition = sv[5] > 0.0 ? sv[0] / sv[5] : kInf;
    if (b.q_condition <= kMaxCondition) {
      b.Q_inv = b.Q.partialPivLu().inverse();
      Eigen::Matrix<double, 6, 1> lam;
      for (int k = 0; k < 6; ++k) lam[k] = b.eigenvalues[k];
      const Mat6c recon = b.Q * lam.cast<Cplx>().asDiagonal() * b.Q_inv;
      const double rel = (recon - b.A).cwiseAbs().maxCoeff() / b.A.cwiseAbs().maxCoeff();
      if (rel <= kReconstructionTol) return b;
    }
  }

  // Orthonormal eigenbasis of the Hermitian A. Ascending order is
  // lambda_-, lambda_-, s, lambda_+, lambda_+, 2s+2; map onto the canonical slots.
  b.fallback = true;
  Eigen::SelfAdjointEigenSolver<Mat6c> es(b.A);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidMatrix, "Hermitian eigensolver failed");
  static constexpr int slot[6] = {2, 3, 0, 4, 5, 1};
  for (int k = 0; k < 6; ++k) b.Q.col(slot[k]) = es.eigenvectors().col(k);
  b.Q_inv = b.Q.adjoint();
  return b;
}

Mat6c semigroup_matrix(const SymbolBundle& b, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidTime, "semigroup needs t >= 0");
  Eigen::Matrix<Cplx, 6, 1> d;
  for (int k = 0; k < 6; ++k) d[k] = std::exp(-t * b.eigenvalues[k]);
  return b.Q * d.asDiagonal() * b.Q_inv;
}

Vec6c semigroup_apply(const SymbolBundle& b, double t, const Vec6c& v) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidTime, "semigroup needs t >= 0");
  Vec6c c = b.Q_inv * v;
  for (int k = 0; k < 6; ++k) c[k] *= std::exp(-t * b.eigenvalues[k]);
  return b.Q * c;
}

Mat3 r_block(const Vec3& xi, double t) {
  const double s = xi.squaredNorm();
  const Mat3 PL = longitudinal(xi);
  return std::exp(-t * s) * (Mat3::Identity() - PL) + std::exp(-2.0 * t * s) * PL;
}

std::pair<Mat6c, Mat6c> split_main_remainder(const SymbolBundle& b, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidTime, "split needs t >= 0");
  Mat6c Gm = Mat6c::Zero();
  Gm.topLeftCorner<3, 3>() = std::exp(-t * b.s) * Mat3c::Identity();
  Gm.bottomRightCorner<3, 3>() = r_block(b.xi, t).cast<Cplx>();
  Mat6c G = semigroup_matrix(b, t);
  return {Gm, G - Gm};
}

Mat6c matrix_exp_oracle(const Mat6c& M, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  if (!M.allFinite()) throw Error(ErrorCode::InvalidMatrix, "non-finite matrix entry");
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  double scaled = norm1;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  const Mat6c X = M / std::ldexp(1.0, squarings);
  Mat6c term = Mat6c::Identity();
  Mat6c sum = Mat6c::Identity();
  double bound = 1.0;
  for (int k = 1; k < 200; ++k) {
    term = term * X / static_cast<double>(k);
    sum += term;
    bound *= scaled / (k + 1);
    // Tail after term k is at most 2 * ||X||^{k+1}/(k+1)! since ||X|| <= 1/2.
    if (2.0 * bound <= tol) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

BlockFunction block_function(double s, const SpectralWeights& w) {
  const double r = std::sqrt(1.0 + s);
  const Cplx a = 0.5 * (w.g_minus + w.g_plus);
  const Cplx c = (w.g_plus - w.g_minus) / (2.0 * r);
  return {w.g_long_u, a - c, c, w.g_long_w, a + c};
}

Vec6c spectral_apply(const Vec3& xi, const SpectralWeights& w, const Vec6c& v) {
  const double s = xi.squaredNorm();
  const BlockFunction f = block_function(s, w);
  const Eigen::Matrix<Cplx, 3, 1> u = v.head<3>(), om = v.tail<3>();
  Eigen::Matrix<Cplx, 3, 1> uL = Eigen::Matrix<Cplx, 3, 1>::Zero(), wL = uL;
  if (s > 0.0) {
    uL = xi.cast<Cplx>() * (xi.cast<Cplx>().transpose() * u)(0) / s;
    wL = xi.cast<Cplx>() * (xi.cast<Cplx>().transpose() * om)(0) / s;
  }
  // Eigen's cross() conjugates complex results, so go through the matrix.
  const Mat3c B = curl_symbol(xi);
  const Eigen::Matrix<Cplx, 3, 1> Bu = B * u;
  const Eigen::Matrix<Cplx, 3, 1> Bw = B * om;
  Vec6c out;
  out.head<3>() = f.uu_long * uL + f.uu_trans * (u - uL) + f.coupling * Bw;
  out.tail<3>() = f.ww_long * wL + f.ww_trans * (om - wL) + f.coupling * Bu;
  return out;
}

Mat6c spectral_matrix(const Vec3& xi, const SpectralWeights& w) {
  const double s = xi.squaredNorm();
  const BlockFunction f = block_function(s, w);
  const Mat3 PL = longitudinal(xi);
  const Mat3 PT = Mat3::Identity() - PL;
  Mat6c G;
  G.topLeftCorner<3, 3>() = (f.uu_long * PL.cast<Cplx>() + f.uu_trans * PT.cast<Cplx>());
  G.topRightCorner<3, 3>() = f.coupling * curl_symbol(xi);
  G.bottomLeftCorner<3, 3>() = f.coupling * curl_symbol(xi);
  G.bottomRightCorner<3, 3>() = (f.ww_long * PL.cast<Cplx>() + f.ww_trans * PT.cast<Cplx>());
  return G;
}

}  // namespace mpfb
