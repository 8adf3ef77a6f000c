#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "mpfb/error.hpp"
#include "mpfb/rng.hpp"
#include "mpfb/semigroup.hpp"

using namespace mpfb;

namespace {

Vec3 sample_xi(const CounterRng& rng, std::uint64_t k, double lo, double hi) {
  Vec3 d(rng.normal(8 * k), rng.normal(8 * k + 2), rng.normal(8 * k + 4));
  d.normalize();
  const double rho = std::exp(rng.uniform(8 * k + 6, std::log(lo), std::log(hi)));
  // Every tenth sample lies on a coordinate plane.
  if (k % 10 == 3) d[0] = 0.0;
  if (k % 10 == 7) d[2] = 0.0;
  return rho * d.normalized();
}

double rel_max(const Mat6c& a, const Mat6c& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST(Symbol, UnitAxisExample) {
  const SymbolBundle b = build_symbol(Vec3(0, 0, 1));
  Mat6c A = Mat6c::Zero();
  const Cplx I(0, 1);
  Mat3c B;
  B << 0, I, 0, -I, 0, 0, 0, 0, 0;
  A.topLeftCorner<3, 3>() = Mat3c::Identity();
  A.topRightCorner<3, 3>() = B;
  A.bottomLeftCorner<3, 3>() = B;
  A.bottomRightCorner<3, 3>() = Vec3(3, 3, 4).cast<Cplx>().asDiagonal();
  EXPECT_LT((b.A - A).cwiseAbs().maxCoeff(), 1e-15);
  std::array<double, 6> ev = b.eigenvalues;
  std::sort(ev.begin(), ev.end());
  const double r2 = std::sqrt(2.0);
  const std::array<double, 6> want{2 - r2, 2 - r2, 1, 2 + r2, 2 + r2, 4};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(ev[k], want[k], 1e-14);
  EXPECT_TRUE(b.fallback);  // xi1 = 0
  EXPECT_THROW(build_symbol(Vec3::Zero()), Error);
}

TEST(Symbol, AlgebraOverSeededSamples) {
  const CounterRng rng(2024);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-3, 1e3);
    const SymbolBundle b = build_symbol(xi);
    const double s = xi.squaredNorm();
    EXPECT_LE((b.A - b.A.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    const double tr = b.A.trace().real();
    EXPECT_NEAR(tr, 7 * s + 6, 1e-10 * (7 * s + 6));
    double sum = 0.0;
    for (double l : b.eigenvalues) sum += l;
    EXPECT_NEAR(sum, 7 * s + 6, 1e-10 * (7 * s + 6));
    EXPECT_LE((b.A1 * b.A2 - b.A2 * b.A1).cwiseAbs().maxCoeff() / b.A.cwiseAbs().maxCoeff(), 1e-10);
    // Oracle: dense Hermitian eigensolver.
    Eigen::SelfAdjointEigenSolver<Mat6c> es(b.A, Eigen::EigenvaluesOnly);
    std::array<double, 6> ev = b.eigenvalues;
    std::sort(ev.begin(), ev.end());
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(ev[i], es.eigenvalues()[i], 1e-8 * scale);
    EXPECT_GE(lambda_min(s), s / 2.0);
    if (!b.fallback) {
      Eigen::Matrix<Cplx, 6, 1> d;
      for (int i = 0; i < 6; ++i) d[i] = b.eigenvalues[i];
      EXPECT_LE(rel_max(b.Q * d.asDiagonal() * b.Q_inv, b.A), 1e-8);
    }
    if (xi[0] == 0.0 || xi[2] == 0.0) EXPECT_TRUE(b.fallback);
  }
}

TEST(Oracle, BasicCases) {
  EXPECT_LT((matrix_exp_oracle(Mat6c::Zero(), 1e-12) - Mat6c::Identity()).cwiseAbs().maxCoeff(), 1e-16);
  const Mat6c e = matrix_exp_oracle(-Mat6c::Identity(), 1e-12);
  EXPECT_LT((e - std::exp(-1.0) * Mat6c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  Mat6c bad = Mat6c::Zero();
  bad(2, 3) = std::nan("");
  EXPECT_THROW(matrix_exp_oracle(bad, 1e-12), Error);
  const SymbolBundle b = build_symbol(Vec3(1, 2, 2));
  EXPECT_FALSE(b.fallback);
  EXPECT_LE(rel_max(semigroup_matrix(b, 1.0), matrix_exp_oracle(-b.A, 1e-12)), 1e-8);
}

TEST(Semigroup, MatchesOracleAndComposes) {
  const CounterRng rng(77);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-2, 3.0);
    const double t = rng.uniform(8 * k + 7, 0.0, 10.0);
    const SymbolBundle b = build_symbol(xi);
    const Mat6c G = semigroup_matrix(b, t);
    EXPECT_LE(rel_max(G, matrix_exp_oracle(-t * b.A, 1e-12)), 1e-8) << xi.transpose() << " t=" << t;
    const double t2 = 0.37 * t;
    EXPECT_LE(rel_max(semigroup_matrix(b, t) * semigroup_matrix(b, t2), semigroup_matrix(b, t + t2)), 1e-8);
    // closed-form projector route agrees with the eigenbasis route
    const Mat6c P = spectral_matrix(xi, spectral_weights(b.s, [t](double l) { return Cplx(std::exp(-t * l)); }));
    EXPECT_LE(rel_max(P, G), 1e-8);
    Vec6c v;
    for (int c = 0; c < 6; ++c) v[c] = Cplx(rng.uniform(100 * k + c, -1, 1), rng.uniform(100 * k + 6 + c, -1, 1));
    const Vec6c Pv = spectral_apply(xi, spectral_weights(b.s, [t](double l) { return Cplx(std::exp(-t * l)); }), v);
    EXPECT_LE((Pv - G * v).norm(), 1e-8 * std::max(1.0, v.norm()));
  }
  const SymbolBundle b = build_symbol(Vec3(0, 0, 1));
  Vec6c v = Vec6c::Zero();
  v[0] = 1.0;
  EXPECT_LT((semigroup_apply(b, 0.0, v) - v).norm(), 1e-15);
  EXPECT_LE((semigroup_apply(b, 1.0, v) - matrix_exp_oracle(-b.A, 1e-12) * v).norm(), 1e-8);
  EXPECT_THROW(semigroup_apply(b, -1.0, v), Error);
}

TEST(Semigroup, EuclideanDecayIsSharp) {
  const CounterRng rng(5);
  for (std::uint64_t k = 0; k < 300; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-2, 30.0);
    const double t = rng.uniform(8 * k + 7, 0.0, 2.0);
    const SymbolBundle b = build_symbol(xi);
    const double rate = lambda_min(b.s);
    const Mat6c G = semigroup_matrix(b, t);
    Eigen::JacobiSVD<Mat6c> svd(G);
    EXPECT_NEAR(svd.singularValues()[0], std::exp(-t * rate), 1e-8 * std::exp(-t * rate));
  }
}

TEST(Split, MainPartAndRemainder) {
  const SymbolBundle b = build_symbol(Vec3(0, 0, 1));
  auto [Gm0, Gr0] = split_main_remainder(b, 0.0);
  EXPECT_LT((Gm0 - Mat6c::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(Gr0.cwiseAbs().maxCoeff(), 1e-14);
  // Entrywise R matrix as printed, xi1 = xi2 = 0.
  auto [Gm, Gr] = split_main_remainder(b, 1.0);
  const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  const Vec3 x(0, 0, 1);
  const double s = 1.0;
  Mat3 R;
  R << (x[0] * x[0] * e2 + x[1] * x[1] * e1 + x[2] * x[2] * e1) / s, (x[0] * x[1] * e2 - x[0] * x[1] * e1) / s,
      (x[0] * x[2] * e2 - x[0] * x[2] * e1) / s, (x[0] * x[1] * e2 - x[0] * x[1] * e1) / s,
      (x[0] * x[0] * e1 + x[1] * x[1] * e2 + x[2] * x[2] * e1) / s, (x[1] * x[2] * e2 - x[1] * x[2] * e1) / s,
      (x[0] * x[2] * e2 - x[0] * x[2] * e1) / s, (x[1] * x[2] * e2 - x[1] * x[2] * e1) / s,
      (x[0] * x[0] * e1 + x[1] * x[1] * e1 + x[2] * x[2] * e2) / s;
  EXPECT_LT((Gm.bottomRightCorner<3, 3>().real() - R).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((R - (e1 * (Mat3::Identity() - x * x.transpose()) + e2 * x * x.transpose())).cwiseAbs().maxCoeff(), 1e-15);

  const CounterRng rng(31);
  for (std::uint64_t k = 0; k < 300; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-2, 10.0);
    const double t = rng.uniform(8 * k + 7, 0.0, 3.0);
    const SymbolBundle bb = build_symbol(xi);
    auto [m, r] = split_main_remainder(bb, t);
    EXPECT_LE(rel_max(m, matrix_exp_oracle(-t * bb.A1, 1e-12)), 1e-8);
    EXPECT_LE(rel_max(m + r, semigroup_matrix(bb, t)), 1e-12);
  }
}
