#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mpfb/error.hpp"
#include "mpfb/field_io.hpp"
#include "mpfb/littlewood_paley.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/rng.hpp"

using namespace mpfb;

namespace {

Vec3 random_direction(const CounterRng& rng, std::uint64_t k) {
  Vec3 v(rng.normal(6 * k), rng.normal(6 * k + 2), rng.normal(6 * k + 4));
  return v.normalized();
}

// Scalar indicator of a cube, carried in component 0.
SpectralField cube_indicator(const Vec3& center, double half, int order, double value = 1.0) {
  SpectralField f = SpectralField::on_cubes({Box::cube(center, half)}, order);
  f.fill([value](const Vec3&) {
    Vec6c v = Vec6c::Zero();
    v[0] = value;
    return v;
  });
  return f;
}

// Independent oracle: composite midpoint rule on a fine subdivision.
double midpoint_fb(const Box& box, double value, int cells, double s) {
  const Vec3 d = (box.hi - box.lo) / cells;
  double total = 0.0;
  for (int a = 0; a < cells; ++a)
    for (int b = 0; b < cells; ++b)
      for (int c = 0; c < cells; ++c) {
        const Vec3 x = box.lo + Vec3((a + 0.5) * d[0], (b + 0.5) * d[1], (c + 0.5) * d[2]);
        double w = 0.0;
        for (int j = -10; j <= 20; ++j) w += std::pow(2.0, j * s) * DyadicPartition::psi_j(j, x.norm());
        total += w * value;
      }
  return total * d.prod();
}

}  // namespace

TEST(Partition, RejectsEmptyRange) {
  EXPECT_THROW(make_partition(3, 3), Error);
  try {
    make_partition(5, 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRange);
  }
}

TEST(Partition, ProfileAndSupports) {
  EXPECT_EQ(DyadicPartition::theta(0.5), 1.0);
  EXPECT_EQ(DyadicPartition::theta(0.75), 1.0);
  EXPECT_EQ(DyadicPartition::theta(4.0 / 3.0), 0.0);
  EXPECT_EQ(DyadicPartition::psi_j(5, 32.0 * 3.0), 0.0);
  const CounterRng rng(11);
  for (int k = 0; k < 10000; ++k) {
    const double rho = std::exp(rng.uniform(k, std::log(1e-3), std::log(1e4)));
    for (int j = -12; j <= 16; ++j) {
      const double v = DyadicPartition::psi_j(j, rho);
      const double x = std::ldexp(rho, -j);
      if (x < 0.75 || x > 8.0 / 3.0) EXPECT_EQ(v, 0.0);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_EQ(v * DyadicPartition::psi_j(j + 2, rho), 0.0);
    }
  }
}

TEST(Partition, TelescopingUnity) {
  const DyadicPartition part = make_partition(-4, 10);
  EXPECT_NEAR(part.band_sum(1.0), 1.0, 1e-10);
  const auto [lo, hi] = part.resolved_band();
  const CounterRng rng(12);
  for (int k = 0; k < 100000; ++k) {
    const double rho = std::exp(rng.uniform(k, std::log(lo), std::log(hi)));
    double direct = 0.0;
    for (int j = part.j_min(); j <= part.j_max(); ++j) direct += DyadicPartition::psi_j(j, rho);
    ASSERT_NEAR(direct, 1.0, 1e-10) << rho;
    // phi + sum_{j >= 0} psi_j = 1 everywhere
    double full = DyadicPartition::phi(rho);
    for (int j = 0; j <= 40; ++j) full += DyadicPartition::psi_j(j, rho);
    ASSERT_NEAR(full, 1.0, 1e-10);
  }
}

TEST(ApplyBlock, SupportAndSquare) {
  const DyadicPartition part = make_partition(0, 10);
  const SpectralField f = cube_indicator(Vec3(0, 32, 0), 1.0, 4);
  EXPECT_GT(apply_block(f, 5, part).max_abs(), 0.0);
  EXPECT_EQ(apply_block(f, 8, part).max_abs(), 0.0);
  EXPECT_THROW(apply_block(f, 11, part), Error);
  const SpectralField g = apply_block(apply_block(f, 5, part), 5, part);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = DyadicPartition::psi_j(5, g.frequency(i).norm());
    EXPECT_NEAR(g.component(0)[i].real(), w * w, 1e-15);
  }
}

TEST(FbNorm, CubeIndicatorAgainstMidpointOracle) {
  const DyadicPartition part = make_partition(-2, 12);
  const SpectralField f = cube_indicator(Vec3(0, 32, 0), 1.0, 8);
  const double v = fb_norm(f, -1.0, 1.0, 1.0, part);
  EXPECT_GE(v, 0.25);
  EXPECT_LE(v, 0.5);
  const double oracle = midpoint_fb(Box::cube(Vec3(0, 32, 0), 1.0), 1.0, 60, -1.0);
  EXPECT_NEAR(v, oracle, 1e-5 * oracle);
  SpectralField z = f;
  z.set_zero();
  EXPECT_EQ(fb_norm(z, -1.0, 1.0, 1.0, part), 0.0);
  EXPECT_THROW(fb_norm(f, -1.0, 0.5, 1.0, part), Error);
}

TEST(FbNorm, DyadicDilationScaling) {
  const DyadicPartition part = make_partition(-4, 16);
  const auto field_at = [](int k) {
    const double c = std::ldexp(1.0, k);
    SpectralField f = SpectralField::on_cubes({Box::cube(Vec3(0.3 * c, 20.0 * c, 0), c)}, 8);
    f.fill([c](const Vec3& xi) {
      const Vec3 eta = xi / c;
      Vec6c v = Vec6c::Zero();
      v[0] = std::cos(eta[0]) * (1.0 + 0.1 * eta[1]) / (c * c * c);
      v[4] = Cplx(0.0, eta[2]) / (c * c * c);
      return v;
    });
    return f;
  };
  const double base = fb_norm(field_at(0), -1.0, 1.0, 2.0, part);
  for (int k = 1; k <= 3; ++k) {
    const double v = fb_norm(field_at(k), -1.0, 1.0, 2.0, part);
    EXPECT_NEAR(v / base, std::ldexp(1.0, -k), 1e-6 * std::ldexp(1.0, -k));
  }
}

TEST(FbNorm, HomogeneityTriangleMonotonicity) {
  const LatticeGrid g = LatticeGrid::from_extent({16, 16, 16}, Vec3::Constant(8.0));
  const DyadicPartition part = partition_covering(g);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SpectralField f = random_solenoidal_field(g, seed, 0.5, 7.0, 1.0);
    const SpectralField h = random_solenoidal_field(g, seed + 100, 1.0, 5.0, 2.0);
    SpectralField sum = f;
    sum.axpy(1.0, h);
    SpectralField scaled = f;
    scaled.scale(Cplx(0.0, -2.5));
    for (double r : {1.0, 2.0, 4.0, kInf}) {
      const double nf = fb_norm(f, -1.0, 1.0, r, part);
      EXPECT_NEAR(fb_norm(scaled, -1.0, 1.0, r, part), 2.5 * nf, 1e-12 * nf);
      EXPECT_LE(fb_norm(sum, -1.0, 1.0, r, part),
                nf + fb_norm(h, -1.0, 1.0, r, part) + 1e-12);
    }
    double prev = kInf;
    for (double r : {1.0, 1.5, 2.0, 3.0, 8.0, kInf}) {
      const double v = fb_norm(f, 0.5, 1.0, r, part);
      EXPECT_LE(v, prev * (1 + 1e-14));
      prev = v;
    }
  }
}

TEST(BesovNorm, SingleAnnulusNonnegativeAndEmbedding) {
  const LatticeGrid g = LatticeGrid::from_extent({32, 32, 32}, Vec3::Constant(8.0));
  const DyadicPartition part = partition_covering(g);
  // Nonnegative f^ in one annulus: the sup of the block sits at x = 0.
  SpectralField f = SpectralField::on_lattice(g);
  f.fill([](const Vec3& xi) {
    Vec6c v = Vec6c::Zero();
    const double r = xi.norm();
    v[0] = (r > 2.0 && r < 3.5) ? std::exp(-(r - 2.7) * (r - 2.7)) : 0.0;
    return v;
  });
  const int j0 = 1;
  SpectralField blk = apply_block(f, j0, part);
  double l1 = 0.0;
  for (std::size_t i = 0; i < blk.size(); ++i) l1 += blk.weight(i) * std::abs(blk.component(0)[i]);
  DyadicPartition one(j0, j0 + 1);
  const double b = besov_norm(f, 0.0, kInf, kInf, one);
  EXPECT_NEAR(b, kInvTwoPiCubed * l1, 1e-12 * l1);

  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SpectralField h = random_solenoidal_field(g, seed, 0.3, 7.5, 1.0);
    for (double r : {2.0, kInf}) {
      EXPECT_LE(besov_norm(h, -1.0, kInf, r, part), kInvTwoPiCubed * fb_norm(h, -1.0, 1.0, r, part) + 1e-8);
    }
  }
  EXPECT_THROW(besov_norm(SpectralField::on_cubes({Box::cube(Vec3(0, 4, 0), 1)}, 2), -1, kInf, 2, part), Error);
}

TEST(CheminLerner, ConstantAndHeatDecay) {
  const DyadicPartition part = make_partition(-2, 8);
  const SpectralField g = cube_indicator(Vec3(0, 6, 0), 0.5, 6, 2.0);
  const double base = fb_norm(g, -1.0, 1.0, 2.0, part);
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.1 * k);
  std::vector<SpectralField> states(times.size(), g);
  const auto w = trapezoid_weights(times);
  EXPECT_NEAR(chemin_lerner_norm(states, times, w, kInf, -1, 1, 2, 2.0, part), base, 1e-14 * base);
  EXPECT_NEAR(chemin_lerner_norm(states, times, w, 1.0, -1, 1, 2, 2.0, part), 2.0 * base, 1e-12 * base);
  EXPECT_THROW(chemin_lerner_norm({g}, {0.0}, {1.0}, 1.0, -1, 1, 2, 1.0, part), Error);

  // Heat decayed field on a fine time grid vs the closed-form time integral.
  const double lambda = 2.0, T = 0.05;
  std::vector<double> ts;
  std::vector<SpectralField> heat;
  const int M = 4000;
  for (int k = 0; k <= M; ++k) {
    const double t = T * k / M;
    ts.push_back(t);
    SpectralField s = g;
    s.multiply([t](const Vec3& xi) { return std::exp(-t * xi.squaredNorm()); });
    heat.push_back(std::move(s));
  }
  const double v = chemin_lerner_norm(heat, ts, trapezoid_weights(ts), lambda, -1, 1, 1, T, part);
  // Oracle: block norms from the closed form of int_0^T e^{-lambda t |xi|^2} per node.
  const auto nodes = tensor_gauss(Box::cube(Vec3(0, 6, 0), 0.5), 6);
  double oracle = 0.0;
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    // || psi_j f^(t) ||_{L1} as a function of t, then its L^lambda norm by Simpson.
    auto block = [&](double t) {
      double s = 0.0;
      for (const Node3& nd : nodes)
        s += nd.w * 2.0 * DyadicPartition::psi_j(j, nd.x.norm()) * std::exp(-t * nd.x.squaredNorm());
      return s;
    };
    const int S = 2000;
    double acc = 0.0;
    for (int k = 0; k <= S; ++k) {
      const double wk = (k == 0 || k == S) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      acc += wk * std::pow(block(T * k / S), lambda);
    }
    acc *= T / S / 3.0;
    oracle += std::pow(2.0, -j) * std::pow(acc, 1.0 / lambda);
  }
  EXPECT_NEAR(v, oracle, 1e-6 * oracle);
}

TEST(ProductLaw, UndefinedForZeroAndFiniteOtherwise) {
  const LatticeGrid g = LatticeGrid::from_extent({16, 16, 16}, Vec3::Constant(8.0));
  const DyadicPartition part = partition_covering(g);
  const std::vector<double> times{0.0, 0.05, 0.1};
  std::vector<SpectralField> z(3, SpectralField::on_lattice(g));
  EXPECT_THROW(product_law_ratio(z, z, times, 0.5, 2.0, 0.1, part), Error);
  const SpectralField f = random_solenoidal_field(g, 3, 1.0, 3.0, 1.0);
  std::vector<SpectralField> tr;
  for (double t : times) tr.push_back(linear_propagate(f, t));
  const double r = product_law_ratio(tr, tr, times, 0.5, 2.0, 0.1, part);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_GT(r, 0.0);
}

TEST(FieldIo, RoundTripIsExact) {
  const LatticeGrid g = LatticeGrid::from_extent({8, 8, 8}, Vec3::Constant(4.0));
  const SpectralField f = random_solenoidal_field(g, 9, 0.5, 3.5, 1.0);
  std::stringstream ss;
  write_field(ss, f);
  const SpectralField back = read_field(ss);
  ASSERT_TRUE(back.same_layout(f));
  EXPECT_TRUE(back.real_valued);
  for (int c = 0; c < kComponents; ++c) EXPECT_EQ(back.component(c), f.component(c));

  SpectralField cf = cube_indicator(Vec3(0, 4, 0), 1.0, 3, 0.25);
  std::stringstream cs;
  write_field(cs, cf);
  const SpectralField cb = read_field(cs);
  ASSERT_TRUE(cb.same_layout(cf));
  EXPECT_EQ(cb.component(0), cf.component(0));
}
