#include <cmath>

#include <gtest/gtest.h>

#include "mpfb/error.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/semigroup.hpp"

using namespace mpfb;

namespace {

SolverConfig small_config(int n = 16, double half = 8.0) {
  SolverConfig c;
  c.points = {n, n, n};
  c.half_extent = Vec3::Constant(half);
  c.dt = 1.0 / 32.0;
  c.T = 0.25;
  return c;
}

// Dense O(n^2) convolution oracle for P~div(U1 (x)~ U2) on the kept modes.
SpectralField dense_flux(const SpectralField& U1, const SpectralField& U2, double fraction) {
  const LatticeGrid& g = U1.lattice();
  SpectralField out = SpectralField::on_lattice(g);
  auto kept = [&](const std::array<int, 3>& m) {
    for (int a = 0; a < 3; ++a)
      if (std::abs(m[a]) > fraction * (g.n[a] / 2)) return false;
    return true;
  };
  const double c = kInvTwoPiCubed * g.cell_volume();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto m = g.modes(i);
    if (!kept(m)) continue;
    const Vec3 xi = g.frequency(i);
    Vec6c acc = Vec6c::Zero();
    for (std::size_t e = 0; e < g.size(); ++e) {
      const auto me = g.modes(e);
      if (!kept(me)) continue;
      const std::array<int, 3> md{m[0] - me[0], m[1] - me[1], m[2] - me[2]};
      bool inside = kept(md);
      for (int a = 0; a < 3; ++a) inside = inside && md[a] >= -g.n[a] / 2 && md[a] < g.n[a] / 2;
      if (!inside) continue;
      const std::size_t d = g.index(md[0], md[1], md[2]);
      const Vec6c a = U1.value(e), b = U2.value(d);
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          acc[l] += Cplx(0, xi[k]) * c * a[k] * b[l];
          acc[3 + l] += Cplx(0, xi[k]) * c * a[k] * b[3 + l];
        }
    }
    out.set_value(i, acc);
  }
  return leray_project(out);
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  SpectralField d = a;
  d.axpy(-1.0, b);
  return d.max_abs();
}

}  // namespace

TEST(Leray, Examples) {
  SpectralField f = SpectralField::on_cubes({Box::cube(Vec3(1, 2, 2), 0.1)}, 1);
  Vec6c v = Vec6c::Zero();
  v[0] = 1.0;
  f.set_value(0, v);
  const SpectralField p = leray_project(f);
  EXPECT_NEAR(p.component(0)[0].real(), 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(p.component(1)[0].real(), -2.0 / 9.0, 1e-15);
  EXPECT_NEAR(p.component(2)[0].real(), -2.0 / 9.0, 1e-15);
  v.head<3>() = Vec3(1, 2, 2).cast<Cplx>();
  v[4] = 3.0;
  f.set_value(0, v);
  const SpectralField q = leray_project(f);
  EXPECT_LT(q.value(0).head<3>().norm(), 1e-15);
  EXPECT_EQ(q.component(4)[0], Cplx(3.0));
  v.head<3>() = Vec3(2, -1, 0).cast<Cplx>();
  f.set_value(0, v);
  EXPECT_LT((leray_project(f).value(0) - v).norm(), 1e-15);
}

TEST(Flux, MatchesDenseConvolutionAndIsBilinear) {
  const SolverConfig cfg = small_config(12, 6.0);
  const LatticeGrid g = cfg.grid();
  SpectralField zero = SpectralField::on_lattice(g);
  EXPECT_EQ(nonlinear_flux(zero, cfg).max_abs(), 0.0);

  // Plane-wave pair: one mode at +k and its conjugate.
  SpectralField pw = SpectralField::on_lattice(g);
  const std::size_t ip = g.index(1, 0, 0), im = g.index(-1, 0, 0);
  Vec6c a = Vec6c::Zero();
  a[1] = Cplx(0.3, 0.7);
  a[5] = Cplx(-0.2, 0.1);
  pw.set_value(ip, a);
  pw.set_value(im, a.conjugate());
  pw.real_valued = true;
  EXPECT_LT(max_diff(nonlinear_flux(pw, cfg), dense_flux(pw, pw, cfg.dealias_fraction)), 1e-12);

  const SpectralField U1 = random_solenoidal_field(g, 1, 0.5, 2.2, 1.0);
  const SpectralField U2 = random_solenoidal_field(g, 2, 0.5, 2.2, 1.0);
  const SpectralField F1 = nonlinear_flux(U1, cfg);
  EXPECT_LT(max_diff(F1, dense_flux(U1, U1, cfg.dealias_fraction)), 1e-12 * std::max(1.0, F1.max_abs()));
  SpectralField sum = U1;
  sum.axpy(1.0, U2);
  SpectralField cross = nonlinear_flux(sum, cfg);
  cross.axpy(-1.0, F1);
  cross.axpy(-1.0, nonlinear_flux(U2, cfg));
  SpectralField oracle = dense_flux(U1, U2, cfg.dealias_fraction);
  oracle.axpy(1.0, dense_flux(U2, U1, cfg.dealias_fraction));
  EXPECT_LT(max_diff(cross, oracle), 1e-12 * std::max(1.0, oracle.max_abs()));
  EXPECT_LT(max_diff(bilinear_flux(U1, U2, cfg), dense_flux(U1, U2, cfg.dealias_fraction)), 1e-12);
  EXPECT_LT(F1.divergence_residual(), 1e-10);
  EXPECT_LT(F1.hermitian_residual(), 1e-12);
  EXPECT_THROW(nonlinear_flux(SpectralField::on_cubes({Box::cube(Vec3(0, 4, 0), 1)}, 2), cfg), Error);
}

TEST(Duhamel, LinearStepIsExactSemigroup) {
  SolverConfig cfg = small_config();
  const SpectralField U = random_solenoidal_field(cfg.grid(), 4, 0.5, 6.0, 1.0);
  cfg.nonlinear = false;
  const SpectralField V = duhamel_step(U, 0.0, cfg.dt, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    const Vec3 xi = U.frequency(i);
    if (xi.norm() == 0.0) continue;
    const Vec6c ref = semigroup_apply(build_symbol(xi), cfg.dt, U.value(i));
    worst = std::max(worst, (V.value(i) - ref).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_THROW(duhamel_step(U, 0.0, 2 * cfg.dt, cfg), Error);
}

TEST(SolveMild, ZeroLinearAndInvariants) {
  SolverConfig cfg = small_config();
  const LatticeGrid g = cfg.grid();
  const Trajectory z = solve_mild(SpectralField::on_lattice(g), cfg);
  for (const auto& s : z.states) EXPECT_EQ(s.max_abs(), 0.0);

  const SpectralField U0 = random_solenoidal_field(g, 5, 1.0, 6.0, 1.0);
  cfg.nonlinear = false;
  const Trajectory lin = solve_mild(U0, cfg);
  for (std::size_t k = 0; k < lin.times.size(); ++k)
    EXPECT_LT(max_diff(lin.states[k], linear_propagate(U0, lin.times[k])), 1e-8);

  cfg.nonlinear = true;
  const Trajectory nl = solve_mild(U0, cfg);
  ASSERT_EQ(nl.times.size(), 9u);
  for (const auto& d : nl.diagnostics) {
    EXPECT_LE(d.divergence_residual, 1e-10);
    EXPECT_LE(d.hermitian_residual, 1e-10);
  }
}

TEST(SolveMild, SecondOrderSelfConvergence) {
  SolverConfig cfg = small_config();
  cfg.T = 0.5;
  const SpectralField U0 = random_solenoidal_field(cfg.grid(), 6, 0.8, 4.0, 40.0);
  auto final_state = [&](double dt) {
    SolverConfig c = cfg;
    c.dt = dt;
    c.save_stride = 1 << 20;
    return solve_mild(U0, c).states.back();
  };
  const double dt = 1.0 / 64.0;
  const SpectralField ref = final_state(dt / 8);
  const double e1 = max_diff(final_state(dt), ref);
  const double e2 = max_diff(final_state(dt / 2), ref);
  EXPECT_GT(e1 / e2, 3.4) << e1 << " " << e2;
  EXPECT_LT(e1 / e2, 4.6) << e1 << " " << e2;
}

TEST(Picard, LinearTermScalingAndTruncation) {
  SolverConfig cfg = small_config();
  const LatticeGrid g = cfg.grid();
  const SpectralField f = random_solenoidal_field(g, 8, 0.8, 4.0, 1.0);
  const double t = 0.25;
  const auto terms = picard_terms(f, t, 3, cfg);
  ASSERT_EQ(terms.size(), 3u);
  EXPECT_LT(max_diff(terms[0], linear_propagate(f, t)), 1e-14);
  SpectralField half = f;
  half.scale(0.5);
  const auto th = picard_terms(half, t, 3, cfg);
  for (int n = 2; n <= 3; ++n) {
    SpectralField scaled = terms[n - 1];
    scaled.scale(std::pow(0.5, n));
    EXPECT_LT(max_diff(th[n - 1], scaled), 1e-8 * std::max(1e-300, scaled.max_abs()) + 1e-300);
  }
  // U - (A1 + A2) = O(delta^3)
  const DyadicPartition part = cfg.partition();
  std::vector<double> ld, le;
  for (double d : {0.02, 0.04, 0.08}) {
    SpectralField fd = f;
    fd.scale(d * 200.0);
    SolverConfig c = cfg;
    c.T = t;
    const SpectralField U = solve_mild(fd, c).states.back();
    const auto p = picard_terms(fd, t, 2, c);
    SpectralField rem = U;
    rem.axpy(-1.0, p[0]);
    rem.axpy(-1.0, p[1]);
    ld.push_back(std::log(d));
    le.push_back(std::log(fb_norm(rem, -1.0, 1.0, 2.0, part)));
  }
  const double slope = (le[2] - le[0]) / (ld[2] - ld[0]);
  EXPECT_NEAR(slope, 3.0, 0.2);
}

TEST(LocalExistence, ZeroMonotoneAndScaleTrend) {
  SolverConfig cfg = small_config(16, 8.0);
  cfg.T = 1.0;
  const auto zero = find_local_existence_time(SpectralField::on_lattice(cfg.grid()), cfg, 1.0);
  EXPECT_EQ(zero.T_loc, cfg.T);
  double prev = 0.0;
  for (int j = 2; j <= 6; ++j) {
    const double c = std::ldexp(1.0, j);
    cfg.half_extent = Vec3::Constant(2.0 * c);
    cfg.dt = std::ldexp(1.0, -2 * j - 6);
    const LatticeGrid g = cfg.grid();
    SpectralField f = random_solenoidal_field(g, 40, 0.8 * c, 1.6 * c, 1.0);
    f.scale(0.25 / fb_norm(f, -1.0, 1.0, 2.0, cfg.partition()));
    const auto le = find_local_existence_time(f, cfg, 1.0);
    EXPECT_LT(le.T_loc, cfg.T);
    EXPECT_LT(le.contraction_ratio, 1.0);
    if (j > 2) EXPECT_LT(le.T_loc, prev) << "j=" << j;
    prev = le.T_loc;
    SpectralField half = f;
    half.scale(0.5);
    EXPECT_GE(find_local_existence_time(half, cfg, 1.0).T_loc, le.T_loc);
  }
}
