#include <cmath>

#include <gtest/gtest.h>

#include "mpfb/error.hpp"
#include "mpfb/illposedness.hpp"

using namespace mpfb;

namespace {

// int_0^t e^{-(t-tau) b - tau q} dtau
double exp_conv(double b, double q, double t) {
  const double d = b - q;
  if (std::abs(d * t) < 1e-8) return t * std::exp(-b * t) * (1.0 - 0.5 * d * t);
  return (std::exp(-q * t) - std::exp(-b * t)) / d;
}

struct OverlapNode {
  Vec3 a, eta;
  double w, alpha2;
};

// eta in C_j^{-sigma} with xi - eta in C_j^{sigma}, written out per axis.
std::vector<OverlapNode> overlap_nodes(const IllposedDatum& d, const Vec3& xi, int order) {
  std::vector<OverlapNode> out;
  const Rule1D g = gauss_legendre(order, 0.0, 1.0);
  for (int j = d.j_lo; j <= d.j_hi; ++j)
    for (int sigma : {1, -1}) {
      const double c = std::ldexp(1.0, j);
      double lo[3], hi[3];
      bool empty = false;
      for (int a = 0; a < 3; ++a) {
        const double own = (a == 1) ? -sigma * c : 0.0;
        const double shift = (a == 1) ? sigma * c : 0.0;
        lo[a] = std::max(own - 1.0, xi[a] - shift - 1.0);
        hi[a] = std::min(own + 1.0, xi[a] - shift + 1.0);
        empty = empty || hi[a] <= lo[a];
      }
      if (empty) continue;
      const double alpha2 = d.delta * d.delta * c * c / d.N;
      for (std::size_t p = 0; p < g.size(); ++p)
        for (std::size_t q = 0; q < g.size(); ++q)
          for (std::size_t r = 0; r < g.size(); ++r) {
            const Vec3 eta(lo[0] + (hi[0] - lo[0]) * g.nodes[p], lo[1] + (hi[1] - lo[1]) * g.nodes[q],
                           lo[2] + (hi[2] - lo[2]) * g.nodes[r]);
            const double w = g.weights[p] * g.weights[q] * g.weights[r] * (hi[0] - lo[0]) * (hi[1] - lo[1]) *
                             (hi[2] - lo[2]);
            out.push_back({xi - eta, eta, w, alpha2});
          }
    }
  return out;
}

// Phase-aligned J1 with the tau integral done in closed form.
double oracle_j1(const IllposedDatum& d, double t, const Vec3& xi) {
  const double s = xi.squaredNorm();
  const double X = (1.0 - xi[0] * xi[0] / s) * xi[0] / (8.0 * std::pow(kPi, 3));
  double total = 0.0;
  for (const auto& n : overlap_nodes(d, xi, 14)) {
    const double kappa = n.a[1] * n.eta[1] / (n.a.norm() * n.eta.norm());
    total += n.w * n.alpha2 * kappa * exp_conv(s, n.a.squaredNorm() + n.eta.squaredNorm(), t);
  }
  return -X * total;
}

// Phase-aligned K11 with R_00(t - tau) and the two omega exponentials.
double oracle_k11(const IllposedDatum& d, double t, const Vec3& xi) {
  const double s = xi.squaredNorm();
  const double pl = xi[0] * xi[0] / s;
  double total = 0.0;
  for (const auto& n : overlap_nodes(d, xi, 14)) {
    const double s1 = n.a.squaredNorm(), s2 = n.eta.squaredNorm();
    const double kappa = n.a[1] * n.eta[1] / (n.a.norm() * n.eta.norm());
    const double el = n.eta[0] * n.eta[0] / s2, et = 1.0 - el;
    const double tau_part = (1.0 - pl) * (et * exp_conv(s, s1 + s2, t) + el * exp_conv(s, s1 + 2.0 * s2, t)) +
                            pl * (et * exp_conv(2.0 * s, s1 + s2, t) + el * exp_conv(2.0 * s, s1 + 2.0 * s2, t));
    total += n.w * n.alpha2 * kappa * tau_part;
  }
  return -xi[0] / (8.0 * std::pow(kPi, 3)) * total;
}

double aligned(Cplx v) { return (Cplx(0.0, 1.0) * v).real(); }

}  // namespace

TEST(Datum, ValueAtCubeCentre) {
  for (int N : {2, 3, 5}) {
    const IllposedDatum d = make_datum(N, 0.05);
    const double c = 0.05 * std::ldexp(1.0, N) / std::sqrt(N);
    const Vec6c v = d.value(Vec3(0.0, std::ldexp(1.0, N), 0.0));
    Vec6c expect;
    expect << Cplx(0.0, c), 0.0, 0.0, Cplx(0.0, c), 0.0, 0.0;
    EXPECT_LT((v - expect).norm(), 1e-14 * c);
  }
}

TEST(Datum, ScaleRangeAndErrors) {
  const IllposedDatum d = make_datum(4, 0.05);
  EXPECT_EQ(d.j_lo, 4);
  EXPECT_EQ(d.j_hi, 7);
  EXPECT_EQ(make_datum(5, 0.05).j_hi, 8);
  EXPECT_EQ(d.cube_count(), 8);
  EXPECT_THROW(make_datum(1, 0.05), Error);
  EXPECT_THROW(make_datum(3, 0.0), Error);
  EXPECT_THROW(make_datum(3, 1.0), Error);
}

TEST(Datum, FieldInvariants) {
  for (int N : {2, 3, 4}) {
    for (double delta : {0.01, 0.05, 0.5}) {
      const InitialData data = build_initial_data(N, delta, 4);
      const SpectralField& f = data.field;
      EXPECT_EQ(f.size(), static_cast<std::size_t>(data.datum.cube_count() * 64));
      EXPECT_LT(f.divergence_residual(), 1e-12);
      EXPECT_LT(f.hermitian_residual(), 1e-12);
      for (std::size_t i = 0; i < f.size(); i += 7) {
        const Vec3 xi = f.frequency(i);
        const Vec6c v = f.value(i);
        const double c = delta * std::ldexp(1.0, static_cast<int>(std::lround(std::log2(std::abs(xi[1]))))) /
                         std::sqrt(N) / xi.norm();
        EXPECT_NEAR(std::abs(v[0] - Cplx(0.0, c * xi[1])), 0.0, 1e-12 * c);
        EXPECT_NEAR(std::abs(v[1] - Cplx(0.0, -c * xi[0])), 0.0, 1e-12 * c);
        EXPECT_NEAR(std::abs(v[3] - Cplx(0.0, c * xi[1])), 0.0, 1e-12 * c);
        EXPECT_EQ(v[2], Cplx(0.0));
        EXPECT_EQ(v[4], Cplx(0.0));
      }
    }
  }
}

TEST(Region, Properties) {
  const ObservationRegion reg;
  for (int c = 0; c < 8; ++c) {
    const Vec3 x((c & 1) ? 0.5 : 0.1, (c & 2) ? 0.5 : 0.1, (c & 4) ? 0.5 : 0.1);
    EXPECT_TRUE(reg.in_E(x));
    EXPECT_TRUE(reg.in_E_bar(x));
    EXPECT_LE(x.norm(), 1.0);
  }
  EXPECT_FALSE(reg.in_E_bar(Vec3(0.04, 0.1, 0.1)));
  EXPECT_FALSE(reg.in_E_bar(Vec3(0.5, 1.0, 0.2)));
  EXPECT_GE(reg.transverse_floor(), 0.038);
  EXPECT_NEAR(reg.transverse_floor(), 1.0 - 0.25 / 0.27, 1e-15);
  // Brute-force floor on a grid agrees with the corner value.
  double m = 1.0;
  for (const Node3& n : reg.nodes(10)) m = std::min(m, 1.0 - n.x[0] * n.x[0] / n.x.squaredNorm());
  EXPECT_GE(m, reg.transverse_floor());

  EXPECT_EQ(reg.j0(), 3);
  const DyadicPartition p3(-3, 3), p2(-2, 2);
  bool p2_fails = false;
  for (const Node3& n : reg.nodes(6)) {
    EXPECT_NEAR(p3.band_sum(n.x.norm()), 1.0, 1e-14);
    p2_fails = p2_fails || std::abs(p2.band_sum(n.x.norm()) - 1.0) > 1e-6;
  }
  EXPECT_TRUE(p2_fails);
  for (const Vec3& x : reg.e_bar_samples(8)) EXPECT_TRUE(reg.in_E_bar(x));
}

TEST(Kernel, ExactMinusOne) {
  const Vec3 xi(0.0, 0.2, 0.0);
  const Vec3 eta(0.0, -3.8, 0.0);  // xi - eta = (0, 4, 0), eta2 = -|eta|
  EXPECT_DOUBLE_EQ(j1_kernel(xi, eta), -1.0);
  EXPECT_DOUBLE_EQ(k11_kernel(xi, eta), -2.0);
}

TEST(Kernel, SampledRanges) {
  for (int j = 2; j <= 8; ++j) {
    const KernelRange a = kernel_sign_check(KernelKind::J1, j, 100000, 3);
    EXPECT_GE(a.min, -1.0 - 1e-9);
    EXPECT_LE(a.max, -1.0 / 16.0 + 1e-9);
    const KernelRange b = kernel_sign_check(KernelKind::K11, j, 100000, 3);
    EXPECT_GE(b.min, -2.0 - 1e-9);
    EXPECT_LE(b.max, -1.0 / 256.0 + 1e-9);
    // The second term lifts K11 well past -1 at large j.
    if (j >= 5) EXPECT_LT(b.min, -1.5);
  }
}

TEST(Kernel, Deterministic) {
  const KernelRange a = kernel_sign_check(KernelKind::K11, 4, 1000, 9);
  const KernelRange b = kernel_sign_check(KernelKind::K11, 4, 1000, 9);
  EXPECT_EQ(a.min, b.min);
  EXPECT_EQ(a.argmin_eta, b.argmin_eta);
}

TEST(OverlapBox, Geometry) {
  const Vec3 xi(0.3, 0.2, 0.4);
  const Box b = overlap_box(xi, 3, 1);
  EXPECT_FALSE(b.empty());
  EXPECT_TRUE(IllposedDatum::cube(3, -1).contains(b.center()));
  EXPECT_TRUE(IllposedDatum::cube(3, 1).contains(xi - b.center()));
  EXPECT_NEAR(b.hi[1] - b.lo[1], 2.0 - 0.2, 1e-14);
  // Distinct scales are at least 4 apart along e2, so no cross pairs meet E.
  EXPECT_TRUE(IllposedDatum::cube(4, -1).intersect(Box::cube(xi - Vec3(0.0, 8.0, 0.0), 1.0)).empty());
  EXPECT_TRUE(IllposedDatum::cube(3, -1).intersect(Box::cube(xi - Vec3(0.0, 16.0, 0.0), 1.0)).empty());
}

TEST(DataNorm, ScalingExponents) {
  const std::vector<int> Ns{4, 6, 8, 10, 12};
  EXPECT_NEAR(data_norm_scaling(Ns, 0.05, kInf).slope, -0.5, 0.1);
  EXPECT_NEAR(data_norm_scaling(Ns, 0.05, 4.0).slope, -0.25, 0.1);
  EXPECT_THROW(data_norm_scaling({4, 6, 8}, 0.05, 2.0), Error);
}

// At r = 2 the norm is sqrt(#scales / N) times a per-scale constant; the
// number of scales floor(N/2) + 2 makes the finite-N slope negative.
TEST(DataNorm, SquareSumTracksScaleCount) {
  const ScalingFit fit = data_norm_scaling({4, 6, 8, 10, 12}, 0.05, 2.0);
  std::vector<double> normalised;
  for (std::size_t k = 0; k < fit.N.size(); ++k) {
    const int N = fit.N[k];
    const double count = (3 * N) / 2 + 1 - N + 1;
    normalised.push_back(fit.norms[k] / std::sqrt(count / N));
  }
  const auto [lo, hi] = std::minmax_element(normalised.begin(), normalised.end());
  EXPECT_LT((*hi - *lo) / *hi, 0.05);
  EXPECT_LT(fit.slope, -0.1);
}

TEST(DataNorm, LinearInDelta) {
  const InitialData a = build_initial_data(4, 0.02, 6), b = build_initial_data(4, 0.06, 6);
  const DyadicPartition p = datum_partition(a.datum);
  EXPECT_NEAR(fb_norm(b.field, -1.0, 1.0, kInf, p), 3.0 * fb_norm(a.field, -1.0, 1.0, kInf, p), 1e-12);
}

TEST(SecondIterate, ZeroTimeAndErrors) {
  const IllposedDatum d = make_datum(3, 0.05);
  const auto r = second_iterate(d, 0.0, {Vec3(0.3, 0.3, 0.3)});
  ASSERT_EQ(r.samples.size(), 1u);
  EXPECT_EQ(r.samples[0].value.norm(), 0.0);
  for (double x : r.samples[0].J) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(second_iterate(d, -1e-3, {Vec3(0.3, 0.3, 0.3)}), Error);
  EXPECT_THROW(second_iterate(d, 1e-2, {Vec3(0.01, 0.3, 0.3)}), Error);
  EXPECT_THROW(second_iterate(d, 1e-2, {Vec3(0.5, 1.0, 0.5)}), Error);
}

TEST(SecondIterate, DecompositionSumsExactly) {
  const IllposedDatum d = make_datum(3, 0.05);
  const std::vector<Vec3> xs{Vec3(0.3, 0.3, 0.3), Vec3(0.5, 0.1, 0.1), Vec3(0.06, -0.8, 0.5), Vec3(1.0, 0.2, -0.3)};
  const auto r = second_iterate(d, 1.0 / 64.0, xs);
  for (const auto& s : r.samples) {
    Cplx sj = 0.0, sk = 0.0;
    for (Cplx c : s.J_signed) sj += c;
    for (Cplx c : s.K_signed) sk += c;
    EXPECT_LT(std::abs(sj - s.value[0]), 1e-12 * s.value.norm());
    EXPECT_LT(std::abs(sk - s.value[3]), 1e-12 * s.value.norm());
    EXPECT_LT(std::abs(s.K1_signed[0] + s.K1_signed[1] + s.K1_signed[2] - s.K_signed[0]), 1e-12 * s.value.norm());
    EXPECT_LE(s.J[6], s.J7_op * (1.0 + 1e-12));
  }
}

TEST(SecondIterate, QuadraticInDelta) {
  const std::vector<Vec3> xs{Vec3(0.2, 0.4, 0.3)};
  const auto a = second_iterate(make_datum(4, 0.02), 1.0 / 256.0, xs);
  const auto b = second_iterate(make_datum(4, 0.04), 1.0 / 256.0, xs);
  EXPECT_LT((b.samples[0].value - 4.0 * a.samples[0].value).norm(), 1e-12 * b.samples[0].value.norm());
}

TEST(SecondIterate, LeadingTermsMatchClosedFormTauIntegral) {
  for (int N : {2, 3, 4}) {
    const IllposedDatum d = make_datum(N, 0.05);
    const double t = std::pow(4.0, -N);
    const std::vector<Vec3> xs{Vec3(0.3, 0.3, 0.3), Vec3(0.5, 0.1, 0.1), Vec3(0.1, 0.45, 0.2)};
    const auto r = second_iterate(d, t, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const auto& s = r.samples[k];
      const double j1 = oracle_j1(d, t, xs[k]);
      const double k11 = oracle_k11(d, t, xs[k]);
      EXPECT_GT(j1, 0.0);
      EXPECT_GT(k11, 0.0);
      EXPECT_NEAR(aligned(s.J_signed[0]), j1, 1e-5 * j1) << "N=" << N << " k=" << k;
      EXPECT_NEAR(aligned(s.K1_signed[0]), k11, 1e-5 * k11) << "N=" << N << " k=" << k;
      EXPECT_LT(std::abs(s.J_signed[0].real()), 1e-12 * j1);
      EXPECT_GE(s.J1_integrand_min, 0.0);
      EXPECT_GE(s.K11_integrand_min, 0.0);
    }
  }
}

TEST(SecondIterate, SelfErrorAndTolerance) {
  const IllposedDatum d = make_datum(4, 0.05);
  const auto r = second_iterate(d, 1.0 / 256.0, {Vec3(0.3, 0.2, 0.4)});
  EXPECT_LT(r.self_error, 1e-4);
  SecondIterateOptions crude;
  crude.eta_order = 1;
  crude.tau_order = 1;
  crude.tau_panels = 1;
  EXPECT_THROW(second_iterate(d, 1.0 / 256.0, {Vec3(0.3, 0.2, 0.4)}, crude), Error);
}

TEST(TermNorms, LeadingTermDominates) {
  const IllposedDatum d = make_datum(3, 0.05);
  const TermNorms tn = term_norms_on_E(d, 1.0 / 64.0, 3);
  for (int k = 1; k < 7; ++k) EXPECT_LT(tn.J[k], 0.1 * tn.J[0]);
  EXPECT_GT(tn.u2_l1, 0.9 * tn.J[0]);
  EXPECT_GT(tn.u2_fb_partial, 0.0);
  EXPECT_GT(tn.omega2_l1, 0.0);
  EXPECT_LE(tn.J23, tn.J[1] + tn.J[2] + 1e-30);
}

TEST(Inflation, ReportFields) {
  const InflationReport rep = inflation_experiment(3, 0.05, kInf, NormSpace::FourierBesov);
  EXPECT_DOUBLE_EQ(rep.t, 1.0 / 64.0);
  EXPECT_GT(rep.data_norm, rep.a1_norm);
  EXPECT_TRUE(rep.surrogate_positive);
  EXPECT_TRUE(rep.accurate);
  EXPECT_TRUE(rep.warnings.empty());
  EXPECT_NEAR(rep.ratio, rep.u2_surrogate / rep.data_norm, 1e-15);
  const InflationReport loud = inflation_experiment(2, 0.2, kInf, NormSpace::FourierBesov);
  EXPECT_EQ(loud.warnings.size(), 1u);
  EXPECT_THROW(inflation_experiment(3, 0.05, 0.5, NormSpace::FourierBesov), Error);
  EXPECT_EQ(parse_space("besov"), NormSpace::BesovInfty);
  EXPECT_THROW(parse_space("l2"), Error);
}

TEST(Inflation, BesovModeChecksLeadingSign) {
  InflationOptions opt;
  opt.e_order = 3;
  opt.e_bar_per_axis = 5;
  const InflationReport rep = inflation_experiment(3, 0.05, kInf, NormSpace::BesovInfty, opt);
  EXPECT_TRUE(rep.leading_sign_ok);
  EXPECT_GE(rep.u2_negative_part, 0.0);
  EXPECT_NEAR(rep.u2_surrogate, kInvTwoPiCubed * rep.terms.u2_l1, 1e-20);
}

TEST(BesovCubes, MatchesPeakOfSingleCube) {
  // One cube of constant symbol: the block sup sits at x = 0 and equals the
  // weighted integral of psi_j |v|.
  SpectralField f = SpectralField::on_cubes({Box::cube(Vec3(0.0, 4.0, 0.0), 1.0)}, 6);
  f.fill([](const Vec3&) {
    Vec6c v = Vec6c::Zero();
    v[0] = 1.0;
    return v;
  });
  const DyadicPartition p(1, 3);
  double expect = 0.0;
  for (int j = 1; j <= 3; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) b += f.weight(i) * DyadicPartition::psi_j(j, f.frequency(i).norm());
    expect = std::max(expect, std::ldexp(kInvTwoPiCubed * b, -j));
  }
  EXPECT_NEAR(besov_infty_norm_cubes(f, -1.0, kInf, p), expect, 1e-12 * expect);
}

TEST(CrossCheck, LatticeDatum) {
  const IllposedDatum d = make_datum(2, 0.05);
  const LatticeGrid g = cross_check_grid(d, 1);
  EXPECT_EQ(g.n[0], 64);
  EXPECT_EQ(g.n[1], 144);
  EXPECT_EQ(g.n[2], 64);
  const SpectralField f = datum_on_lattice(d, g);
  EXPECT_LT(f.hermitian_residual(), 1e-14);
  EXPECT_LT(f.divergence_residual(), 1e-14);
  // Interior point, face point, edge point.
  const Vec3 in(0.25, 4.5, 0.0), face(1.0, 4.5, 0.0), edge(1.0, 5.0, 0.0);
  auto at = [&](const Vec3& x) {
    return f.value(g.index(static_cast<int>(std::lround(x[0] / g.h[0])), static_cast<int>(std::lround(x[1] / g.h[1])),
                           static_cast<int>(std::lround(x[2] / g.h[2]))));
  };
  EXPECT_LT((at(in) - d.value(in)).norm(), 1e-15);
  EXPECT_LT((at(face) - 0.5 * d.cube_value(face, 2)).norm(), 1e-15);
  EXPECT_LT((at(edge) - 0.25 * d.cube_value(edge, 2)).norm(), 1e-15);
  EXPECT_THROW(grid_cross_check(4, 0.05), Error);
}

TEST(CrossCheck, PathsAgreeAndDeviationIsDeltaFree) {
  SecondIterateOptions opt;
  opt.tau_order = 4;
  const CrossCheckResult a = grid_cross_check(2, 0.05, {1}, 6, opt);
  const CrossCheckResult b = grid_cross_check(2, 0.1, {1}, 6, opt);
  ASSERT_EQ(a.levels.size(), 1u);
  EXPECT_LT(a.levels[0].max_deviation, 0.05);
  EXPECT_NEAR(a.levels[0].max_deviation, b.levels[0].max_deviation, 1e-9);
  for (const Vec3& x : a.samples) EXPECT_TRUE(ObservationRegion{}.in_E(x));
}
