#include "mpfb/illposedness.hpp"

#include <algorithm>
#include <cmath>

#include "mpfb/error.hpp"
#include "mpfb/rng.hpp"
#include "mpfb/semigroup.hpp"

namespace mpfb {

namespace {

using Vec3c = Eigen::Matrix<Cplx, 3, 1>;
using Mat36c = Eigen::Matrix<Cplx, 3, 6>;

double pow2(int j) { return std::ldexp(1.0, j); }

SpectralWeights exp_weights(double s, double t) {
  return spectral_weights(s, [t](double l) { return Cplx(std::exp(-t * l)); });
}

/// G(zeta, tau) f split into the main part G_m f, the remainder G_r f, the
/// entrywise |G_r| f and ||G_r||_2 |f|.
struct Propagated {
  Vec6c main, rem, abs_rem;
  double op = 0.0;
};

Propagated propagate(const Vec3& z, double s, const Vec6c& f, double tau) {
  const double r = std::sqrt(1.0 + s);
  const double e1 = std::exp(-tau * s);
  const double e2 = std::exp(-2.0 * tau * s);
  const double gw = std::exp(-tau * (2.0 * s + 2.0));
  const double gm = std::exp(-tau * lambda_min(s));
  const double gp = std::exp(-tau * (s + 1.0 + r));
  const double a = 0.5 * (gm + gp), c = (gp - gm) / (2.0 * r);
  // G blocks: uu = e1 P_L + (a-c) P_T, uw = wu = c B, ww = gw P_L + (a+c) P_T.
  const Vec3c u = f.head<3>(), w = f.tail<3>();
  const Vec3c uL = z.cast<Cplx>() * (z.cast<Cplx>().dot(u)) / s;
  const Vec3c wL = z.cast<Cplx>() * (z.cast<Cplx>().dot(w)) / s;
  const Mat3c B = curl_symbol(z);
  Propagated p;
  p.main.head<3>() = e1 * u;
  p.main.tail<3>() = e1 * (w - wL) + e2 * wL;
  Vec6c full;
  full.head<3>() = e1 * uL + (a - c) * (u - uL) + c * (B * w);
  full.tail<3>() = gw * wL + (a + c) * (w - wL) + c * (B * u);
  p.rem = full - p.main;

  const Mat3 PL = longitudinal(z), PT = Mat3::Identity() - PL;
  Mat6 M;
  M.topLeftCorner<3, 3>() = ((a - c - e1) * PT).cwiseAbs();  // (e1 - e1) P_L vanishes
  M.bottomRightCorner<3, 3>() = ((gw - e2) * PL + (a + c - e1) * PT).cwiseAbs();
  const Mat3 Babs = (c * B).cwiseAbs();
  M.topRightCorner<3, 3>() = Babs;
  M.bottomLeftCorner<3, 3>() = Babs;
  p.abs_rem = M.cast<Cplx>() * f;
  p.op = std::max({std::abs(gw - e2), std::abs(gm - e1), std::abs(gp - e1)}) * f.norm();
  return p;
}

struct EtaNode {
  Vec3 z1, z2;  // xi - eta and eta
  double s1, s2, w;
  Vec6c f1, f2;
};

std::vector<EtaNode> eta_nodes(const IllposedDatum& d, const Vec3& xi, int order) {
  std::vector<EtaNode> out;
  for (int j = d.j_lo; j <= d.j_hi; ++j)
    for (int sign : {1, -1}) {
      const Box box = overlap_box(xi, j, sign);
      if (box.empty()) continue;
      for (const Node3& nd : tensor_gauss(box, order)) {
        EtaNode e;
        e.z2 = nd.x;
        e.z1 = xi - nd.x;
        e.s1 = e.z1.squaredNorm();
        e.s2 = e.z2.squaredNorm();
        e.w = nd.w;
        e.f1 = d.cube_value(e.z1, j);
        e.f2 = d.cube_value(e.z2, j);
        out.push_back(e);
      }
    }
  return out;
}

SecondIterateSample evaluate_sample(const IllposedDatum& d, double t, const Vec3& xi, const Rule1D& tau_rule,
                                    int eta_order) {
  SecondIterateSample out;
  out.xi = xi;
  const std::vector<EtaNode> nodes = eta_nodes(d, xi, eta_order);
  const double s = xi.squaredNorm();
  const double pref = kInvTwoPiCubed;
  Vec3 c1;  // first row of the Leray projector
  for (int l = 0; l < 3; ++l) c1[l] = (l == 0 ? 1.0 : 0.0) - xi[0] * xi[l] / s;
  const Mat3 PL = longitudinal(xi), PT = Mat3::Identity() - PL;

  Cplx acc5[3][3] = {}, acc6[3][3] = {}, acc5op[3][3] = {}, acc6op[3][3] = {};
  Cplx acc7 = 0.0, accK5 = 0.0;
  double j7op = 0.0;
  double j1min = kInf, j1max = -kInf, k11min = kInf, k11max = -kInf;

  for (std::size_t q = 0; q < tau_rule.size(); ++q) {
    const double tau = tau_rule.nodes[q], tw = tau_rule.weights[q];
    Mat36c Cmm = Mat36c::Zero(), Cmr = Mat36c::Zero(), Crm = Mat36c::Zero(), Crr = Mat36c::Zero();
    Mat3c CmA = Mat3c::Zero(), CAA = Mat3c::Zero();
    Vec3c CmO = Vec3c::Zero();
    double COO = 0.0;
    double p_min = kInf, p_max = -kInf, k_min = kInf, k_max = -kInf;
    for (const EtaNode& e : nodes) {
      const Propagated P1 = propagate(e.z1, e.s1, e.f1, tau);
      const Propagated P2 = propagate(e.z2, e.s2, e.f2, tau);
      const Vec3c am = e.w * P1.main.head<3>(), ar = e.w * P1.rem.head<3>();
      Cmm.noalias() += am * P2.main.transpose();
      Cmr.noalias() += am * P2.rem.transpose();
      Crm.noalias() += ar * P2.main.transpose();
      Crr.noalias() += ar * P2.rem.transpose();
      CmA.noalias() += am * P2.abs_rem.head<3>().transpose();
      CAA.noalias() += (e.w * P1.abs_rem.head<3>()) * P2.abs_rem.head<3>().transpose();
      CmO += am * P2.op;
      COO += e.w * P1.op * P2.op;
      const double pj = (P1.main[0] * P2.main[0]).real();
      const double pk = (P1.main[0] * P2.main[3]).real();
      p_min = std::min(p_min, pj);
      p_max = std::max(p_max, pj);
      k_min = std::min(k_min, pk);
      k_max = std::max(k_max, pk);
    }
    const Mat36c C = Cmm + Cmr + Crm + Crr;
    Vec6c Nf;
    for (int l = 0; l < 6; ++l) {
      Cplx v = 0.0;
      for (int k = 0; k < 3; ++k) v += Cplx(0.0, xi[k]) * C(k, l);
      Nf[l] = pref * v;
    }
    const Vec3c Pu = PT.cast<Cplx>() * Nf.head<3>();
    Nf.head<3>() = Pu;

    const double lag = t - tau;
    const Mat6c G = spectral_matrix(xi, exp_weights(s, lag));
    Mat6c Gm = Mat6c::Zero();
    const double e = std::exp(-lag * s);
    const Mat3 R = r_block(xi, lag);
    Gm.topLeftCorner<3, 3>() = e * Mat3c::Identity();
    Gm.bottomRightCorner<3, 3>() = R.cast<Cplx>();
    const Mat6c Gr = G - Gm;
    const Vec6c GrN = Gr * Nf;
    const Vec6c GrAbsN = Gr.cwiseAbs().cast<Cplx>() * Nf;
    const auto ev = distinct_eigenvalues(s);
    const double gr_op = std::max({std::abs(std::exp(-lag * ev[1]) - std::exp(-2.0 * lag * s)),
                                   std::abs(std::exp(-lag * ev[2]) - e), std::abs(std::exp(-lag * ev[3]) - e)});

    out.value += -tw * (G * Nf);
    auto jterm = [&](const Mat36c& M, int k, int l) { return -e * c1[l] * Cplx(0.0, xi[k]) * pref * M(k, l); };
    auto kterm = [&](const Mat36c& M, int k, int l) { return -R(0, l) * Cplx(0.0, xi[k]) * pref * M(k, 3 + l); };
    out.J_signed[0] += tw * jterm(Cmm, 0, 0);
    out.J_signed[1] += tw * jterm(Cmm, 1, 0);
    out.J_signed[2] += tw * jterm(Cmm, 0, 1);
    out.J_signed[3] += tw * jterm(Cmm, 1, 1);
    const Mat36c Cx = Cmr + Crm;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        // J1..J4 cover the (k,l) in {0,1}^2 entries; the third row/column of
        // the main-main product vanishes with the third data component.
        if (k == 2 || l == 2) out.J_signed[0] += tw * jterm(Cmm, k, l);
        out.J_signed[4] += tw * jterm(Cx, k, l);
        out.J_signed[5] += tw * jterm(Crr, k, l);
        const Cplx base = -e * c1[l] * Cplx(0.0, xi[k]) * pref;
        acc5[k][l] += tw * base * CmA(k, l);
        acc6[k][l] += tw * base * CAA(k, l);
        acc5op[k][l] += tw * base * CmO[k];
        acc6op[k][l] += tw * base * COO;
      }
    out.J_signed[6] += -tw * GrN[0];
    acc7 += tw * GrAbsN[0];
    accK5 += tw * GrAbsN[3];
    j7op += tw * gr_op * Nf.norm();

    out.K1_signed[0] += tw * kterm(Cmm, 0, 0);
    out.K1_signed[1] += tw * (kterm(Cmm, 1, 0) + kterm(Cmm, 2, 0));
    for (int k = 0; k < 3; ++k)
      for (int l = 1; l < 3; ++l) out.K1_signed[2] += tw * kterm(Cmm, k, l);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        out.K_signed[1] += tw * kterm(Crm, k, l);
        out.K_signed[2] += tw * kterm(Cmr, k, l);
        out.K_signed[3] += tw * kterm(Crr, k, l);
      }
    out.K_signed[4] += -tw * GrN[3];

    // Phase-aligned leading integrands: i * jterm = e c1[0] xi1 pref Re(p).
    const double xj = e * c1[0] * xi[0] * pref, xk = R(0, 0) * xi[0] * pref;
    j1min = std::min(j1min, std::min(xj * p_min, xj * p_max));
    j1max = std::max(j1max, std::max(xj * p_min, xj * p_max));
    k11min = std::min(k11min, std::min(xk * k_min, xk * k_max));
    k11max = std::max(k11max, std::max(xk * k_min, xk * k_max));
  }
  out.K_signed[0] = out.K1_signed[0] + out.K1_signed[1] + out.K1_signed[2];
  for (int i = 0; i < 4; ++i) out.J[i] = std::abs(out.J_signed[i]);
  out.J23 = std::abs(out.J_signed[1] + out.J_signed[2]);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      out.J[4] += 2.0 * std::abs(acc5[k][l]);
      out.J[5] += std::abs(acc6[k][l]);
      out.J5_op += 2.0 * std::abs(acc5op[k][l]);
      out.J6_op += std::abs(acc6op[k][l]);
    }
  out.J[6] = std::abs(acc7);
  out.J7_op = j7op;
  for (int i = 0; i < 4; ++i) out.K[i] = std::abs(out.K_signed[i]);
  out.K[4] = std::abs(accK5);
  out.K5_op = j7op;
  for (int i = 0; i < 3; ++i) out.K1[i] = std::abs(out.K1_signed[i]);
  if (tau_rule.size() > 0) {
    out.J1_integrand_min = j1min;
    out.J1_integrand_max = j1max;
    out.K11_integrand_min = k11min;
    out.K11_integrand_max = k11max;
  }
  return out;
}

}  // namespace

Box IllposedDatum::cube(int j, int sign) {
  return Box::cube(Vec3(0.0, sign * pow2(j), 0.0), 1.0);
}

std::vector<Box> IllposedDatum::cubes() const {
  std::vector<Box> out;
  for (int j = j_lo; j <= j_hi; ++j) {
    out.push_back(cube(j, 1));
    out.push_back(cube(j, -1));
  }
  return out;
}

Vec6c IllposedDatum::cube_value(const Vec3& xi, int j) const {
  const Cplx c = Cplx(0.0, delta * pow2(j) / std::sqrt(static_cast<double>(N))) / xi.norm();
  Vec6c v;
  v << c * xi[1], -c * xi[0], 0.0, c * xi[1], 0.0, 0.0;
  return v;
}

Vec6c IllposedDatum::value(const Vec3& xi) const {
  Vec6c v = Vec6c::Zero();
  for (int j = j_lo; j <= j_hi; ++j)
    for (int sign : {1, -1})
      if (cube(j, sign).contains(xi)) v += cube_value(xi, j);
  return v;
}

IllposedDatum make_datum(int N, double delta) {
  if (N < 2) throw Error(ErrorCode::DegenerateRange, "N must be >= 2 so that the cubes avoid the origin");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidParameter, "delta must lie in (0,1)");
  IllposedDatum d;
  d.N = N;
  d.delta = delta;
  d.j_lo = N;
  d.j_hi = (3 * N) / 2 + 1;
  return d;
}

InitialData build_initial_data(int N, double delta, int order) {
  InitialData out;
  out.datum = make_datum(N, delta);
  out.field = SpectralField::on_cubes(out.datum.cubes(), order);
  const IllposedDatum& d = out.datum;
  out.field.fill([&d](const Vec3& xi) { return d.value(xi); });
  out.field.real_valued = true;
  out.field.divergence_free = true;
  return out;
}

bool ObservationRegion::in_E_bar(const Vec3& xi) const {
  constexpr double eps = 1e-12;
  return xi[0] >= 0.05 - eps && xi[0] <= 1.1 + eps && xi.norm() <= 1.1 + eps;
}

int ObservationRegion::j0() const {
  const double r_lo = E.lo.norm(), r_hi = E.hi.norm();
  for (int j = 1; j < 64; ++j) {
    const auto band = DyadicPartition(-j, j).resolved_band();
    if (band.first <= r_lo && band.second >= r_hi) return j;
  }
  throw Error(ErrorCode::InvalidRange, "no symmetric partition resolves E");
}

double ObservationRegion::transverse_floor() const {
  double m = kInf;
  for (int c = 0; c < 8; ++c) {
    const Vec3 x((c & 1) ? E.hi[0] : E.lo[0], (c & 2) ? E.hi[1] : E.lo[1], (c & 4) ? E.hi[2] : E.lo[2]);
    m = std::min(m, 1.0 - x[0] * x[0] / x.squaredNorm());
  }
  return m;
}

std::vector<Vec3> ObservationRegion::e_bar_samples(int per_axis) const {
  std::vector<Vec3> out;
  const Vec3 lo(0.05, -1.1, -1.1), hi(1.1, 1.1, 1.1);
  for (int a = 0; a < per_axis; ++a)
    for (int b = 0; b < per_axis; ++b)
      for (int c = 0; c < per_axis; ++c) {
        const Vec3 x(lo[0] + (a + 0.5) * (hi[0] - lo[0]) / per_axis, lo[1] + (b + 0.5) * (hi[1] - lo[1]) / per_axis,
                     lo[2] + (c + 0.5) * (hi[2] - lo[2]) / per_axis);
        if (in_E_bar(x)) out.push_back(x);
      }
  return out;
}

double j1_kernel(const Vec3& xi, const Vec3& eta) {
  const Vec3 a = xi - eta;
  return a[1] * eta[1] / (a.norm() * eta.norm());
}

double k11_kernel(const Vec3& xi, const Vec3& eta) {
  const Vec3 a = xi - eta;
  const double na = a.norm(), ne = eta.norm();
  return a[1] * std::pow(eta[1], 3) / (na * ne * ne * ne) + std::pow(a[1], 3) * eta[1] / (na * na * na * ne);
}

Box overlap_box(const Vec3& xi, int j, int sign) {
  const Box shifted = Box::cube(xi - Vec3(0.0, sign * pow2(j), 0.0), 1.0);
  return IllposedDatum::cube(j, -sign).intersect(shifted);
}

KernelRange kernel_sign_check(KernelKind kind, int j, long samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidParameter, "need at least one sample");
  const ObservationRegion reg;
  const CounterRng rng(seed, static_cast<std::uint64_t>(j + 1000));
  KernelRange out;
  out.min = kInf;
  out.max = -kInf;
  for (long i = 0; i < samples; ++i) {
    const std::uint64_t c = 8 * static_cast<std::uint64_t>(i);
    Vec3 xi;
    for (int a = 0; a < 3; ++a) xi[a] = rng.uniform(c + a, reg.E.lo[a], reg.E.hi[a]);
    const int sign = (rng.bits(c + 3) & 1) ? 1 : -1;
    const Box box = overlap_box(xi, j, sign);
    if (box.empty()) throw Error(ErrorCode::EmptySupport, "no admissible eta for this xi and scale");
    Vec3 eta;
    for (int a = 0; a < 3; ++a) eta[a] = rng.uniform(c + 4 + a, box.lo[a], box.hi[a]);
    const double v = kind == KernelKind::J1 ? j1_kernel(xi, eta) : k11_kernel(xi, eta);
    if (v < out.min) {
      out.min = v;
      out.argmin_xi = xi;
      out.argmin_eta = eta;
    }
    out.max = std::max(out.max, v);
  }
  out.samples = samples;
  return out;
}

DyadicPartition datum_partition(const IllposedDatum& d) { return DyadicPartition(d.j_lo - 3, d.j_hi + 2); }

ScalingFit data_norm_scaling(const std::vector<int>& N_list, double delta, double r, int order) {
  if (N_list.size() < 4) throw Error(ErrorCode::InvalidParameter, "need at least four values of N");
  ScalingFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int N : N_list) {
    const InitialData data = build_initial_data(N, delta, order);
    const double norm = fb_norm(data.field, -1.0, 1.0, r, datum_partition(data.datum));
    fit.N.push_back(N);
    fit.norms.push_back(norm);
    const double x = std::log(static_cast<double>(N)), y = std::log(norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(N_list.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

Rule1D second_iterate_tau_rule(const IllposedDatum& d, double t, const SecondIterateOptions& opt) {
  if (!opt.tau_rule.nodes.empty()) return opt.tau_rule;
  int panels = opt.tau_panels;
  if (panels <= 0) {
    // Reach the layer width 4^{-(j_hi+1)} of the fastest cube, plus two panels.
    const double levels = std::log(t * std::pow(4.0, d.j_hi + 1)) / std::log(opt.tau_ratio);
    panels = std::max(2, static_cast<int>(std::ceil(levels)) + 2);
  }
  return graded_gauss(t, panels, opt.tau_order, opt.tau_ratio);
}

SecondIterateResult second_iterate(const IllposedDatum& d, double t, const std::vector<Vec3>& xi_samples,
                                   const SecondIterateOptions& opt) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidTime, "second iterate needs t >= 0");
  if (opt.eta_order < 1 || opt.tau_order < 1) throw Error(ErrorCode::InvalidParameter, "quadrature orders must be >= 1");
  const ObservationRegion reg;
  for (const Vec3& xi : xi_samples)
    if (!reg.in_E_bar(xi)) throw Error(ErrorCode::InvalidParameter, "frequency sample outside E_bar");
  SecondIterateResult res;
  if (t == 0.0) {
    for (const Vec3& xi : xi_samples) {
      SecondIterateSample s;
      s.xi = xi;
      res.samples.push_back(s);
    }
    return res;
  }
  const Rule1D tau = second_iterate_tau_rule(d, t, opt);
  res.tau_nodes = tau.size();
  for (const Vec3& xi : xi_samples) res.samples.push_back(evaluate_sample(d, t, xi, tau, opt.eta_order));

  SecondIterateOptions fine = opt;
  fine.tau_order += 2;
  const Rule1D tau_fine = second_iterate_tau_rule(d, t, fine);
  const int checks = std::min<int>(opt.self_check, static_cast<int>(xi_samples.size()));
  for (int k = 0; k < checks; ++k) {
    const SecondIterateSample ref = evaluate_sample(d, t, xi_samples[k], tau_fine, opt.eta_order + 2);
    const double den = ref.value.norm();
    if (den > 0.0) res.self_error = std::max(res.self_error, (ref.value - res.samples[k].value).norm() / den);
  }
  if (res.self_error > opt.tolerance)
    throw Error(ErrorCode::Accuracy, "self-estimated quadrature error " + std::to_string(res.self_error) +
                                         " exceeds " + std::to_string(opt.tolerance));
  return res;
}

TermNorms term_norms_on_E(const IllposedDatum& d, double t, int e_order, const SecondIterateOptions& opt) {
  const ObservationRegion reg;
  const std::vector<Node3> nodes = reg.nodes(e_order);
  std::vector<Vec3> xs;
  for (const Node3& n : nodes) xs.push_back(n.x);
  const SecondIterateResult res = second_iterate(d, t, xs, opt);
  TermNorms out;
  out.self_error = res.self_error;
  out.J1_integrand_min = kInf;
  out.K11_integrand_min = kInf;
  constexpr int kLo = -8, kHi = 3;
  std::vector<double> bu(kHi - kLo + 1, 0.0), bw(kHi - kLo + 1, 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double w = nodes[i].w;
    const SecondIterateSample& s = res.samples[i];
    for (int k = 0; k < 7; ++k) out.J[k] += w * s.J[k];
    for (int k = 0; k < 5; ++k) out.K[k] += w * s.K[k];
    for (int k = 0; k < 3; ++k) out.K1[k] += w * s.K1[k];
    out.J23 += w * s.J23;
    out.J5_op += w * s.J5_op;
    out.J6_op += w * s.J6_op;
    out.J7_op += w * s.J7_op;
    out.K5_op += w * s.K5_op;
    const double mu = s.value.head<3>().norm(), mw = s.value.tail<3>().norm();
    out.u2_l1 += w * mu;
    out.omega2_l1 += w * mw;
    const double rho = s.xi.norm();
    for (int j = kLo; j <= kHi; ++j) {
      const double p = DyadicPartition::psi_j(j, rho);
      bu[j - kLo] += w * p * mu;
      bw[j - kLo] += w * p * mw;
    }
    out.J1_integrand_min = std::min(out.J1_integrand_min, s.J1_integrand_min);
    out.K11_integrand_min = std::min(out.K11_integrand_min, s.K11_integrand_min);
  }
  for (int j = kLo; j <= kHi; ++j) {
    out.u2_fb_partial = std::max(out.u2_fb_partial, std::ldexp(bu[j - kLo], -j));
    out.omega2_fb_partial = std::max(out.omega2_fb_partial, std::ldexp(bw[j - kLo], -j));
  }
  return out;
}

NormSpace parse_space(const std::string& s) {
  if (s == "fb" || s == "fourier_besov") return NormSpace::FourierBesov;
  if (s == "besov" || s == "besov_infty") return NormSpace::BesovInfty;
  throw Error(ErrorCode::Config, "unknown space '" + s + "' (expected fb or besov)");
}

std::string to_string(NormSpace s) { return s == NormSpace::FourierBesov ? "fourier_besov" : "besov_infty"; }

double besov_infty_norm_cubes(const SpectralField& f, double s, double r, const DyadicPartition& part) {
  if (f.is_lattice()) return besov_norm(f, s, kInf, r, part);
  std::vector<double> blocks;
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    std::vector<std::size_t> idx;
    std::vector<double> psi;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double p = DyadicPartition::psi_j(j, f.frequency(i).norm());
      if (p > 0.0 && f.magnitude(i) > 0.0) {
        idx.push_back(i);
        psi.push_back(p * f.weight(i));
      }
    }
    double sup = 0.0;
    if (!idx.empty()) {
      // Probe grid: x2 over two carrier periods of scale 2^j, x1 and x3 over
      // the envelope width of a unit-size support.
      constexpr int n2 = 33, n13 = 5;
      const double L2 = 2.0 * kPi / pow2(j), L13 = 0.5;
      for (int a = 0; a < n13; ++a)
        for (int b = 0; b < n2; ++b)
          for (int c = 0; c < n13; ++c) {
            const Vec3 x(-L13 + 2.0 * L13 * a / (n13 - 1), -L2 + 2.0 * L2 * b / (n2 - 1),
                         -L13 + 2.0 * L13 * c / (n13 - 1));
            Vec6c v = Vec6c::Zero();
            for (std::size_t m = 0; m < idx.size(); ++m) {
              const double ph = f.frequency(idx[m]).dot(x);
              v += psi[m] * Cplx(std::cos(ph), std::sin(ph)) * f.value(idx[m]);
            }
            sup = std::max(sup, kInvTwoPiCubed * v.norm());
          }
    }
    blocks.push_back(sup);
  }
  return lr_combine(blocks, part.j_min(), s, r);
}

namespace {

SpectralField propagate_field(const SpectralField& f, double t) {
  SpectralField out = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3 xi = f.frequency(i);
    out.set_value(i, spectral_apply(xi, exp_weights(xi.squaredNorm(), t), f.value(i)));
  }
  return out;
}

double space_norm(const SpectralField& f, double r, NormSpace space, const DyadicPartition& part) {
  return space == NormSpace::FourierBesov ? fb_norm(f, -1.0, 1.0, r, part) : besov_infty_norm_cubes(f, -1.0, r, part);
}

}  // namespace

InflationReport inflation_experiment(int N, double delta, double r, NormSpace space, const InflationOptions& opt) {
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidParameter, "r must lie in [1, inf]");
  InflationReport rep;
  rep.N = N;
  rep.delta = delta;
  rep.r = r;
  rep.space = space;
  const InitialData data = build_initial_data(N, delta, opt.data_order);
  if (delta > 0.1)
    rep.warnings.push_back("outside perturbative regime: delta > 0.1, higher iterates may contaminate A_2");
  rep.t = opt.t_factor * std::pow(4.0, -N);
  if (!(rep.t > 0.0) || !std::isfinite(rep.t))
    throw Error(ErrorCode::InvalidTime, "t_N below the time-quadrature resolution");
  const Rule1D tau = second_iterate_tau_rule(data.datum, rep.t, opt.iterate);
  if (tau.nodes.front() <= 0.0) throw Error(ErrorCode::InvalidTime, "t_N below the time-quadrature resolution");

  const DyadicPartition part = datum_partition(data.datum);
  rep.data_norm = space_norm(data.field, r, space, part);
  rep.a1_norm = space_norm(propagate_field(data.field, rep.t), r, space, part);
  rep.terms = term_norms_on_E(data.datum, rep.t, opt.e_order, opt.iterate);
  if (space == NormSpace::FourierBesov) {
    rep.u2_surrogate = rep.terms.u2_fb_partial;
    rep.omega2_surrogate = rep.terms.omega2_fb_partial;
  } else {
    rep.u2_surrogate = kInvTwoPiCubed * rep.terms.u2_l1;
    rep.omega2_surrogate = kInvTwoPiCubed * rep.terms.omega2_l1;
    const ObservationRegion reg;
    SecondIterateOptions o = opt.iterate;
    o.self_check = 0;
    const auto bar = second_iterate(data.datum, rep.t, reg.e_bar_samples(opt.e_bar_per_axis), o);
    double jmin = kInf, jmax = 0.0, umin = kInf, umax = 0.0, wmin = kInf, wmax = 0.0;
    for (const auto& s : bar.samples) {
      jmin = std::min({jmin, s.J1_integrand_min, s.K11_integrand_min});
      jmax = std::max({jmax, s.J1_integrand_max, s.K11_integrand_max});
      const double pu = (Cplx(0.0, 1.0) * s.value[0]).real(), pw = (Cplx(0.0, 1.0) * s.value[3]).real();
      umin = std::min(umin, pu);
      wmin = std::min(wmin, pw);
      umax = std::max(umax, std::abs(pu));
      wmax = std::max(wmax, std::abs(pw));
    }
    rep.leading_integrand_min = jmax > 0.0 ? jmin / jmax : jmin;
    rep.leading_sign_ok = rep.leading_integrand_min >= -1e-12;
    rep.u2_negative_part = umax > 0.0 ? std::max(0.0, -umin) / umax : 0.0;
    rep.omega2_negative_part = wmax > 0.0 ? std::max(0.0, -wmin) / wmax : 0.0;
  }
  rep.ratio = rep.data_norm > 0.0 ? rep.u2_surrogate / rep.data_norm : 0.0;
  rep.omega_ratio = rep.data_norm > 0.0 ? rep.omega2_surrogate / rep.data_norm : 0.0;
  rep.surrogate_positive = rep.u2_surrogate > 0.0 && rep.omega2_surrogate > 0.0;
  rep.accurate = rep.terms.self_error <= opt.iterate.tolerance;
  return rep;
}

LatticeGrid cross_check_grid(const IllposedDatum& d, int level) {
  if (level < 1) throw Error(ErrorCode::InvalidParameter, "refinement level must be >= 1");
  LatticeGrid g;
  g.h = Vec3(1.0 / 16.0, 0.25, 1.0 / 16.0) / level;
  const Vec3 ext(2.0, pow2(d.j_hi) + 2.0, 2.0);
  for (int a = 0; a < 3; ++a) g.n[a] = 2 * static_cast<int>(std::lround(ext[a] / g.h[a]));
  return g;
}

SpectralField datum_on_lattice(const IllposedDatum& d, const LatticeGrid& g) {
  SpectralField f = SpectralField::on_lattice(g);
  for (int j = d.j_lo; j <= d.j_hi; ++j)
    for (int sign : {1, -1}) {
      const Box b = IllposedDatum::cube(j, sign);
      std::array<int, 3> lo{}, hi{};
      for (int a = 0; a < 3; ++a) {
        lo[a] = static_cast<int>(std::ceil(b.lo[a] / g.h[a] - 1e-9));
        hi[a] = static_cast<int>(std::floor(b.hi[a] / g.h[a] + 1e-9));
        if (lo[a] < -g.n[a] / 2 || hi[a] >= g.n[a] / 2)
          throw Error(ErrorCode::Resolution, "lattice does not contain the data cubes");
      }
      auto face = [&](int a, int m) {
        const double x = m * g.h[a];
        return (std::abs(x - b.lo[a]) < 1e-9 || std::abs(x - b.hi[a]) < 1e-9) ? 0.5 : 1.0;
      };
      for (int m0 = lo[0]; m0 <= hi[0]; ++m0)
        for (int m1 = lo[1]; m1 <= hi[1]; ++m1)
          for (int m2 = lo[2]; m2 <= hi[2]; ++m2) {
            const std::size_t i = g.index(m0, m1, m2);
            const double w = face(0, m0) * face(1, m1) * face(2, m2);
            f.set_value(i, f.value(i) + w * d.cube_value(g.frequency(i), j));
          }
    }
  f.real_valued = true;
  f.divergence_free = true;
  return f;
}

CrossCheckResult grid_cross_check(int N, double delta, const std::vector<int>& levels, int samples,
                                  const SecondIterateOptions& opt) {
  if (N < 2 || N > 3) throw Error(ErrorCode::Resolution, "lattice path only resolves N = 2 or 3");
  if (samples < 1) throw Error(ErrorCode::InvalidParameter, "need at least one sample");
  const IllposedDatum d = make_datum(N, delta);
  CrossCheckResult res;
  res.N = N;
  res.delta = delta;
  res.t = std::pow(4.0, -N);

  // Lattice points of the coarse level inside E; they lie on every finer level.
  const LatticeGrid g1 = cross_check_grid(d, 1);
  const ObservationRegion reg;
  std::vector<Vec3> candidates;
  for (int m0 = 0; m0 < g1.n[0] / 2; ++m0)
    for (int m1 = 0; m1 < g1.n[1] / 2; ++m1)
      for (int m2 = 0; m2 < g1.n[2] / 2; ++m2) {
        const Vec3 xi(m0 * g1.h[0], m1 * g1.h[1], m2 * g1.h[2]);
        if (reg.in_E(xi)) candidates.push_back(xi);
      }
  if (candidates.empty()) throw Error(ErrorCode::Resolution, "no lattice point inside E");
  const int count = std::min<int>(samples, static_cast<int>(candidates.size()));
  for (int k = 0; k < count; ++k)
    res.samples.push_back(candidates[(static_cast<std::size_t>(k) * candidates.size()) / count]);

  SecondIterateOptions o = opt;
  o.tau_rule = second_iterate_tau_rule(d, res.t, opt);
  const SecondIterateResult cube = second_iterate(d, res.t, res.samples, o);

  for (int level : levels) {
    const LatticeGrid g = cross_check_grid(d, level);
    SolverConfig cfg;
    cfg.points = g.n;
    cfg.half_extent = g.half_extent();
    cfg.dealias_fraction = 1.0;
    cfg.T = res.t;
    cfg.dt = res.t;
    double dev = 0.0;
    {
      const SpectralField f = datum_on_lattice(d, g);
      const SpectralField A2 = std::move(picard_terms(f, res.t, 2, cfg, PicardTimeRule{o.tau_rule})[1]);
      for (std::size_t k = 0; k < res.samples.size(); ++k) {
        const Vec3& xi = res.samples[k];
        const std::size_t i = g.index(static_cast<int>(std::lround(xi[0] / g.h[0])),
                                      static_cast<int>(std::lround(xi[1] / g.h[1])),
                                      static_cast<int>(std::lround(xi[2] / g.h[2])));
        const Vec6c ref = cube.samples[k].value;
        dev = std::max(dev, (A2.value(i) - ref).norm() / ref.norm());
      }
    }
    res.levels.push_back({g.n, g.h, dev});
  }
  return res;
}

}  // namespace mpfb
