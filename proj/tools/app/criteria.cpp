#include "criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "mpfb/error.hpp"
#include "mpfb/illposedness.hpp"
#include "mpfb/littlewood_paley.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/rng.hpp"
#include "mpfb/semigroup.hpp"

namespace mpfb::app {

namespace {

// Tolerances, fixed here rather than in the config so a run cannot loosen them.
constexpr double kPartitionTol = 1e-10;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kEigenTol = 1e-8;
constexpr double kSemigroupTol = 1e-8;
constexpr double kCommuteTol = 1e-10;
constexpr double kRBlockTol = 1e-12;
constexpr double kDecayTol = 1e-8;
constexpr double kKernelMargin = 1e-9;
constexpr double kSlopeTol = 0.1;
constexpr double kVariationTol = 0.25;
constexpr double kRatioFactor = 1.7;
constexpr double kInflationSlope = 0.5;
constexpr double kInflationSlopeTol = 0.15;
constexpr double kCrossCheckTol = 0.05;
constexpr double kDivergenceTol = 1e-10;
constexpr double kLinearTol = 1e-8;
constexpr double kOrderLo = 3.4, kOrderHi = 4.6;
constexpr double kTruncSlope = 3.0, kTruncSlopeTol = 0.2;
constexpr double kContraction = 0.5;
constexpr double kDelta = 0.05;

Vec3 sample_xi(const CounterRng& rng, std::uint64_t k, double lo, double hi) {
  Vec3 d(rng.normal(8 * k), rng.normal(8 * k + 2), rng.normal(8 * k + 4));
  const double rho = std::exp(rng.uniform(8 * k + 6, std::log(lo), std::log(hi)));
  if (k % 10 == 3) d[0] = 0.0;
  if (k % 10 == 7) d[2] = 0.0;
  return rho * d.normalized();
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (int c = 0; c < kComponents; ++c)
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.component(c)[i] - b.component(c)[i]));
  return m;
}

CriterionResult partition_of_unity(const RunConfig& cfg) {
  CriterionResult r;
  const DyadicPartition part(-4, 10);
  const auto band = part.resolved_band();
  const CounterRng rng(cfg.seed, 1);
  double residual = 0.0, overlap = 0.0;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double rho = std::exp(rng.uniform(k, std::log(band.first), std::log(band.second)));
    double sum = 0.0;
    for (int j = part.j_min(); j <= part.j_max(); ++j) {
      const double pj = DyadicPartition::psi_j(j, rho);
      sum += pj;
      for (int i = j + 2; i <= part.j_max(); ++i) overlap = std::max(overlap, pj * DyadicPartition::psi_j(i, rho));
    }
    residual = std::max(residual, std::abs(sum - 1.0));
  }
  r.add("sum_psi_residual", residual, -kInf, kPartitionTol);
  r.add("psi_j_psi_k_far", overlap, -kInf, 0.0);

  // The same on blocks of a lattice field.
  SolverConfig sc = cfg.solver();
  const LatticeGrid g = sc.grid();
  const DyadicPartition lp = partition_covering(g);
  const SpectralField f = random_solenoidal_field(g, cfg.seed, 0.0, g.half_extent().minCoeff(), 1.0);
  double block = 0.0;
  for (int j = lp.j_min(); j <= lp.j_max(); ++j) {
    const SpectralField fj = apply_block(f, j, lp);
    for (int k = j + 2; k <= lp.j_max(); ++k) block = std::max(block, apply_block(fj, k, lp).max_abs());
  }
  r.add("delta_j_delta_k_far", block, -kInf, 0.0);
  return r;
}

CriterionResult symbol_algebra(const RunConfig& cfg) {
  CriterionResult r;
  const CounterRng rng(cfg.seed, 2);
  double herm = 0.0, trace = 0.0, eig = 0.0;
  int fallback = 0;
  for (int k = 0; k < cfg.semigroup_samples; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-3, 1e3);
    const SymbolBundle b = build_symbol(xi);
    const double amax = b.A.cwiseAbs().maxCoeff();
    herm = std::max(herm, (b.A - b.A.adjoint()).cwiseAbs().maxCoeff() / amax);
    const double expect = 7.0 * b.s + 6.0;
    double lsum = 0.0;
    for (double l : b.eigenvalues) lsum += l;
    trace = std::max({trace, std::abs(b.A.trace().real() - expect) / expect, std::abs(lsum - expect) / expect});
    Eigen::SelfAdjointEigenSolver<Mat6c> es(b.A, Eigen::EigenvaluesOnly);
    std::array<double, 6> closed = b.eigenvalues;
    std::sort(closed.begin(), closed.end());
    double scale = 0.0, d = 0.0;
    for (int i = 0; i < 6; ++i) {
      scale = std::max(scale, std::abs(closed[i]));
      d = std::max(d, std::abs(closed[i] - es.eigenvalues()[i]));
    }
    eig = std::max(eig, d / scale);
    fallback += b.fallback ? 1 : 0;
  }
  r.add("hermitian_residual", herm, -kInf, kHermitianTol);
  r.add("trace_relative_error", trace, -kInf, kTraceTol);
  r.add("eigenvalue_relative_error", eig, -kInf, kEigenTol);
  r.add("fallback_samples", fallback, 1.0, kInf);
  return r;
}

CriterionResult semigroup_correctness(const RunConfig& cfg) {
  CriterionResult r;
  const CounterRng rng(cfg.seed, 3);
  double oracle = 0.0, compose = 0.0, commute = 0.0, main = 0.0, rblock = 0.0;
  for (int k = 0; k < cfg.semigroup_samples; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-2, 3.0);
    const double t = rng.uniform(8 * k + 7, 0.0, 10.0);
    const SymbolBundle b = build_symbol(xi);
    const Mat6c G = semigroup_matrix(b, t);
    oracle = std::max(oracle, (G - matrix_exp_oracle(-t * b.A, 1e-12)).cwiseAbs().maxCoeff());
    const double s1 = rng.uniform(8 * k + 1, 0.0, 5.0), s2 = rng.uniform(8 * k + 3, 0.0, 5.0);
    compose = std::max(compose, (semigroup_matrix(b, s1 + s2) - semigroup_matrix(b, s1) * semigroup_matrix(b, s2))
                                    .cwiseAbs()
                                    .maxCoeff());
    commute = std::max(commute, (b.A1 * b.A2 - b.A2 * b.A1).cwiseAbs().maxCoeff() / b.A.cwiseAbs().maxCoeff());
    const auto [Gm, Gr] = split_main_remainder(b, t);
    main = std::max(main, (Gm - matrix_exp_oracle(-t * b.A1, 1e-12)).cwiseAbs().maxCoeff());
    // Entrywise R_kl = e^{-ts}(delta_kl - xi_k xi_l / s) + e^{-2ts} xi_k xi_l / s.
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        const double p = xi[a] * xi[c] / b.s;
        const double ref = std::exp(-t * b.s) * ((a == c ? 1.0 : 0.0) - p) + std::exp(-2.0 * t * b.s) * p;
        rblock = std::max(rblock, std::abs(Gm(3 + a, 3 + c) - ref));
      }
  }
  r.add("q_path_vs_oracle", oracle, -kInf, kSemigroupTol);
  r.add("composition", compose, -kInf, kSemigroupTol);
  r.add("a1_a2_commutator", commute, -kInf, kCommuteTol);
  r.add("main_part_vs_exp_a1", main, -kInf, kSemigroupTol);
  r.add("r_block_closed_form", rblock, -kInf, kRBlockTol);
  return r;
}

CriterionResult decay_rate(const RunConfig& cfg) {
  CriterionResult r;
  const CounterRng rng(cfg.seed, 4);
  double err = 0.0, margin = kInf, printed = 0.0;
  for (int k = 0; k < cfg.semigroup_samples; ++k) {
    const Vec3 xi = sample_xi(rng, k, 1e-2, 30.0);
    const double t = rng.uniform(8 * k + 7, 0.0, 2.0);
    const SymbolBundle b = build_symbol(xi);
    Eigen::JacobiSVD<Mat6c> svd(semigroup_matrix(b, t));
    const double op = svd.singularValues()[0];
    const double lmin = lambda_min(b.s);
    const double expect = std::exp(-t * lmin);
    err = std::max(err, std::abs(op - expect) / std::max(expect, 1e-12));
    margin = std::min(margin, lmin - 0.5 * b.s);
    if (std::exp(-t * b.s) > 0.0) printed = std::max(printed, op / std::exp(-t * b.s));
  }
  r.add("op_norm_vs_exp_lambda_min", err, -kInf, kDecayTol);
  r.add("lambda_min_minus_half_s", margin, 0.0, kInf);
  r.info.push_back({"max_op_norm_over_exp_minus_t_s", printed});
  return r;
}

CriterionResult kernel_bounds(const RunConfig& cfg) {
  CriterionResult r;
  double j1min = kInf, j1max = -kInf, kmin = kInf, kmax = -kInf;
  for (int j = 2; j <= 8; ++j) {
    const KernelRange a = kernel_sign_check(KernelKind::J1, j, cfg.kernel_samples, cfg.seed);
    const KernelRange b = kernel_sign_check(KernelKind::K11, j, cfg.kernel_samples, cfg.seed);
    j1min = std::min(j1min, a.min);
    j1max = std::max(j1max, a.max);
    kmin = std::min(kmin, b.min);
    kmax = std::max(kmax, b.max);
  }
  r.add("j1_min", j1min, -1.0 - kKernelMargin, kInf);
  r.add("j1_max", j1max, -kInf, -1.0 / 16.0 + kKernelMargin);
  r.add("k11_min", kmin, -2.0 - kKernelMargin, kInf);
  r.add("k11_max", kmax, -kInf, -1.0 / 256.0 + kKernelMargin);
  return r;
}

CriterionResult data_norm_exponents(const RunConfig& cfg) {
  CriterionResult r;
  const std::vector<int> Ns{4, 6, 8, 10, 12};
  for (const auto& [name, rr] : std::vector<std::pair<std::string, double>>{{"r2", 2.0}, {"r4", 4.0}, {"rinf", kInf}}) {
    const ScalingFit fit = data_norm_scaling(Ns, kDelta, rr, cfg.quadrature_gauss_order);
    const double expect = (std::isinf(rr) ? 0.0 : 1.0 / rr) - 0.5;
    r.add("slope_" + name, fit.slope, expect - kSlopeTol, expect + kSlopeTol);
  }
  return r;
}

std::vector<TermNorms> term_norms_N345(const RunConfig& cfg) {
  std::vector<TermNorms> out;
  for (int N = 3; N <= 5; ++N)
    out.push_back(term_norms_on_E(make_datum(N, kDelta), std::pow(4.0, -N), cfg.quadrature_e_order,
                                  cfg.iterate_options()));
  return out;
}

CriterionResult j_hierarchy(const RunConfig& cfg) {
  CriterionResult r;
  const auto tn = term_norms_N345(cfg);
  const double d2 = kDelta * kDelta;
  std::vector<double> j1;
  for (const auto& t : tn) j1.push_back(t.J[0] / d2);
  r.add("j1_over_delta2_min", *std::min_element(j1.begin(), j1.end()), 0.0, kInf);
  r.add("j1_variation", variation(j1), -kInf, kVariationTol);
  for (int k = 0; k < 2; ++k) {
    const int N = 3 + k;
    const std::string step = "_N" + std::to_string(N) + "_to_" + std::to_string(N + 1);
    auto ratio = [&](const std::string& name, double a, double b, double theory) {
      r.add(name + step, b / a, theory / kRatioFactor, theory * kRatioFactor);
    };
    ratio("j2_plus_j3_ratio", tn[k].J23, tn[k + 1].J23, 0.5 * N / (N + 1.0));
    ratio("j4_ratio", tn[k].J[3], tn[k + 1].J[3], 0.25);
    ratio("j5_plus_j6_ratio", tn[k].J[4] + tn[k].J[5], tn[k + 1].J[4] + tn[k + 1].J[5], std::sqrt(0.5));
    ratio("j7_ratio", tn[k].J[6], tn[k + 1].J[6], 0.25);
  }
  for (int k = 0; k < 3; ++k) {
    const std::string n = "_N" + std::to_string(3 + k);
    r.info.push_back({"j1_over_delta2" + n, j1[k]});
    r.info.push_back({"j5_plus_j6_opnorm_over_delta2" + n, (tn[k].J5_op + tn[k].J6_op) / d2});
    r.info.push_back({"self_error" + n, tn[k].self_error});
  }
  return r;
}

CriterionResult inflation_dichotomy(const RunConfig& cfg, const Calibration& cal) {
  CriterionResult r;
  const InflationOptions opt = cfg.inflation_options();
  std::vector<double> Ns, ratio_inf, omega_inf, data2, ratio2;
  for (int N = 3; N <= 5; ++N) {
    const InflationReport a = inflation_experiment(N, kDelta, kInf, NormSpace::FourierBesov, opt);
    const InflationReport b = inflation_experiment(N, kDelta, 2.0, NormSpace::FourierBesov, opt);
    Ns.push_back(N);
    ratio_inf.push_back(a.ratio);
    omega_inf.push_back(a.omega2_surrogate / (kDelta * kDelta));
    data2.push_back(b.data_norm);
    ratio2.push_back(b.ratio);
    r.info.push_back({"data_norm_rinf_N" + std::to_string(N), a.data_norm});
    r.info.push_back({"u2_surrogate_N" + std::to_string(N), a.u2_surrogate});
  }
  r.add("rinf_ratio_log_slope", log_slope(Ns, ratio_inf), kInflationSlope - kInflationSlopeTol,
        kInflationSlope + kInflationSlopeTol);
  r.add("omega2_over_delta2_min", *std::min_element(omega_inf.begin(), omega_inf.end()), 0.5 * cal.c0, kInf);
  r.add("r2_data_norm_variation", variation(data2), -kInf, kVariationTol);
  r.add("r2_ratio_variation", variation(ratio2), -kInf, kVariationTol);
  return r;
}

CriterionResult path_equivalence(const RunConfig& cfg) {
  CriterionResult r;
  const CrossCheckResult cc =
      grid_cross_check(2, kDelta, cfg.crosscheck_levels, cfg.crosscheck_samples, cfg.iterate_options());
  r.add("deviation_level_" + std::to_string(cfg.crosscheck_levels.front()), cc.levels.front().max_deviation, -kInf,
        kCrossCheckTol);
  if (cc.levels.size() > 1)
    r.add("refined_over_coarse", cc.levels.back().max_deviation / cc.levels.front().max_deviation, -kInf,
          1.0 - 1e-12);
  for (const auto& l : cc.levels)
    r.info.push_back({"points_" + std::to_string(l.points[0]) + "x" + std::to_string(l.points[1]) + "x" +
                          std::to_string(l.points[2]),
                      l.max_deviation});
  return r;
}

CriterionResult solver_contracts(const RunConfig& cfg) {
  CriterionResult r;
  SolverConfig sc = cfg.solver();
  const LatticeGrid g = sc.grid();
  const double band = sc.dealias_fraction * g.half_extent().minCoeff();

  const SpectralField U0 = random_solenoidal_field(g, cfg.seed + 5, 0.1 * band, 0.7 * band, 1.0);
  const Trajectory nl = solve_mild(U0, sc);
  double div = 0.0;
  for (const auto& d : nl.diagnostics) div = std::max({div, d.divergence_residual, d.hermitian_residual});
  r.add("divergence_hermitian_residual", div, -kInf, kDivergenceTol);

  SolverConfig lin = sc;
  lin.nonlinear = false;
  const Trajectory lt = solve_mild(U0, lin);
  double lerr = 0.0;
  for (std::size_t k = 0; k < lt.times.size(); ++k)
    lerr = std::max(lerr, max_abs_diff(lt.states[k], linear_propagate(U0, lt.times[k])));
  r.add("linear_consistency", lerr, -kInf, kLinearTol);

  // Order study on strongly nonlinear data so that the flux error dominates.
  SolverConfig oc = sc;
  oc.T = 0.5;
  oc.save_stride = 1 << 20;
  const SpectralField V0 = random_solenoidal_field(g, cfg.seed + 5, 0.1 * band, 0.5 * band, 40.0);
  auto final_state = [&](double dt) {
    SolverConfig c = oc;
    c.dt = dt;
    return solve_mild(V0, c).states.back();
  };
  const double dt = 1.0 / 64.0;
  const SpectralField ref = final_state(dt / 8);
  const double e1 = max_abs_diff(final_state(dt), ref), e2 = max_abs_diff(final_state(dt / 2), ref);
  r.add("self_convergence_ratio", e1 / e2, kOrderLo, kOrderHi);

  const DyadicPartition part = sc.partition();
  const SpectralField f = random_solenoidal_field(g, cfg.seed + 7, 0.1 * band, 0.5 * band, 1.0);
  const double t = sc.T;
  std::vector<double> ds, es;
  for (double d : {0.02, 0.04, 0.08}) {
    SpectralField fd = f;
    fd.scale(d * 200.0);
    const SpectralField U = solve_mild(fd, sc).states.back();
    const auto p = picard_terms(fd, t, 2, sc);
    SpectralField rem = U;
    rem.axpy(-1.0, p[0]);
    rem.axpy(-1.0, p[1]);
    ds.push_back(d);
    es.push_back(fb_norm(rem, -1.0, 1.0, 2.0, part));
  }
  r.add("picard_truncation_slope", log_slope(ds, es), kTruncSlope - kTruncSlopeTol, kTruncSlope + kTruncSlopeTol);
  return r;
}

CriterionResult small_data(const RunConfig& cfg, const Calibration& cal) {
  CriterionResult r;
  const SmallDataResult a = run_smalldata(cfg, cal);
  double worst = 0.0;
  for (double q : a.ratios) worst = std::max(worst, q);
  r.add("max_successive_ratio", worst, -kInf, kContraction);
  r.add("solution_norm_over_bound", a.solution_norm / a.bound, -kInf, 1.0 - 1e-12);
  const std::string first = serialize(a), second = serialize(run_smalldata(cfg, cal));
  r.add("rerun_bytes_differ", first == second ? 0.0 : 1.0, -kInf, 0.0);
  r.info.push_back({"epsilon", a.epsilon});
  r.info.push_back({"data_norm", a.data_norm});
  return r;
}

}  // namespace

bool CriterionResult::pass() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void CriterionResult::add(const std::string& name, double measured, double lo, double hi) {
  checks.push_back({name, measured, lo, hi, std::isfinite(measured) && measured >= lo && measured <= hi});
}

std::string criterion_key(int id) {
  static const char* keys[] = {"partition_of_unity", "symbol_algebra",   "semigroup_correctness",
                               "decay_rate",         "kernel_sign_bounds", "data_norm_scaling",
                               "j_term_hierarchy",   "inflation_dichotomy", "path_equivalence",
                               "solver_contracts",   "small_data_fixed_point"};
  if (id < 1 || id > kCriterionCount) throw Error(ErrorCode::InvalidParameter, "criterion id out of range");
  return keys[id - 1];
}

CriterionResult run_criterion(int id, const RunConfig& cfg, const Calibration& cal) {
  CriterionResult r;
  switch (id) {
    case 1: r = partition_of_unity(cfg); break;
    case 2: r = symbol_algebra(cfg); break;
    case 3: r = semigroup_correctness(cfg); break;
    case 4: r = decay_rate(cfg); break;
    case 5: r = kernel_bounds(cfg); break;
    case 6: r = data_norm_exponents(cfg); break;
    case 7: r = j_hierarchy(cfg); break;
    case 8: r = inflation_dichotomy(cfg, cal); break;
    case 9: r = path_equivalence(cfg); break;
    case 10: r = solver_contracts(cfg); break;
    case 11: r = small_data(cfg, cal); break;
    default: throw Error(ErrorCode::InvalidParameter, "criterion id out of range");
  }
  r.id = id;
  r.key = criterion_key(id);
  return r;
}

std::string summary_line(const CriterionResult& r) {
  std::ostringstream s;
  char head[64];
  std::snprintf(head, sizeof head, "C%-2d %s  %-24s", r.id, r.pass() ? "PASS" : "FAIL", r.key.c_str());
  s << head;
  for (const auto& c : r.checks) {
    char buf[200], lo[32] = "", hi[32] = "";
    if (!std::isinf(c.lo)) std::snprintf(lo, sizeof lo, "%.4g", c.lo);
    if (!std::isinf(c.hi)) std::snprintf(hi, sizeof hi, "%.4g", c.hi);
    std::snprintf(buf, sizeof buf, " %s%s=%.4g[%s,%s]", c.pass ? "" : "!", c.name.c_str(), c.measured, lo, hi);
    s << buf;
  }
  return s.str();
}

SmallDataResult run_smalldata(const RunConfig& cfg, const Calibration& cal) {
  if (!(cal.epsilon > 0.0) || !(cal.c1_hat > 0.0))
    throw Error(ErrorCode::Config, "calibration lacks epsilon or c1_hat");
  SolverConfig sc = cfg.solver();
  sc.r = 2.0;
  sc.alpha = 0.5;
  const LatticeGrid g = sc.grid();
  const DyadicPartition part = sc.partition();
  const double band = sc.dealias_fraction * g.half_extent().minCoeff();
  SpectralField U0 = random_solenoidal_field(g, cfg.seed + 11, 0.15 * band, 0.7 * band, 1.0);
  SmallDataResult out;
  out.epsilon = cal.epsilon;
  U0.scale(0.9 * cal.epsilon / fb_norm(U0, -1.0, 1.0, 2.0, part));
  out.data_norm = fb_norm(U0, -1.0, 1.0, 2.0, part);
  const int steps = std::max(4, static_cast<int>(std::ceil(sc.T / sc.dt - 1e-9)));
  const PicardFixedPoint fp = picard_fixed_point(U0, sc.T, steps, 4, sc);
  out.linear_norm = fp.linear_norm;
  out.solution_norm = fp.solution_norm;
  out.bound = 1.0 / (2.0 * cal.c1_hat);
  out.increments = fp.increments;
  out.ratios = fp.ratios;
  return out;
}

std::string serialize(const SmallDataResult& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["data_norm"] = r.data_norm;
  j["linear_norm"] = r.linear_norm;
  j["solution_norm"] = r.solution_norm;
  j["bound"] = r.bound;
  j["increments"] = r.increments;
  j["ratios"] = r.ratios;
  return j.dump(2) + "\n";
}

double variation(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi > 0.0 ? (*hi - *lo) / *hi : kInf;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mpfb::app
