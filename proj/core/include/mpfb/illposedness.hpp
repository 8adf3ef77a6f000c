#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mpfb/littlewood_paley.hpp"
#include "mpfb/mild_solver.hpp"
#include "mpfb/quadrature.hpp"
#include "mpfb/spectral_field.hpp"

namespace mpfb {

/// The data f^N = (u0^N, omega0^N): on each side-2 cube C_j^{+-} centred at
/// +-2^j e2, j = N..floor(3N/2)+1,
///   u0^ = (i delta 2^j / sqrt N) (xi2, -xi1, 0) / |xi|,
///   w0^ = (i delta 2^j / sqrt N) (xi2, 0, 0) / |xi|.
struct IllposedDatum {
  int N = 2;
  double delta = 0.05;
  int j_lo = 2;
  int j_hi = 4;

  int cube_count() const noexcept { return 2 * (j_hi - j_lo + 1); }
  /// Cube of scale j on side sign = +1 or -1.
  static Box cube(int j, int sign);
  /// C_{j_lo}^+, C_{j_lo}^-, C_{j_lo+1}^+, ...
  std::vector<Box> cubes() const;
  /// Formula value of the single cube (j, sign), ignoring the indicator.
  Vec6c cube_value(const Vec3& xi, int j) const;
  /// Full value: sum over cubes whose closed support contains xi.
  Vec6c value(const Vec3& xi) const;
};

IllposedDatum make_datum(int N, double delta);

struct InitialData {
  IllposedDatum datum;
  SpectralField field;  // cube-quadrature representation
};

/// Samples f^N on a tensor Gauss rule of the given order in every cube.
InitialData build_initial_data(int N, double delta, int order = 8);

/// Observation box E = [1/10, 1/2]^3 and its enlargement
/// E_bar = {1/20 <= xi1 <= 11/10, |xi| <= 11/10}.
struct ObservationRegion {
  Box E{Vec3::Constant(0.1), Vec3::Constant(0.5)};

  bool in_E(const Vec3& xi) const { return E.contains(xi, 1e-12); }
  bool in_E_bar(const Vec3& xi) const;
  /// Smallest j0 with sum_{|j|<=j0} psi_j = 1 on E.
  int j0() const;
  /// min over E of 1 - xi1^2/|xi|^2 (attained at a corner).
  double transverse_floor() const;
  std::vector<Node3> nodes(int order) const { return tensor_gauss(E, order); }
  /// Tensor grid of the bounding box of E_bar, filtered to E_bar.
  std::vector<Vec3> e_bar_samples(int per_axis) const;
};

double j1_kernel(const Vec3& xi, const Vec3& eta);
double k11_kernel(const Vec3& xi, const Vec3& eta);

/// Intersection of C_j^{-sign} with xi - C_j^{sign}: the eta-region where
/// xi - eta lies on the sign side and eta on the opposite side.
Box overlap_box(const Vec3& xi, int j, int sign);

enum class KernelKind { J1, K11 };

struct KernelRange {
  double min = 0.0;
  double max = 0.0;
  Vec3 argmin_xi, argmin_eta;
  long samples = 0;
};

/// Extremes of the J1 or K11 kernel over (xi, eta) drawn uniformly with xi
/// in E, a random side, and eta uniform in the overlap box.
KernelRange kernel_sign_check(KernelKind kind, int j, long samples, std::uint64_t seed = 1);

struct ScalingFit {
  std::vector<int> N;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log ||f^N||_{FB^{-1}_{1,r}} against log N.
ScalingFit data_norm_scaling(const std::vector<int>& N_list, double delta, double r, int order = 8);

/// Partition covering every cube of the datum with two spare scales on each side.
DyadicPartition datum_partition(const IllposedDatum& d);

struct SecondIterateOptions {
  int eta_order = 6;
  /// Graded tau rule towards tau = 0; panels <= 0 picks j_hi - N + 3 (+ the
  /// panels needed to reach 4^{-(j_hi+1)} when t differs from 4^{-N}).
  int tau_panels = 0;
  int tau_order = 6;
  double tau_ratio = 4.0;
  /// Use this tau rule on [0, t] instead of the graded one.
  Rule1D tau_rule;
  /// Samples re-evaluated with both orders raised by 2 for the error estimate.
  int self_check = 1;
  double tolerance = 0.01;
};

/// Second iterate at one frequency with its term decomposition. Signed terms
/// follow the solver's sign (A_2 = -int G B dtau) and sum exactly to the
/// first velocity (J) and first micro-rotation (K) components of value.
struct SecondIterateSample {
  Vec3 xi;
  Vec6c value = Vec6c::Zero();
  std::array<Cplx, 7> J_signed{};
  std::array<Cplx, 5> K_signed{};
  std::array<Cplx, 3> K1_signed{};  // K11, K12, K13
  /// Magnitudes: J1..J4, K1..K4, K11..K13 are |signed|; J5, J6, J7, K5 use
  /// the entrywise |G_r| convention, the *_op fields the operator norm.
  std::array<double, 7> J{};
  std::array<double, 5> K{};
  std::array<double, 3> K1{};
  double J23 = 0.0;  // |J2 + J3|
  double J5_op = 0.0, J6_op = 0.0, J7_op = 0.0, K5_op = 0.0;
  /// Extremes of the phase-aligned (times i) J1 and K11 integrands over all
  /// (tau, eta) nodes; both are nonnegative when the leading sign holds.
  double J1_integrand_min = 0.0, J1_integrand_max = 0.0;
  double K11_integrand_min = 0.0, K11_integrand_max = 0.0;
};

struct SecondIterateResult {
  std::vector<SecondIterateSample> samples;
  double self_error = 0.0;
  std::size_t tau_nodes = 0;
};

Rule1D second_iterate_tau_rule(const IllposedDatum& d, double t, const SecondIterateOptions& opt);

/// F[A_2(f^N)(t)](xi) = -(2pi)^{-3} int_0^t G(xi,t-tau) P~ (i xi .)[G f^ * G f^](tau) dtau
/// by tensor Gauss rules on the overlap boxes and a Gauss rule in tau.
SecondIterateResult second_iterate(const IllposedDatum& d, double t, const std::vector<Vec3>& xi_samples,
                                   const SecondIterateOptions& opt = {});

/// L^1(E) norms of the second iterate and of every term.
struct TermNorms {
  std::array<double, 7> J{};
  std::array<double, 5> K{};
  std::array<double, 3> K1{};
  double J23 = 0.0;
  double J5_op = 0.0, J6_op = 0.0, J7_op = 0.0, K5_op = 0.0;
  double u2_l1 = 0.0;       // int_E |F[u_2]|
  double omega2_l1 = 0.0;   // int_E |F[omega_2]|
  double u2_fb_partial = 0.0;      // max_j 2^{-j} int_E psi_j |F[u_2]|
  double omega2_fb_partial = 0.0;
  double J1_integrand_min = 0.0, K11_integrand_min = 0.0;
  double self_error = 0.0;
};

TermNorms term_norms_on_E(const IllposedDatum& d, double t, int e_order = 4, const SecondIterateOptions& opt = {});

enum class NormSpace { FourierBesov, BesovInfty };

NormSpace parse_space(const std::string& s);
std::string to_string(NormSpace s);

/// B^{s}_{inf,r} norm of a cube-represented field: the sup over x of each
/// block is taken over a probe grid around the origin.
double besov_infty_norm_cubes(const SpectralField& f, double s, double r, const DyadicPartition& part);

struct InflationOptions {
  int data_order = 8;
  int e_order = 4;
  double t_factor = 1.0;
  SecondIterateOptions iterate;
  int e_bar_per_axis = 6;
};

struct InflationReport {
  int N = 0;
  double delta = 0.0;
  double r = 0.0;
  NormSpace space = NormSpace::FourierBesov;
  double t = 0.0;
  double data_norm = 0.0;
  double a1_norm = 0.0;
  double u2_surrogate = 0.0;
  double omega2_surrogate = 0.0;
  double ratio = 0.0;        // u2 surrogate / data norm
  double omega_ratio = 0.0;  // omega2 surrogate / data norm
  TermNorms terms;
  /// Leading-term sign check on E_bar (besov mode) and measured negative
  /// part of the phase-aligned full values on E_bar samples, relative to the max.
  double leading_integrand_min = 0.0;
  double u2_negative_part = 0.0;
  double omega2_negative_part = 0.0;
  std::vector<std::string> warnings;
  bool leading_sign_ok = true;
  bool surrogate_positive = false;
  bool accurate = false;
};

InflationReport inflation_experiment(int N, double delta, double r, NormSpace space, const InflationOptions& opt = {});

struct CrossCheckLevel {
  std::array<int, 3> points{};
  Vec3 h = Vec3::Zero();
  double max_deviation = 0.0;
};

struct CrossCheckResult {
  int N = 0;
  double delta = 0.0;
  double t = 0.0;
  std::vector<Vec3> samples;
  std::vector<CrossCheckLevel> levels;
};

/// Lattice for the cross-check at refinement level (1 = coarse): spacing
/// (1/16, 1/4, 1/16) / level, y-extent 2^{j_hi} + 2 and x/z-extent 2.
LatticeGrid cross_check_grid(const IllposedDatum& d, int level);

/// f^N sampled on a lattice, weight 1/2 per axis on cube faces.
SpectralField datum_on_lattice(const IllposedDatum& d, const LatticeGrid& g);

/// A_2(f^N)(t_N) on lattice points of E: cube-quadrature path against the
/// lattice picard_terms path, sharing one Gauss tau rule; one entry per level.
CrossCheckResult grid_cross_check(int N, double delta, const std::vector<int>& levels = {1},
                                  int samples = 32, const SecondIterateOptions& opt = {});

}  // namespace mpfb
