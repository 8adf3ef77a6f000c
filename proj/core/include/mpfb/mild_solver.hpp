#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mpfb/error.hpp"
#include "mpfb/littlewood_paley.hpp"
#include "mpfb/quadrature.hpp"
#include "mpfb/spectral_field.hpp"

namespace mpfb {

struct SolverConfig {
  std::array<int, 3> points{16, 16, 16};
  Vec3 half_extent = Vec3::Constant(8.0);
  double dt = 1.0 / 64.0;
  double T = 1.0;
  double alpha = 0.5;
  double r = 2.0;
  int picard_depth = 2;
  double dealias_fraction = 2.0 / 3.0;
  /// Flux switch; false gives the linear flow.
  bool nonlinear = true;
  /// Keep every k-th accepted state in the trajectory (the final state is always kept).
  int save_stride = 1;
  /// Partition used for FB diagnostics; derived from the grid when unset.
  std::optional<std::pair<int, int>> partition_range;

  LatticeGrid grid() const { return LatticeGrid::from_extent(points, half_extent); }
  DyadicPartition partition() const;
  void validate() const;
};

/// Partition whose resolved band contains every nonzero mode of the grid.
DyadicPartition partition_covering(const LatticeGrid& grid);

struct StepDiagnostics {
  double time = 0.0;
  double divergence_residual = 0.0;
  double hermitian_residual = 0.0;
  double fb_norm = 0.0;  // FB^{-1}_{1,r}
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<StepDiagnostics> diagnostics;
};

/// Thrown after three halvings of a rejected step; carries what was computed.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, Trajectory partial)
      : Error(ErrorCode::BlowUpSuspected, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

SpectralField leray_project(const SpectralField& f);

/// Zero every mode with |index| > fraction * n/2 along some axis.
void dealias(SpectralField& f, double fraction);

/// F[ P div(u1 (x) u2), div(u1 (x) omega2) ] by FFT products on the lattice;
/// inputs and output are dealiased.
SpectralField bilinear_flux(const SpectralField& U1, const SpectralField& U2, const SolverConfig& cfg);
SpectralField nonlinear_flux(const SpectralField& U, const SolverConfig& cfg);

/// e^{-tA(xi)} applied at every stored frequency.
SpectralField linear_propagate(const SpectralField& U, double t);

/// One ETD2RK step for dU/dt = -A U - F(U). Throws StepTooLarge when the
/// corrector moves a FB^{-1}_{1,r} block norm by more than 20%.
SpectralField duhamel_step(const SpectralField& U, double t, double dt, const SolverConfig& cfg);

Trajectory solve_mild(const SpectralField& U0, const SolverConfig& cfg);

/// Time rule for the Duhamel integrals of picard_terms.
struct PicardTimeRule {
  /// Empty: exponential trapezoid on the uniform grid of step <= cfg.dt,
  /// the same second-order weights the solver uses. Otherwise a Gauss rule
  /// on [0, t] (only n_max <= 2).
  Rule1D gauss;
};

/// A_1..A_{n_max} at time t, with A_n = -sum_{n1+n2=n} int_0^t G(t-tau) B(A_n1, A_n2) dtau
/// so that U = sum_k A_k.
std::vector<SpectralField> picard_terms(const SpectralField& f, double t, int n_max,
                                        const SolverConfig& cfg, const PicardTimeRule& rule = {});

/// Linear evolution G(t)U0 sampled on a uniform grid of n_steps intervals on [0, T].
Trajectory linear_trajectory(const SpectralField& U0, double T, int n_steps);

/// B(U1,U2)(t) = int_0^t G(t-tau) P~div(U1 (x)~ U2)(tau) dtau on the trajectories' common
/// uniform time grid, exponential trapezoid in tau.
Trajectory duhamel_bilinear(const Trajectory& U1, const Trajectory& U2, const SolverConfig& cfg);

/// ||U||_{L~^{2/(1+a)} FB^a_{1,r}} + ||U||_{L~^{2/(1-a)} FB^{-a}_{1,r}}.
double x_alpha_norm(const Trajectory& U, double alpha, double r, const DyadicPartition& part);

/// Difference of two trajectories on the same grid.
Trajectory trajectory_difference(const Trajectory& a, const Trajectory& b);

struct PicardFixedPoint {
  Trajectory solution;
  std::vector<double> increments;  // ||U^{k+1} - U^k||_X
  std::vector<double> ratios;      // increments[k+1] / increments[k]
  double linear_norm = 0.0;        // ||G U0||_X
  double solution_norm = 0.0;      // ||U||_X
};

/// Picard iteration U <- G U0 - B(U,U) on [0, T] with n_steps uniform intervals.
PicardFixedPoint picard_fixed_point(const SpectralField& U0, double T, int n_steps, int iterations,
                                    const SolverConfig& cfg);

struct LocalExistence {
  double T_loc = 0.0;
  double contraction_ratio = 0.0;
};

/// Largest T (bisection) with ||G(t)U0||_{X_T} < 1/(4 c1_hat), and the
/// measured Picard contraction ratio on [0, T_loc].
LocalExistence find_local_existence_time(const SpectralField& U0, const SolverConfig& cfg, double c1_hat);

/// Random real-valued, divergence-free field whose spectrum sits inside the
/// shell [r_lo, r_hi], smoothly tapered, unit maximum amplitude before scaling.
SpectralField random_solenoidal_field(const LatticeGrid& grid, std::uint64_t seed, double r_lo,
                                      double r_hi, double amplitude);

}  // namespace mpfb
