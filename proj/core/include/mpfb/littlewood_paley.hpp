#pragma once

#include <utility>
#include <vector>

#include "mpfb/spectral_field.hpp"

namespace mpfb {

/// Dyadic partition of unity truncated to j_min..j_max.
class DyadicPartition {
 public:
  DyadicPartition(int j_min, int j_max);

  int j_min() const noexcept { return j_min_; }
  int j_max() const noexcept { return j_max_; }
  int count() const noexcept { return j_max_ - j_min_ + 1; }

  /// Radial profile: 1 on [0, 3/4], 0 on [4/3, inf), quintic smoothstep between.
  static double theta(double x) noexcept;
  /// psi(xi) = theta(|xi|/2) - theta(|xi|), as a function of |xi|.
  static double psi(double norm) noexcept { return theta(0.5 * norm) - theta(norm); }
  static double phi(double norm) noexcept { return theta(norm); }
  /// psi(2^-j xi)
  static double psi_j(int j, double norm) noexcept;

  /// sum_{j=j_min}^{j_max} psi(2^-j xi), telescoped.
  double band_sum(double norm) const noexcept;
  /// Shell on which band_sum is exactly one: [2^j_min * 4/3, 2^j_max * 3/4].
  std::pair<double, double> resolved_band() const noexcept;
  /// Scales in range whose annulus meets the shell [r_lo, r_hi].
  std::vector<int> blocks_meeting(double r_lo, double r_hi) const;
  bool contains(int j) const noexcept { return j >= j_min_ && j <= j_max_; }

 private:
  int j_min_;
  int j_max_;
};

DyadicPartition make_partition(int j_min, int j_max);

SpectralField apply_block(const SpectralField& f, int j, const DyadicPartition& part);

/// ||psi(2^-j .) f^||_{L^p} for every j in the partition (index j - j_min).
std::vector<double> block_lp_norms(const SpectralField& f, double p, const DyadicPartition& part);

/// (sum_j (2^{js} b_j)^r)^{1/r}, sup for r = inf.
double lr_combine(const std::vector<double>& blocks, int j_min, double s, double r);

double fb_norm(const SpectralField& f, double s, double p, double r, const DyadicPartition& part);

/// Besov norm with p = inf: blocks are transformed to physical space on the
/// field's own lattice and measured by their maximum modulus.
double besov_norm(const SpectralField& f, double s, double p, double r, const DyadicPartition& part);

/// Chemin-Lerner norm: time integration sits inside the block sum.
double chemin_lerner_norm(const std::vector<SpectralField>& states, const std::vector<double>& times,
                          const std::vector<double>& time_weights, double lambda, double s, double p,
                          double r, double T, const DyadicPartition& part);

/// Per-block time norms ||  ||psi_j f^(t)||_{L^p} ||_{L^lambda(0,T)}, index j - j_min.
std::vector<double> chemin_lerner_blocks(const std::vector<SpectralField>& states,
                                         const std::vector<double>& time_weights, double lambda,
                                         double p, const DyadicPartition& part);

/// Trapezoid weights on the given (increasing) sample times.
std::vector<double> trapezoid_weights(const std::vector<double>& times);

/// ||f (x) g||_{L~1 FB^0_{1,r}} over the product-form right-hand side of the
/// product law. f and g share the lattice and time sampling.
double product_law_ratio(const std::vector<SpectralField>& f, const std::vector<SpectralField>& g,
                         const std::vector<double>& times, double alpha, double r, double T,
                         const DyadicPartition& part);

/// Pointwise tensor product f (x) g as 36 spectral components (row-major
/// f_a g_b), computed by FFT on the shared lattice.
std::vector<std::vector<Cplx>> tensor_product_spectral(const SpectralField& f, const SpectralField& g);

}  // namespace mpfb
