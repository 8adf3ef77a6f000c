#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "mpfb/spectral_field.hpp"

namespace mpfb {

/// In-place 3-D complex FFT on an owned buffer, FFTW_ESTIMATE plans so that
/// results do not depend on planner timing. Not copyable.
class Fft3 {
 public:
  explicit Fft3(const std::array<int, 3>& n);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  std::complex<double>* data() noexcept { return buf_; }
  std::size_t size() const noexcept { return size_; }

  /// sum_k x_k exp(-2 pi i k.m/n)
  void forward();
  /// sum_m x_m exp(+2 pi i k.m/n)
  void backward();

 private:
  std::size_t size_ = 0;
  std::complex<double>* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Transforms between frequency samples on a LatticeGrid and physical
/// samples on the dual grid x_k = k * 2pi/(n h), with the continuous
/// convention F f(xi) = int exp(-i x.xi) f(x) dx.
class LatticeTransform {
 public:
  explicit LatticeTransform(const LatticeGrid& grid);

  const LatticeGrid& grid() const noexcept { return grid_; }
  /// f(x_k) = (2pi)^-3 h1 h2 h3 sum_m f^(xi_m) exp(i x_k.xi_m)
  void to_physical(const std::vector<Cplx>& spectral, std::vector<Cplx>& physical);
  /// f^(xi_m) = dV sum_k f(x_k) exp(-i x_k.xi_m), dV the physical cell volume
  void to_spectral(const std::vector<Cplx>& physical, std::vector<Cplx>& spectral);

 private:
  LatticeGrid grid_;
  Fft3 fft_;
};

}  // namespace mpfb
