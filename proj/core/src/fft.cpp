#include "mpfb/fft.hpp"

#include <algorithm>
#include <mutex>

#include <fftw3.h>

#include "mpfb/error.hpp"

namespace mpfb {

namespace {
// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

Fft3::Fft3(const std::array<int, 3>& n) {
  size_ = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  std::lock_guard<std::mutex> lock(planner_mutex());
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size_));
  if (!buf_) throw Error(ErrorCode::Resolution, "cannot allocate FFT buffer");
  auto* raw = reinterpret_cast<fftw_complex*>(buf_);
  fwd_ = fftw_plan_dft_3d(n[0], n[1], n[2], raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_3d(n[0], n[1], n[2], raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft3::~Fft3() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buf_);
}

void Fft3::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void Fft3::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

LatticeTransform::LatticeTransform(const LatticeGrid& grid) : grid_(grid), fft_(grid.n) {}

void LatticeTransform::to_physical(const std::vector<Cplx>& spectral, std::vector<Cplx>& physical) {
  const double c = grid_.cell_volume() * kInvTwoPiCubed;
  std::copy(spectral.begin(), spectral.end(), fft_.data());
  fft_.backward();
  physical.resize(fft_.size());
  const Cplx* d = fft_.data();
  for (std::size_t i = 0; i < fft_.size(); ++i) physical[i] = c * d[i];
}

void LatticeTransform::to_spectral(const std::vector<Cplx>& physical, std::vector<Cplx>& spectral) {
  double dv = 1.0;
  for (int a = 0; a < 3; ++a) dv *= 2.0 * kPi / (grid_.h[a] * grid_.n[a]);
  std::copy(physical.begin(), physical.end(), fft_.data());
  fft_.forward();
  spectral.resize(fft_.size());
  const Cplx* d = fft_.data();
  for (std::size_t i = 0; i < fft_.size(); ++i) spectral[i] = dv * d[i];
}

}  // namespace mpfb
