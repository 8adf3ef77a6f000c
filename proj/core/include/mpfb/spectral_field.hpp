#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "mpfb/quadrature.hpp"
#include "mpfb/types.hpp"

namespace mpfb {

/// Uniform frequency lattice in FFT ordering. Axis a holds modes
/// m = 0..n/2-1, -n/2..-1 at frequencies m*h[a]; the physical period along
/// that axis is 2*pi/h[a].
struct LatticeGrid {
  std::array<int, 3> n{8, 8, 8};
  Vec3 h = Vec3::Ones();

  static LatticeGrid from_extent(const std::array<int, 3>& points, const Vec3& half_extent);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n[0]) * n[1] * n[2];
  }
  static int mode(int k, int len) noexcept { return k < len / 2 ? k : k - len; }
  std::array<int, 3> modes(std::size_t i) const noexcept;
  /// Flat index of the given signed modes (wrapped into range).
  std::size_t index(int m0, int m1, int m2) const noexcept;
  Vec3 frequency(std::size_t i) const noexcept;
  double cell_volume() const noexcept { return h.prod(); }
  Vec3 half_extent() const { return Vec3(h[0] * n[0], h[1] * n[1], h[2] * n[2]) / 2.0; }

  bool operator==(const LatticeGrid& o) const { return n == o.n && h == o.h; }
};

/// Union of disjoint boxes, each carrying a tensor Gauss rule of one order.
struct CubeQuadrature {
  std::vector<Box> boxes;
  int order = 8;
};

/// Six-component complex field sampled in frequency space. Components 0..2
/// are the velocity u^, 3..5 the micro-rotation omega^. Values are stored
/// component-major so that FFTs can run on contiguous arrays.
class SpectralField {
 public:
  using Representation = std::variant<LatticeGrid, CubeQuadrature>;

  SpectralField() = default;
  static SpectralField on_lattice(const LatticeGrid& grid);
  static SpectralField on_cubes(std::vector<Box> boxes, int order);

  const Representation& representation() const noexcept { return rep_; }
  bool is_lattice() const noexcept { return std::holds_alternative<LatticeGrid>(rep_); }
  const LatticeGrid& lattice() const;
  const CubeQuadrature& cubes() const;

  std::size_t size() const noexcept { return values_[0].size(); }
  bool empty() const noexcept { return size() == 0; }
  Vec3 frequency(std::size_t i) const;
  /// Quadrature weight of sample i (cell volume on a lattice).
  double weight(std::size_t i) const;

  Vec6c value(std::size_t i) const;
  void set_value(std::size_t i, const Vec6c& v);
  std::vector<Cplx>& component(int c) { return values_[c]; }
  const std::vector<Cplx>& component(int c) const { return values_[c]; }
  /// Euclidean norm of the 6-vector at sample i.
  double magnitude(std::size_t i) const;

  bool real_valued = false;
  bool divergence_free = false;

  void fill(const std::function<Vec6c(const Vec3&)>& fn);
  /// values(xi) *= m(xi) for a scalar multiplier.
  void multiply(const std::function<double(const Vec3&)>& m);
  void scale(Cplx c);
  /// this += c * other; both must share the representation.
  void axpy(Cplx c, const SpectralField& other);
  void set_zero();

  bool same_layout(const SpectralField& other) const;
  double max_abs() const;
  /// max |v(-xi) - conj(v(xi))| over stored samples.
  double hermitian_residual() const;
  /// max |xi . u^(xi)| / max|u^|, zero for an empty or vanishing field.
  double divergence_residual() const;

 private:
  /// Index of the sample at -xi, or size() when not stored.
  std::size_t mirror_index(std::size_t i) const;

  Representation rep_{LatticeGrid{}};
  std::vector<Vec3> nodes_;     // cube representation only
  std::vector<double> weights_; // cube representation only
  std::array<std::vector<Cplx>, kComponents> values_;
};

}  // namespace mpfb
