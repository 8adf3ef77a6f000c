#include "mpfb/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "mpfb/error.hpp"

namespace mpfb {

LatticeGrid LatticeGrid::from_extent(const std::array<int, 3>& points, const Vec3& half_extent) {
  LatticeGrid g;
  g.n = points;
  for (int a = 0; a < 3; ++a) {
    if (points[a] < 2 || points[a] % 2 != 0)
      throw Error(ErrorCode::InvalidParameter, "lattice points per axis must be even and >= 2");
    if (!(half_extent[a] > 0.0))
      throw Error(ErrorCode::InvalidParameter, "lattice half extent must be positive");
    g.h[a] = 2.0 * half_extent[a] / points[a];
  }
  return g;
}

std::array<int, 3> LatticeGrid::modes(std::size_t i) const noexcept {
  const int k2 = static_cast<int>(i % n[2]);
  const std::size_t rest = i / n[2];
  const int k1 = static_cast<int>(rest % n[1]);
  const int k0 = static_cast<int>(rest / n[1]);
  return {mode(k0, n[0]), mode(k1, n[1]), mode(k2, n[2])};
}

std::size_t LatticeGrid::index(int m0, int m1, int m2) const noexcept {
  auto wrap = [](int m, int len) { return ((m % len) + len) % len; };
  return (static_cast<std::size_t>(wrap(m0, n[0])) * n[1] + wrap(m1, n[1])) * n[2] + wrap(m2, n[2]);
}

Vec3 LatticeGrid::frequency(std::size_t i) const noexcept {
  const auto m = modes(i);
  return Vec3(m[0] * h[0], m[1] * h[1], m[2] * h[2]);
}

SpectralField SpectralField::on_lattice(const LatticeGrid& grid) {
  SpectralField f;
  f.rep_ = grid;
  for (auto& c : f.values_) c.assign(grid.size(), Cplx(0.0));
  return f;
}

SpectralField SpectralField::on_cubes(std::vector<Box> boxes, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidParameter, "cube quadrature order must be >= 1");
  SpectralField f;
  for (const Box& b : boxes) {
    for (const Node3& nd : tensor_gauss(b, order)) {
      f.nodes_.push_back(nd.x);
      f.weights_.push_back(nd.w);
    }
  }
  f.rep_ = CubeQuadrature{std::move(boxes), order};
  for (auto& c : f.values_) c.assign(f.nodes_.size(), Cplx(0.0));
  return f;
}

const LatticeGrid& SpectralField::lattice() const {
  if (const auto* g = std::get_if<LatticeGrid>(&rep_)) return *g;
  throw Error(ErrorCode::UnsupportedRepresentation, "field is not on a lattice");
}

const CubeQuadrature& SpectralField::cubes() const {
  if (const auto* c = std::get_if<CubeQuadrature>(&rep_)) return *c;
  throw Error(ErrorCode::UnsupportedRepresentation, "field is not a cube quadrature");
}

Vec3 SpectralField::frequency(std::size_t i) const {
  if (const auto* g = std::get_if<LatticeGrid>(&rep_)) return g->frequency(i);
  return nodes_[i];
}

double SpectralField::weight(std::size_t i) const {
  if (const auto* g = std::get_if<LatticeGrid>(&rep_)) return g->cell_volume();
  return weights_[i];
}

Vec6c SpectralField::value(std::size_t i) const {
  Vec6c v;
  for (int c = 0; c < kComponents; ++c) v[c] = values_[c][i];
  return v;
}

void SpectralField::set_value(std::size_t i, const Vec6c& v) {
  for (int c = 0; c < kComponents; ++c) values_[c][i] = v[c];
}

double SpectralField::magnitude(std::size_t i) const {
  double s = 0.0;
  for (int c = 0; c < kComponents; ++c) s += std::norm(values_[c][i]);
  return std::sqrt(s);
}

void SpectralField::fill(const std::function<Vec6c(const Vec3&)>& fn) {
  for (std::size_t i = 0; i < size(); ++i) set_value(i, fn(frequency(i)));
}

void SpectralField::multiply(const std::function<double(const Vec3&)>& m) {
  for (std::size_t i = 0; i < size(); ++i) {
    const double w = m(frequency(i));
    for (auto& c : values_) c[i] *= w;
  }
}

void SpectralField::scale(Cplx c) {
  for (auto& comp : values_)
    for (auto& v : comp) v *= c;
}

void SpectralField::axpy(Cplx c, const SpectralField& other) {
  if (!same_layout(other)) throw Error(ErrorCode::InvalidParameter, "axpy on mismatched layouts");
  for (int k = 0; k < kComponents; ++k)
    for (std::size_t i = 0; i < size(); ++i) values_[k][i] += c * other.values_[k][i];
}

void SpectralField::set_zero() {
  for (auto& comp : values_) std::fill(comp.begin(), comp.end(), Cplx(0.0));
}

bool SpectralField::same_layout(const SpectralField& other) const {
  if (size() != other.size() || rep_.index() != other.rep_.index()) return false;
  if (is_lattice()) return lattice() == other.lattice();
  const auto& a = cubes();
  const auto& b = other.cubes();
  if (a.order != b.order || a.boxes.size() != b.boxes.size()) return false;
  for (std::size_t k = 0; k < a.boxes.size(); ++k)
    if (a.boxes[k].lo != b.boxes[k].lo || a.boxes[k].hi != b.boxes[k].hi) return false;
  return true;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& comp : values_)
    for (const auto& v : comp) m = std::max(m, std::abs(v));
  return m;
}

std::size_t SpectralField::mirror_index(std::size_t i) const {
  if (const auto* g = std::get_if<LatticeGrid>(&rep_)) {
    const auto m = g->modes(i);
    // The Nyquist plane has no partner inside the stored range.
    for (int a = 0; a < 3; ++a)
      if (g->n[a] % 2 == 0 && m[a] == -g->n[a] / 2) return size();
    return g->index(-m[0], -m[1], -m[2]);
  }
  const auto& cq = std::get<CubeQuadrature>(rep_);
  const std::size_t per = static_cast<std::size_t>(cq.order) * cq.order * cq.order;
  const std::size_t b = i / per, local = i % per;
  const Vec3 c = cq.boxes[b].center();
  const Vec3 e = cq.boxes[b].hi - cq.boxes[b].lo;
  for (std::size_t k = 0; k < cq.boxes.size(); ++k) {
    const Vec3 ck = cq.boxes[k].center();
    const Vec3 ek = cq.boxes[k].hi - cq.boxes[k].lo;
    if ((ck + c).norm() <= 1e-12 * (1.0 + c.norm()) && (ek - e).norm() <= 1e-12 * (1.0 + e.norm())) {
      const int q = cq.order;
      const int a0 = static_cast<int>(local / (q * q));
      const int a1 = static_cast<int>((local / q) % q);
      const int a2 = static_cast<int>(local % q);
      return k * per + static_cast<std::size_t>(((q - 1 - a0) * q + (q - 1 - a1)) * q + (q - 1 - a2));
    }
  }
  return size();
}

double SpectralField::hermitian_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const std::size_t j = mirror_index(i);
    if (j >= size()) continue;
    for (int c = 0; c < kComponents; ++c)
      r = std::max(r, std::abs(values_[c][j] - std::conj(values_[c][i])));
  }
  return r;
}

double SpectralField::divergence_residual() const {
  double umax = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec3 xi = frequency(i);
    Cplx d(0.0);
    for (int a = 0; a < 3; ++a) {
      d += xi[a] * values_[a][i];
      umax = std::max(umax, std::abs(values_[a][i]));
    }
    worst = std::max(worst, std::abs(d));
  }
  return umax > 0.0 ? worst / umax : 0.0;
}

}  // namespace mpfb
