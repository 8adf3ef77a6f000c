#include "mpfb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "mpfb/error.hpp"

namespace mpfb {

namespace {

struct Reference {
  std::vector<double> x;
  std::vector<double> w;
};

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

Reference compute_reference(int n) {
  Reference ref;
  ref.x.resize(n);
  ref.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    ref.x[n - 1 - i] = x;
    ref.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return ref;
}

const Reference& reference(int n) {
  static std::mutex mu;
  static std::map<int, Reference> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_reference(n)).first;
  return it->second;
}

}  // namespace

double Rule1D::integrate_constant() const noexcept {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Rule1D gauss_legendre(int order, double lo, double hi) {
  if (order < 1) throw Error(ErrorCode::InvalidParameter, "Gauss order must be >= 1");
  Rule1D r;
  if (order == 1) {
    r.nodes = {0.5 * (lo + hi)};
    r.weights = {hi - lo};
    return r;
  }
  const Reference& ref = reference(order);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    r.nodes[i] = mid + half * ref.x[i];
    r.weights[i] = half * ref.w[i];
  }
  return r;
}

Rule1D composite_gauss(const std::vector<double>& breakpoints, int order) {
  Rule1D out;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const Rule1D p = gauss_legendre(order, breakpoints[k], breakpoints[k + 1]);
    out.nodes.insert(out.nodes.end(), p.nodes.begin(), p.nodes.end());
    out.weights.insert(out.weights.end(), p.weights.begin(), p.weights.end());
  }
  return out;
}

Rule1D graded_gauss(double t, int panels, int order, double ratio) {
  if (panels < 1) throw Error(ErrorCode::InvalidParameter, "graded_gauss needs >= 1 panel");
  std::vector<double> bp{0.0};
  for (int k = panels - 1; k >= 1; --k) bp.push_back(t * std::pow(ratio, -k));
  bp.push_back(t);
  return composite_gauss(bp, order);
}

double Box::volume() const {
  if (empty()) return 0.0;
  return (hi - lo).prod();
}

bool Box::empty() const { return (hi.array() <= lo.array()).any(); }

bool Box::contains(const Vec3& x, double tol) const {
  return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
}

Box Box::intersect(const Box& other) const {
  Box b;
  b.lo = lo.cwiseMax(other.lo);
  b.hi = hi.cwiseMin(other.hi);
  return b;
}

Box Box::cube(const Vec3& center, double half_side) {
  Box b;
  b.lo = center.array() - half_side;
  b.hi = center.array() + half_side;
  return b;
}

std::vector<Node3> tensor_gauss(const Box& box, int order) {
  std::vector<Node3> out;
  if (box.empty()) return out;
  const Rule1D r0 = gauss_legendre(order, box.lo[0], box.hi[0]);
  const Rule1D r1 = gauss_legendre(order, box.lo[1], box.hi[1]);
  const Rule1D r2 = gauss_legendre(order, box.lo[2], box.hi[2]);
  out.reserve(static_cast<std::size_t>(order) * order * order);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        out.push_back({Vec3(r0.nodes[a], r1.nodes[b], r2.nodes[c]),
                       r0.weights[a] * r1.weights[b] * r2.weights[c]});
  return out;
}

}  // namespace mpfb
