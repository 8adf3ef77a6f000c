#pragma once

#include <vector>

#include "mpfb/types.hpp"

namespace mpfb {

/// One-dimensional rule on a fixed interval.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  double integrate_constant() const noexcept;
};

/// Gauss-Legendre rule of the given order on [lo, hi]. Nodes come from a
/// Newton iteration on P_n and are cached per order.
Rule1D gauss_legendre(int order, double lo = -1.0, double hi = 1.0);

/// Composite Gauss-Legendre rule over consecutive breakpoints.
Rule1D composite_gauss(const std::vector<double>& breakpoints, int order);

/// Composite Gauss rule on [0, t] with geometrically graded panels
/// [t q^{-k-1}, t q^{-k}], k = 0..panels-2, plus [0, t q^{-panels+1}].
Rule1D graded_gauss(double t, int panels, int order, double ratio = 4.0);

/// Axis-aligned box [lo, hi] in R^3.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  double volume() const;
  bool empty() const;
  bool contains(const Vec3& x, double tol = 0.0) const;
  Box intersect(const Box& other) const;

  static Box cube(const Vec3& center, double half_side);
};

struct Node3 {
  Vec3 x;
  double w;
};

/// Tensor Gauss-Legendre rule on a box, nodes in lexicographic order
/// (axis 0 slowest).
std::vector<Node3> tensor_gauss(const Box& box, int order);

}  // namespace mpfb
