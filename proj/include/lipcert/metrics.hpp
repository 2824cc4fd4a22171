#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "lipcert/errors.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/tolerances.hpp"

namespace lipcert {

// Ordered pair (x1, x2), one point of the 2d-dimensional product space.
struct PairPoint {
  Vector x1;
  Vector x2;

  std::size_t dim() const { return x1.size(); }
};

// Stacked partials (df/dx1, df/dx2).
struct PairGradient {
  Vector g1;
  Vector g2;

  // Euclidean norm in the product space.
  double product_norm() const { return std::sqrt(dot(g1, g1) + dot(g2, g2)); }
};

// The bounded domain {x : |x|_2 <= radius}.
struct BallDomain {
  double radius = 1.0;
  std::size_t dim = 0;
};

namespace detail {

inline void require_pair_dims(const PairPoint& p, std::size_t d) {
  if (p.x1.size() != p.x2.size() || p.x1.size() != d)
    throw DimensionMismatchError("pair/matrix dimensions disagree");
}

}  // namespace detail

// d_M(x1, x2) = |F (x1 - x2)|_2 where F^T F = M. Going through the factor
// keeps round-off from driving the quadratic form negative under the root.
inline double mahalanobis(const PsdFactor& f, const PairPoint& p) {
  detail::require_pair_dims(p, f.factor.dim());
  return norm2(f.factor.apply(sub(p.x1, p.x2)));
}

// Gradient of the distance: g1 = M (x1 - x2) / d, g2 = -g1. Undefined on
// the zero-distance locus (including x1 - x2 in the null space of M).
// M should be the symmetric matrix the factor was computed from.
inline PairGradient mahalanobis_grad(const SquareMatrix& m, const PsdFactor& f,
                                     const PairPoint& p,
                                     double tol_zero_dist = Tolerances{}.zero_distance) {
  detail::require_pair_dims(p, m.dim());
  if (f.factor.dim() != m.dim())
    throw DimensionMismatchError("factor/matrix dimensions disagree");
  const double d = mahalanobis(f, p);
  const double scale = 1.0 + norm2(p.x1) + norm2(p.x2);
  if (d <= tol_zero_dist * scale)
    throw UndefinedGradientError("gradient undefined at zero distance");
  PairGradient g;
  g.g1 = m.apply(sub(p.x1, p.x2));
  for (auto& x : g.g1) x /= d;
  g.g2 = negated(g.g1);
  return g;
}

// x1^T M x2. M need not be symmetric or PSD.
inline double bilinear(const SquareMatrix& m, const PairPoint& p) {
  detail::require_pair_dims(p, m.dim());
  return dot(p.x1, m.apply(p.x2));
}

// g1 = M x2, g2 = M^T x1; defined everywhere.
inline PairGradient bilinear_grad(const SquareMatrix& m, const PairPoint& p) {
  detail::require_pair_dims(p, m.dim());
  return PairGradient{m.apply(p.x2), m.apply_transpose(p.x1)};
}

}  // namespace lipcert
