#pragma once

#include "medial/geometry.hpp"

#include <Eigen/Core>

namespace medial::predicates {

// Exact-sign geometric predicates: a floating-point evaluation guarded by a
// static error bound, falling back to rational arithmetic when the sign is
// uncertain. All return -1, 0 or +1.

/// +1 when a, b, c wind counter-clockwise.
int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// +1 when d lies on the side of plane (a, b, c) that (b-a) x (c-a) points to.
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// +1 when d is strictly inside the circle through a, b, c, for a
/// counter-clockwise triangle.
int incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
             const Eigen::Vector2d& d);

/// +1 when e is strictly inside the sphere through a, b, c, d, for a
/// tetrahedron with orient3d(a, b, c, d) > 0.
int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

} // namespace medial::predicates
