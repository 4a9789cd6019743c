#pragma once

#include "medial/geometry.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace medial {

/// A closed boundary: a polygon loop when dim == 2 (z = 0) or a closed,
/// consistently oriented triangle mesh when dim == 3.
struct BoundaryShape {
    int dim = 3;
    std::vector<Vec3> vertices;
    std::vector<std::array<Index, 3>> triangles;
    std::vector<std::array<Index, 2>> segments;
    Aabb bbox;
    double diag = 0.0;

    std::size_t num_elements() const { return dim == 2 ? segments.size() : triangles.size(); }
};

/// Builds and validates a 3D shape (closed, edge-manifold, consistently
/// oriented). Errors name the offending edge.
BoundaryShape make_shape_3d(std::vector<Vec3> vertices, std::vector<std::array<Index, 3>> triangles);

/// Builds a 2D shape from a closed loop given in order (the last point
/// connects back to the first).
BoundaryShape make_shape_2d(std::vector<Vec3> loop);

/// Builds a 2D shape from explicit segments; every vertex must have degree 2.
BoundaryShape make_shape_2d(std::vector<Vec3> vertices, std::vector<std::array<Index, 2>> segments);

/// Accelerated distance, closest-point and inside queries against a shape.
class ShapeQuery {
public:
    explicit ShapeQuery(const BoundaryShape& shape);
    ~ShapeQuery();
    ShapeQuery(ShapeQuery&&) noexcept;
    ShapeQuery& operator=(ShapeQuery&&) noexcept;

    const BoundaryShape& shape() const;

    double unsigned_distance(const Vec3& q, Vec3* closest = nullptr) const;

    /// Ray-parity test. Rays that graze an edge or vertex within 1e-9 are
    /// discarded and re-cast along a fresh direction.
    bool inside(const Vec3& q) const;

    /// Exact distance to the boundary, negative inside.
    double signed_distance(const Vec3& q) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience one-shot version of ShapeQuery::inside.
bool inside(const BoundaryShape& shape, const Vec3& q);

/// Closest point on segment ab to p.
Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b);
/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace medial
