#pragma once

#include "medial/geometry.hpp"

#include <array>
#include <span>
#include <vector>

namespace medial {

/// Finite Delaunay simplices over a point set (triangles when dim == 2, with
/// the fourth slot set to kInvalidIndex).
struct DelaunayResult {
    int dim = 3;
    std::vector<std::array<Index, 4>> simplices;
    // neighbors[s][i] is the simplex across the facet opposite vertex i, or
    // kInvalidIndex on the convex hull.
    std::vector<std::array<Index, 4>> neighbors;
    std::vector<Vec3> circumcenters;
    std::vector<double> circumradii;
    // Points that coincide with an earlier point are mapped to it.
    std::vector<Index> representative;

    std::size_t size() const { return simplices.size(); }
};

struct DelaunayOptions {
    // Relative size (times the bbox diagonal) of the deterministic jitter that
    // breaks exact co-spherical and co-planar ties.
    double jitter = 1e-12;
    std::uint64_t seed = 0x5eed;
};

/// Incremental Bowyer-Watson triangulation with exact-sign predicates.
/// For dim == 2 only the x and y coordinates are used. Throws Error when the
/// points do not span `dim` dimensions.
DelaunayResult delaunay(std::span<const Vec3> points, int dim, const DelaunayOptions& opts = {});

} // namespace medial
