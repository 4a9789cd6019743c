#pragma once

#include "medial/complex.hpp"
#include "medial/shape.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace medial {

/// A boundary point with its current nearest envelope primitive.
struct BoundarySample {
    Vec3 point = Vec3::Zero();
    SimplexRef assigned;
    double lfs = 0.0;
    double last_distance = 0.0;
};

/// Returns `n` samples: the shape's vertices first, then area-weighted
/// (length-weighted in 2D) uniform random points. When n is smaller than the
/// vertex count, an evenly strided subset of the vertices is returned.
std::vector<BoundarySample> sample_boundary(const BoundaryShape& shape, std::size_t n, std::uint64_t seed);

struct InitStats {
    std::size_t delaunay_simplices = 0;
    std::size_t interior_simplices = 0;
    // Interior circumspheres whose corners are not within tolerance of the
    // sphere (ill-conditioned slivers); treated as non-interior.
    std::size_t inconsistent = 0;
    // Vertices absorbed into a coincident one.
    std::size_t merged = 0;
    std::size_t orphans_removed = 0;
    // 2D vertices inserted along Voronoi edges whose interpolated radius
    // overshoots the exact one.
    std::size_t refined = 0;
};

/// Interior Voronoi dual of the sampled boundary. Tangency ids index into
/// `samples`. In 2D, long Voronoi edges are subdivided at points of the same
/// bisector so that linear radius interpolation tracks the exact radius.
MedialComplex initial_medial_complex(std::span<const BoundarySample> samples, const BoundaryShape& shape,
                                     InitStats* stats = nullptr);

struct FeatureSize {
    std::vector<double> lfs;
    double global_cap = 0.0;
    // Radius floor of the vertices the estimate is measured to.
    double lambda = 0.0;
    std::size_t support_vertices = 0;
};

/// Distance from each sample to the nearest stable medial vertex centre of
/// the initial complex, and half of the smallest such value. Stable vertices
/// have radius at least `lambda` (twice the sampling resolution, at least 1%
/// of the diagonal) and tangency samples that surround the centre; vertices
/// at sampling scale or on convex-corner branches are skipped. Falls back to
/// all vertices when none qualifies or tangency data is missing.
FeatureSize local_feature_size(std::span<const BoundarySample> samples, const MedialComplex& c);

/// Copies per-sample lfs values into the samples.
void store_feature_size(std::span<BoundarySample> samples, const FeatureSize& fs);

/// Assigns every sample to its nearest maximal simplex of `c` and caches the
/// signed distance. Returns the largest |distance|.
double assign_nearest(std::span<BoundarySample> samples, const MedialComplex& c);

/// Typical sample spacing: sqrt(area / n) in 3D, perimeter / n in 2D.
double sample_spacing(const BoundaryShape& shape, std::size_t n);

} // namespace medial
