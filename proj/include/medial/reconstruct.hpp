#pragma once

#include "medial/complex.hpp"

#include <array>
#include <vector>

namespace medial {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<Index, 3>> triangles;
};

/// Closed curves in the z = 0 plane.
struct Polyline {
    std::vector<Vec3> vertices;
    std::vector<std::array<Index, 2>> segments;
};

/// Envelope signed distance sampled at grid nodes. 2D grids have nz == 1.
struct SdfGrid {
    Vec3 origin = Vec3::Zero();
    double cell = 0.0;
    std::array<int, 3> dims{0, 0, 0};
    std::vector<double> values;

    std::size_t node(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    double at(int i, int j, int k) const { return values[node(i, j, k)]; }
    Vec3 position(int i, int j, int k) const { return origin + cell * Vec3(i, j, k); }
};

/// Samples the envelope's signed distance on a grid with `resolution` cells
/// along the longest axis of the envelope's bounding box, padded by two
/// cells on every side.
SdfGrid build_sdf_grid(const MedialComplex& c, int resolution);

/// Polygonises the `iso` level set. Faces with two diagonal inside corners
/// keep those corners separated, in every cell alike, so the output is
/// closed. Throws Error when the level set reaches the grid boundary.
TriangleMesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

/// 2D counterpart of marching_cubes on an nz == 1 grid.
Polyline marching_squares(const SdfGrid& grid, double iso = 0.0);

/// V - E + F over the vertices referenced by triangles. Throws Error when an
/// edge is shared by more than two triangles.
long euler_characteristic(const TriangleMesh& mesh);

/// Every edge is used exactly once in each direction.
bool is_watertight(const TriangleMesh& mesh);

/// Number of connected components of the triangles (shared vertices).
std::size_t mesh_components(const TriangleMesh& mesh);

/// Signed enclosed volume (positive for outward orientation).
double enclosed_volume(const TriangleMesh& mesh);

/// Convenience pipeline: grid then marching cubes (3D complexes).
TriangleMesh reconstruct_surface(const MedialComplex& c, int resolution);
Polyline reconstruct_outline(const MedialComplex& c, int resolution);

} // namespace medial
