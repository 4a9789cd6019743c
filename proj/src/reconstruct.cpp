#include "medial/reconstruct.hpp"

#include "medial/envelope.hpp"
#include "medial/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace medial {

namespace {

// Cube corner c sits at (c & 1, c >> 1 & 1, c >> 2 & 1).
struct CubeEdge {
    int corner;
    int axis;
};

// Edge e: axis e / 4, starting at the e % 4-th corner with a zero bit there.
const std::array<CubeEdge, 12>& cube_edges()
{
    static const std::array<CubeEdge, 12> edges = [] {
        std::array<CubeEdge, 12> out{};
        int n = 0;
        for (int axis = 0; axis < 3; ++axis)
            for (int c = 0; c < 8; ++c)
                if (!(c >> axis & 1))
                    out[n++] = CubeEdge{c, axis};
        return out;
    }();
    return edges;
}

int edge_between(int a, int b)
{
    const auto& edges = cube_edges();
    const int lo = std::min(a, b), axis = std::countr_zero(static_cast<unsigned>(a ^ b));
    for (int e = 0; e < 12; ++e)
        if (edges[e].corner == lo && edges[e].axis == axis)
            return e;
    throw Error("marching cubes: corners are not adjacent");
}

// Walks a face boundary counter-clockwise as seen from outside the cell and
// pairs every outside-to-inside crossing with the next inside-to-outside
// one. Diagonal inside corners therefore stay separated.
std::vector<std::pair<int, int>> face_segments(const std::array<int, 4>& ring, unsigned inside_mask)
{
    std::vector<int> crossing;
    std::vector<bool> entry;
    for (int i = 0; i < 4; ++i) {
        const int a = ring[i], b = ring[(i + 1) % 4];
        const bool ia = inside_mask >> a & 1, ib = inside_mask >> b & 1;
        if (ia != ib) {
            crossing.push_back(edge_between(a, b));
            entry.push_back(ib);
        }
    }
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < crossing.size(); ++i)
        if (entry[i])
            out.emplace_back(crossing[i], crossing[(i + 1) % crossing.size()]);
    return out;
}

// Per case, the surface loops as cycles of cube edges, oriented so that fan
// triangles face away from the inside corners.
const std::array<std::vector<std::vector<int>>, 256>& cube_table()
{
    static const std::array<std::vector<std::vector<int>>, 256> table = [] {
        std::array<std::array<int, 4>, 6> faces;
        for (int axis = 0; axis < 3; ++axis) {
            const int b = (axis + 1) % 3, c = (axis + 2) % 3;
            for (int side = 0; side < 2; ++side) {
                std::array<int, 4> ring;
                const int uv[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
                for (int i = 0; i < 4; ++i)
                    ring[i] = side << axis | uv[i][0] << b | uv[i][1] << c;
                if (side == 0)
                    std::reverse(ring.begin(), ring.end());
                faces[2 * axis + side] = ring;
            }
        }
        std::array<std::vector<std::vector<int>>, 256> out;
        for (unsigned mask = 0; mask < 256; ++mask) {
            std::array<int, 12> next;
            next.fill(-1);
            for (const auto& ring : faces)
                for (auto [from, to] : face_segments(ring, mask))
                    next[from] = to;
            std::array<bool, 12> used{};
            for (int start = 0; start < 12; ++start) {
                if (next[start] < 0 || used[start])
                    continue;
                std::vector<int> loop;
                for (int e = start; !used[e]; e = next[e]) {
                    used[e] = true;
                    loop.push_back(e);
                }
                out[mask].push_back(std::move(loop));
            }
        }
        return out;
    }();
    return table;
}

bool inside_value(double v, double iso)
{
    return v < iso;
}

// Grid edge from node n along `axis`.
std::uint64_t grid_edge_id(std::size_t node, int axis)
{
    return static_cast<std::uint64_t>(node) * 3 + axis;
}

Vec3 crossing_point(const SdfGrid& g, std::uint64_t id, double iso)
{
    const std::size_t node = id / 3;
    const int axis = static_cast<int>(id % 3);
    const int i = static_cast<int>(node % g.dims[0]);
    const int j = static_cast<int>(node / g.dims[0] % g.dims[1]);
    const int k = static_cast<int>(node / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
    std::array<int, 3> q{i, j, k};
    const double a = g.at(i, j, k);
    q[axis] += 1;
    const double b = g.at(q[0], q[1], q[2]);
    const double t = b == a ? 0.5 : std::clamp((iso - a) / (b - a), 0.0, 1.0);
    Vec3 p = g.position(i, j, k);
    p[axis] += t * g.cell;
    return p;
}

void check_boundary(const SdfGrid& g, double iso)
{
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                const bool border = i == 0 || j == 0 || i == g.dims[0] - 1 || j == g.dims[1] - 1 ||
                                    (g.dims[2] > 1 && (k == 0 || k == g.dims[2] - 1));
                if (border && inside_value(g.at(i, j, k), iso))
                    throw Error("reconstruct: level set reaches the grid boundary");
            }
}

template <std::size_t N>
void weld(const std::vector<std::vector<std::array<std::uint64_t, N>>>& slabs, const SdfGrid& g, double iso,
          std::vector<Vec3>& vertices, std::vector<std::array<Index, N>>& elements)
{
    std::unordered_map<std::uint64_t, Index> ids;
    for (const auto& slab : slabs)
        for (const auto& el : slab) {
            std::array<Index, N> out;
            for (std::size_t i = 0; i < N; ++i) {
                auto [it, fresh] = ids.emplace(el[i], static_cast<Index>(vertices.size()));
                if (fresh)
                    vertices.push_back(crossing_point(g, el[i], iso));
                out[i] = it->second;
            }
            elements.push_back(out);
        }
}

} // namespace

SdfGrid build_sdf_grid(const MedialComplex& c, int resolution)
{
    if (resolution < 8)
        throw Error("build_sdf_grid: resolution must be at least 8");
    const PrimitiveIndex index = PrimitiveIndex::from_complex(c);
    if (index.empty())
        throw Error("build_sdf_grid: empty complex");
    Aabb box;
    for (Index v : c.live_vertices()) {
        const auto& mv = c.vertex(v);
        box.extend(mv.position - Vec3::Constant(mv.radius));
        box.extend(mv.position + Vec3::Constant(mv.radius));
    }
    const bool planar = c.dim() == 2;
    Vec3 ext = box.extent();
    if (planar)
        ext.z() = 0.0;
    const double longest = ext.maxCoeff();
    if (!(longest > 0.0))
        throw Error("build_sdf_grid: envelope has zero extent");
    SdfGrid g;
    g.cell = longest / resolution;
    constexpr int pad = 2;
    g.origin = box.lo - Vec3::Constant(pad * g.cell);
    for (int a = 0; a < 3; ++a)
        g.dims[a] = static_cast<int>(std::ceil(ext[a] / g.cell - 1e-9)) + 1 + 2 * pad;
    if (planar) {
        g.origin.z() = 0.0;
        g.dims[2] = 1;
    }
    g.values.resize(static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2]);
    parallel_for(g.values.size(), [&](std::size_t n) {
        const int i = static_cast<int>(n % g.dims[0]);
        const int j = static_cast<int>(n / g.dims[0] % g.dims[1]);
        const int k = static_cast<int>(n / (static_cast<std::size_t>(g.dims[0]) * g.dims[1]));
        g.values[n] = index.query(g.position(i, j, k)).distance;
    });
    return g;
}

TriangleMesh marching_cubes(const SdfGrid& g, double iso)
{
    if (g.dims[0] < 2 || g.dims[1] < 2 || g.dims[2] < 2)
        throw Error("marching_cubes: grid needs at least two nodes per axis");
    check_boundary(g, iso);
    const auto& table = cube_table();
    const auto& edges = cube_edges();
    const int slabs = g.dims[2] - 1;
    std::vector<std::vector<std::array<std::uint64_t, 3>>> per_slab(slabs);
    parallel_for(static_cast<std::size_t>(slabs), [&](std::size_t ks) {
        const int k = static_cast<int>(ks);
        auto& out = per_slab[ks];
        for (int j = 0; j + 1 < g.dims[1]; ++j)
            for (int i = 0; i + 1 < g.dims[0]; ++i) {
                unsigned mask = 0;
                for (int c = 0; c < 8; ++c)
                    if (inside_value(g.at(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)), iso))
                        mask |= 1u << c;
                if (mask == 0 || mask == 255)
                    continue;
                for (const auto& loop : table[mask]) {
                    std::vector<std::uint64_t> ids;
                    for (int e : loop) {
                        const int c = edges[e].corner;
                        ids.push_back(grid_edge_id(g.node(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)),
                                                   edges[e].axis));
                    }
                    for (std::size_t t = 1; t + 1 < ids.size(); ++t)
                        out.push_back({ids[0], ids[t], ids[t + 1]});
                }
            }
    });
    TriangleMesh mesh;
    weld(per_slab, g, iso, mesh.vertices, mesh.triangles);
    return mesh;
}

Polyline marching_squares(const SdfGrid& g, double iso)
{
    if (g.dims[2] != 1 || g.dims[0] < 2 || g.dims[1] < 2)
        throw Error("marching_squares: expects a 2D grid");
    check_boundary(g, iso);
    // Square corners in counter-clockwise order and the grid edge leaving
    // each one towards the next.
    const int ring[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<std::vector<std::array<std::uint64_t, 2>>> per_row(g.dims[1] - 1);
    parallel_for(per_row.size(), [&](std::size_t js) {
        const int j = static_cast<int>(js);
        for (int i = 0; i + 1 < g.dims[0]; ++i) {
            std::vector<std::uint64_t> crossing;
            std::vector<bool> entry;
            for (int s = 0; s < 4; ++s) {
                const int* a = ring[s];
                const int* b = ring[(s + 1) % 4];
                const bool ia = inside_value(g.at(i + a[0], j + a[1], 0), iso);
                const bool ib = inside_value(g.at(i + b[0], j + b[1], 0), iso);
                if (ia == ib)
                    continue;
                const int axis = a[1] == b[1] ? 0 : 1;
                const int lo[2] = {std::min(a[0], b[0]), std::min(a[1], b[1])};
                crossing.push_back(grid_edge_id(g.node(i + lo[0], j + lo[1], 0), axis));
                entry.push_back(ib);
            }
            // Each inside corner run is closed off on its own, traversed
            // with the inside on the left.
            for (std::size_t s = 0; s < crossing.size(); ++s)
                if (entry[s])
                    per_row[js].push_back({crossing[(s + 1) % crossing.size()], crossing[s]});
        }
    });
    Polyline out;
    weld(per_row, g, iso, out.vertices, out.segments);
    return out;
}

long euler_characteristic(const TriangleMesh& mesh)
{
    std::map<std::pair<Index, Index>, int> edge_use;
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            const Index a = t[i], b = t[(i + 1) % 3];
            if (a >= mesh.vertices.size())
                throw Error("euler_characteristic: vertex index out of range");
            used[a] = 1;
            if (++edge_use[{std::min(a, b), std::max(a, b)}] > 2)
                throw Error("euler_characteristic: non-manifold edge (" + std::to_string(std::min(a, b)) + ", " +
                            std::to_string(std::max(a, b)) + ")");
        }
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(edge_use.size()) + static_cast<long>(mesh.triangles.size());
}

bool is_watertight(const TriangleMesh& mesh)
{
    if (mesh.triangles.empty())
        return false;
    std::map<std::pair<Index, Index>, int> directed;
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i)
            ++directed[{t[i], t[(i + 1) % 3]}];
    for (const auto& [e, n] : directed) {
        if (n != 1)
            return false;
        const auto rev = directed.find({e.second, e.first});
        if (rev == directed.end() || rev->second != 1)
            return false;
    }
    return true;
}

std::size_t mesh_components(const TriangleMesh& mesh)
{
    std::vector<Index> parent(mesh.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Index x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const auto& t : mesh.triangles) {
        for (Index v : t)
            used[v] = 1;
        parent[find(t[1])] = find(t[0]);
        parent[find(t[2])] = find(t[0]);
    }
    std::size_t n = 0;
    for (Index v = 0; v < mesh.vertices.size(); ++v)
        n += used[v] && find(v) == v;
    return n;
}

double enclosed_volume(const TriangleMesh& mesh)
{
    double v = 0.0;
    for (const auto& t : mesh.triangles)
        v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
    return v / 6.0;
}

TriangleMesh reconstruct_surface(const MedialComplex& c, int resolution)
{
    if (c.dim() != 3)
        throw Error("reconstruct_surface: expects a 3D complex");
    return marching_cubes(build_sdf_grid(c, resolution));
}

Polyline reconstruct_outline(const MedialComplex& c, int resolution)
{
    if (c.dim() != 2)
        throw Error("reconstruct_outline: expects a 2D complex");
    return marching_squares(build_sdf_grid(c, resolution));
}

} // namespace medial
