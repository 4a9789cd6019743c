#include "medial/init.hpp"

#include "medial/delaunay.hpp"
#include "medial/envelope.hpp"
#include "medial/filters.hpp"
#include "medial/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace medial {

namespace {

double shape_measure(const BoundaryShape& s, std::vector<double>* cumulative)
{
    double total = 0.0;
    if (cumulative)
        cumulative->clear();
    const auto& V = s.vertices;
    for (std::size_t i = 0; i < s.num_elements(); ++i) {
        double m;
        if (s.dim == 2) {
            m = (V[s.segments[i][1]] - V[s.segments[i][0]]).norm();
        } else {
            const auto& t = s.triangles[i];
            m = 0.5 * (V[t[1]] - V[t[0]]).cross(V[t[2]] - V[t[0]]).norm();
        }
        total += m;
        if (cumulative)
            cumulative->push_back(total);
    }
    return total;
}

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
    Index find(Index x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(Index a, Index b)
    {
        a = find(a), b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

struct CellHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& c) const noexcept
    {
        std::uint64_t h = static_cast<std::uint64_t>(c[0]) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(c[1]) * 0xC2B2AE3D27D4EB4Full;
        h ^= static_cast<std::uint64_t>(c[2]) * 0x165667B19E3779F9ull;
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
};

// Groups spheres whose centres and radii agree within `tol`.
std::vector<Index> merge_coincident(const std::vector<MedialVertex>& v, double tol)
{
    UnionFind uf(v.size());
    std::unordered_map<std::array<std::int64_t, 3>, std::vector<Index>, CellHash> grid;
    auto cell = [&](const Vec3& p) {
        return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p.x() / tol)),
                                           static_cast<std::int64_t>(std::floor(p.y() / tol)),
                                           static_cast<std::int64_t>(std::floor(p.z() / tol))};
    };
    for (Index i = 0; i < v.size(); ++i)
        grid[cell(v[i].position)].push_back(i);
    for (Index i = 0; i < v.size(); ++i) {
        const auto c = cell(v[i].position);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == grid.end())
                        continue;
                    for (Index j : it->second)
                        if (j > i && (v[i].position - v[j].position).norm() <= tol &&
                            std::abs(v[i].radius - v[j].radius) <= tol)
                            uf.unite(i, j);
                }
    }
    std::vector<Index> root(v.size());
    for (Index i = 0; i < v.size(); ++i)
        root[i] = uf.find(i);
    return root;
}

// Emits the medial simplices for one run of consecutive interior dual
// vertices: an edge for two, a fan of triangles for more.
void emit_run(std::vector<Index> run, std::vector<EdgeVerts>& edges, std::vector<FaceVerts>& faces)
{
    run.erase(std::unique(run.begin(), run.end()), run.end());
    if (run.size() > 1 && run.front() == run.back())
        run.pop_back();
    if (run.size() == 2) {
        edges.push_back({run[0], run[1]});
        return;
    }
    for (std::size_t i = 1; i + 1 < run.size(); ++i) {
        const Index a = run[0], b = run[i], c = run[i + 1];
        if (a == b || b == c || a == c)
            continue;
        faces.push_back({a, b, c});
    }
    if (run.size() > 2) {
        // Vertices repeated non-consecutively still need their edges.
        for (std::size_t i = 0; i + 1 < run.size(); ++i)
            if (run[i] != run[i + 1])
                edges.push_back({run[i], run[i + 1]});
    }
}

} // namespace

double sample_spacing(const BoundaryShape& shape, std::size_t n)
{
    const double m = shape_measure(shape, nullptr);
    return shape.dim == 2 ? m / n : std::sqrt(m / n);
}

std::vector<BoundarySample> sample_boundary(const BoundaryShape& shape, std::size_t n, std::uint64_t seed)
{
    const std::size_t need = static_cast<std::size_t>(shape.dim + 2);
    if (n < need)
        throw Error("sample_boundary: need at least " + std::to_string(need) + " samples");
    if (shape.num_elements() == 0)
        throw Error("sample_boundary: empty shape");
    std::vector<BoundarySample> out;
    out.reserve(n);
    const std::size_t nv = shape.vertices.size();
    if (n <= nv) {
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(BoundarySample{shape.vertices[i * nv / n], {}, 0.0, 0.0});
        return out;
    }
    for (const auto& v : shape.vertices)
        out.push_back(BoundarySample{v, {}, 0.0, 0.0});

    std::vector<double> cumulative;
    const double total = shape_measure(shape, &cumulative);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& V = shape.vertices;
    while (out.size() < n) {
        const double pick = u(rng) * total;
        const std::size_t e = std::min<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(), cumulative.size() - 1);
        Vec3 p;
        if (shape.dim == 2) {
            const double t = u(rng);
            p = (1.0 - t) * V[shape.segments[e][0]] + t * V[shape.segments[e][1]];
        } else {
            const auto& tri = shape.triangles[e];
            const double s = std::sqrt(u(rng)), t = u(rng);
            p = (1.0 - s) * V[tri[0]] + s * (1.0 - t) * V[tri[1]] + s * t * V[tri[2]];
        }
        out.push_back(BoundarySample{p, {}, 0.0, 0.0});
    }
    return out;
}

MedialComplex initial_medial_complex(std::span<const BoundarySample> samples, const BoundaryShape& shape,
                                     InitStats* stats)
{
    InitStats st;
    const int D = shape.dim;
    std::vector<Vec3> pts(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        pts[i] = samples[i].point;
    const DelaunayResult dt = delaunay(pts, D);
    st.delaunay_simplices = dt.size();
    const int corners = D + 1;
    const double tol = 1e-7 * shape.diag;

    // Classify simplices; the inside test dominates and is independent per simplex.
    ShapeQuery query(shape);
    std::vector<char> interior(dt.size(), 0);
    parallel_for(dt.size(), [&](std::size_t s) {
        const Vec3& cc = dt.circumcenters[s];
        if (!std::isfinite(cc.squaredNorm()) || !query.inside(cc))
            return;
        for (int i = 0; i < corners; ++i)
            if (std::abs((pts[dt.simplices[s][i]] - cc).norm() - dt.circumradii[s]) > tol) {
                interior[s] = 2;
                return;
            }
        interior[s] = 1;
    });

    std::vector<MedialVertex> verts;
    std::vector<Index> dual(dt.size(), kInvalidIndex);
    for (std::size_t s = 0; s < dt.size(); ++s) {
        if (interior[s] == 2)
            ++st.inconsistent;
        if (interior[s] != 1)
            continue;
        MedialVertex v;
        v.position = dt.circumcenters[s];
        v.radius = dt.circumradii[s];
        for (int i = 0; i < corners; ++i)
            v.tangency_ids.push_back(dt.simplices[s][i]);
        std::sort(v.tangency_ids.begin(), v.tangency_ids.end());
        dual[s] = static_cast<Index>(verts.size());
        verts.push_back(std::move(v));
    }
    st.interior_simplices = verts.size();
    if (verts.empty())
        throw Error("initial_medial_complex: no interior circumcenters (degenerate sampling)");

    // Collapse numerically coincident spheres (co-spherical sample sets split
    // by the tie-breaking jitter).
    const auto root = merge_coincident(verts, 1e-9 * shape.diag);
    std::vector<Index> vid(verts.size(), kInvalidIndex);
    std::vector<MedialVertex> merged;
    for (Index i = 0; i < verts.size(); ++i) {
        if (root[i] == i) {
            vid[i] = static_cast<Index>(merged.size());
            merged.push_back(verts[i]);
        }
    }
    for (Index i = 0; i < verts.size(); ++i) {
        if (root[i] == i)
            continue;
        ++st.merged;
        vid[i] = vid[root[i]];
        auto& ids = merged[vid[i]].tangency_ids;
        ids.insert(ids.end(), verts[i].tangency_ids.begin(), verts[i].tangency_ids.end());
    }
    for (auto& v : merged) {
        std::sort(v.tangency_ids.begin(), v.tangency_ids.end());
        v.tangency_ids.erase(std::unique(v.tangency_ids.begin(), v.tangency_ids.end()), v.tangency_ids.end());
    }
    auto medial_of = [&](Index s) { return dual[s] == kInvalidIndex ? kInvalidIndex : vid[dual[s]]; };

    std::vector<EdgeVerts> edges;
    std::vector<FaceVerts> faces;
    if (D == 2) {
        // A Voronoi edge follows the bisector of its two Delaunay samples, where
        // the exact radius is the distance to either sample. Linear
        // interpolation overshoots it, so long edges (typically between two
        // reflex corners) are split until the overshoot is below a fraction of
        // the sampling resolution.
        const double tol = 0.1 * sample_spacing(shape, samples.size());
        auto overshoot = [&](const MedialVertex& a, const MedialVertex& b, const Vec3& p) {
            double worst = 0.0;
            for (double t : {0.25, 0.5, 0.75}) {
                const Vec3 x = (1.0 - t) * a.position + t * b.position;
                worst = std::max(worst, (1.0 - t) * a.radius + t * b.radius - (x - p).norm());
            }
            return worst;
        };
        std::function<void(Index, Index, Index, Index, int)> refine = [&](Index a, Index b, Index p, Index q,
                                                                           int depth) {
            if (depth == 0 || overshoot(merged[a], merged[b], pts[p]) <= tol) {
                edges.push_back({a, b});
                return;
            }
            MedialVertex m;
            m.position = 0.5 * (merged[a].position + merged[b].position);
            m.radius = (m.position - pts[p]).norm();
            m.tangency_ids = {std::min(p, q), std::max(p, q)};
            const auto mid = static_cast<Index>(merged.size());
            merged.push_back(std::move(m));
            ++st.refined;
            refine(a, mid, p, q, depth - 1);
            refine(mid, b, p, q, depth - 1);
        };
        for (Index s = 0; s < dt.size(); ++s)
            for (int i = 0; i < 3; ++i) {
                const Index n = dt.neighbors[s][i];
                if (n == kInvalidIndex || n < s)
                    continue;
                const Index a = medial_of(s), b = medial_of(n);
                if (a == kInvalidIndex || b == kInvalidIndex || a == b)
                    continue;
                // Neighbour i sits opposite corner i; the shared side is the other two.
                refine(a, b, dt.simplices[s][(i + 1) % 3], dt.simplices[s][(i + 2) % 3], 12);
            }
    } else {
        // Each Delaunay edge is dual to a Voronoi polygon whose corners are the
        // circumcentres of the tetrahedra around that edge.
        std::unordered_set<std::uint64_t> done;
        for (Index s0 = 0; s0 < dt.size(); ++s0) {
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    const Index a = dt.simplices[s0][i], b = dt.simplices[s0][j];
                    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
                    if (!done.insert(key).second)
                        continue;
                    // Walk the tetrahedra around edge (a, b) in one direction,
                    // and in the other one too when the first walk hits the hull.
                    // `came` is the vertex opposite the facet to cross next.
                    auto walk = [&](Index came) {
                        std::vector<Index> ring;
                        Index cur = s0;
                        for (std::size_t guard = 0; guard <= dt.size(); ++guard) {
                            const auto& t = dt.simplices[cur];
                            int opp = 0;
                            Index other = kInvalidIndex;
                            for (int k = 0; k < 4; ++k) {
                                if (t[k] == came)
                                    opp = k;
                                else if (t[k] != a && t[k] != b)
                                    other = t[k];
                            }
                            const Index next = dt.neighbors[cur][opp];
                            if (next == kInvalidIndex)
                                return std::make_pair(ring, false);
                            if (next == s0)
                                return std::make_pair(ring, true);
                            ring.push_back(next);
                            came = other;
                            cur = next;
                        }
                        throw Error("initial_medial_complex: inconsistent Delaunay adjacency");
                    };
                    std::array<Index, 2> others{};
                    int no = 0;
                    for (int k = 0; k < 4; ++k)
                        if (k != i && k != j)
                            others[no++] = dt.simplices[s0][k];
                    auto [fwd, closed] = walk(others[0]);
                    std::vector<Index> ring;
                    if (closed) {
                        ring.push_back(s0);
                        ring.insert(ring.end(), fwd.begin(), fwd.end());
                    } else {
                        const auto back = walk(others[1]).first;
                        ring.assign(back.rbegin(), back.rend());
                        ring.push_back(s0);
                        ring.insert(ring.end(), fwd.begin(), fwd.end());
                    }
                    // Split the ring into runs of interior duals.
                    const std::size_t m = ring.size();
                    std::size_t start = 0;
                    bool any_out = false;
                    for (std::size_t k = 0; k < m; ++k)
                        if (medial_of(ring[k]) == kInvalidIndex) {
                            start = k;
                            any_out = true;
                            break;
                        }
                    if (!any_out && closed) {
                        std::vector<Index> run;
                        for (Index s : ring)
                            run.push_back(medial_of(s));
                        run.push_back(run.front());
                        emit_run(std::move(run), edges, faces);
                        continue;
                    }
                    std::vector<Index> run;
                    for (std::size_t step = 0; step <= m; ++step) {
                        const std::size_t k = closed ? (start + step) % m : step;
                        const Index mv = step < m ? medial_of(ring[k]) : kInvalidIndex;
                        if (mv == kInvalidIndex) {
                            if (run.size() >= 2)
                                emit_run(run, edges, faces);
                            run.clear();
                        } else {
                            run.push_back(mv);
                        }
                    }
                }
        }
    }

    MedialComplex c(D);
    for (auto& v : merged)
        c.add_vertex(std::move(v));
    for (const auto& f : faces)
        c.insert_face(f[0], f[1], f[2]);
    for (const auto& e : edges)
        if (e[0] != e[1])
            c.insert_edge(e[0], e[1]);

    if (c.num_edges() > 0) {
        for (Index v : c.live_vertices())
            if (c.vertex_edges(v).empty()) {
                c.remove_vertex(v);
                ++st.orphans_removed;
            }
    } else if (c.num_vertices() > 1) {
        // Only isolated spheres: keep the largest one.
        auto live = c.live_vertices();
        const Index keep = *std::max_element(live.begin(), live.end(), [&](Index x, Index y) {
            return c.vertex(x).radius < c.vertex(y).radius;
        });
        for (Index v : live)
            if (v != keep) {
                c.remove_vertex(v);
                ++st.orphans_removed;
            }
    }
    if (stats)
        *stats = st;
    return c.compacted();
}

namespace {

// Minimum enclosing ball of the contacts relative to the ball radius above
// which the contacts surround the centre. A 36 degree wedge gives 0.95.
constexpr double kSurroundRatio = 0.98;

} // namespace

FeatureSize local_feature_size(std::span<const BoundarySample> samples, const MedialComplex& c)
{
    if (c.num_vertices() == 0)
        throw Error("local_feature_size: empty complex");
    FeatureSize fs;
    std::vector<Index> used;
    bool has_tangency = true;
    for (Index v : c.live_vertices())
        for (Index i : c.vertex(v).tangency_ids)
            if (i >= samples.size())
                has_tangency = false;
    if (has_tangency) {
        // Sampling resolution: a high quantile of the nearest-neighbour
        // distance, read off the Delaunay edges between co-tangent samples.
        std::vector<double> nn(samples.size(), kInf);
        for (Index v : c.live_vertices()) {
            const auto& t = c.vertex(v).tangency_ids;
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t j = i + 1; j < t.size(); ++j) {
                    const double d = (samples[t[i]].point - samples[t[j]].point).norm();
                    nn[t[i]] = std::min(nn[t[i]], d);
                    nn[t[j]] = std::min(nn[t[j]], d);
                }
        }
        nn.erase(std::remove(nn.begin(), nn.end(), kInf), nn.end());
        Aabb box;
        for (const auto& s : samples)
            box.extend(s.point);
        double resolution = 0.0;
        if (!nn.empty()) {
            const auto q = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() * 95 / 100);
            std::nth_element(nn.begin(), q, nn.end());
            resolution = *q;
        }
        fs.lambda = std::max(2.0 * resolution, 0.01 * box.diagonal());
        // Balls at sampling scale (flat Delaunay cells) and balls whose
        // contacts all lie on one side of the centre (convex corner
        // branches) do not bound the feature size.
        const auto verts = c.live_vertices();
        std::vector<char> stable(verts.size(), 0);
        parallel_for(verts.size(), [&](std::size_t k) {
            const auto& mv = c.vertex(verts[k]);
            if (mv.radius < fs.lambda || mv.tangency_ids.empty())
                return;
            std::vector<Vec3> pts;
            for (Index i : mv.tangency_ids)
                pts.push_back(samples[i].point);
            stable[k] = minimum_enclosing_ball(pts).radius >= kSurroundRatio * mv.radius;
        });
        for (std::size_t k = 0; k < verts.size(); ++k)
            if (stable[k])
                used.push_back(verts[k]);
    }
    // Without tangency data or stable vertices every vertex counts.
    if (used.empty())
        used = c.live_vertices();
    fs.support_vertices = used.size();
    std::vector<EnvelopePrimitive> centers;
    for (Index v : used) {
        EnvelopePrimitive p;
        p.spheres[0] = Sphere{c.vertex(v).position, 0.0};
        p.simplex = SimplexRef{SimplexKind::Vertex, v};
        centers.push_back(p);
    }
    const PrimitiveIndex index(std::move(centers));
    fs.lfs.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { fs.lfs[i] = index.query(samples[i].point).distance; });
    const double lo = fs.lfs.empty() ? 0.0 : *std::min_element(fs.lfs.begin(), fs.lfs.end());
    fs.global_cap = lo / 2.0;
    return fs;
}

void store_feature_size(std::span<BoundarySample> samples, const FeatureSize& fs)
{
    for (std::size_t i = 0; i < samples.size() && i < fs.lfs.size(); ++i)
        samples[i].lfs = fs.lfs[i];
}

double assign_nearest(std::span<BoundarySample> samples, const MedialComplex& c)
{
    const PrimitiveIndex index = PrimitiveIndex::from_complex(c);
    if (index.empty())
        throw Error("assign_nearest: empty complex");
    parallel_for(samples.size(), [&](std::size_t i) {
        const auto r = index.query(samples[i].point);
        samples[i].assigned = r.primitive;
        samples[i].last_distance = r.distance;
    });
    double worst = 0.0;
    for (const auto& s : samples)
        worst = std::max(worst, std::abs(s.last_distance));
    return worst;
}

} // namespace medial
