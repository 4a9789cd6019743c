#include "medial/shape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace medial {

namespace {

void finish(BoundaryShape& s)
{
    s.bbox = Aabb{};
    for (const auto& v : s.vertices)
        s.bbox.extend(v);
    s.diag = s.bbox.diagonal();
}

std::string edge_name(Index a, Index b)
{
    return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

} // namespace

BoundaryShape make_shape_3d(std::vector<Vec3> vertices, std::vector<std::array<Index, 3>> triangles)
{
    if (triangles.empty())
        throw Error("shape has no triangles");
    // Directed edge -> count; a closed, consistently oriented surface uses
    // every directed edge once and its reverse once.
    std::map<std::pair<Index, Index>, int> directed;
    for (const auto& t : triangles) {
        for (Index v : t)
            if (v >= vertices.size())
                throw Error("triangle references vertex " + std::to_string(v) + " out of range");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw Error("degenerate triangle (" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
                        std::to_string(t[2]) + ")");
        for (int i = 0; i < 3; ++i)
            ++directed[{t[i], t[(i + 1) % 3]}];
    }
    for (const auto& [e, n] : directed) {
        const auto [a, b] = e;
        if (n > 1)
            throw Error("inconsistent orientation or non-manifold edge " + edge_name(a, b));
        auto rev = directed.find({b, a});
        if (rev == directed.end())
            throw Error("open surface: boundary edge " + edge_name(std::min(a, b), std::max(a, b)));
    }
    BoundaryShape s;
    s.dim = 3;
    s.vertices = std::move(vertices);
    s.triangles = std::move(triangles);
    finish(s);
    return s;
}

BoundaryShape make_shape_2d(std::vector<Vec3> loop)
{
    if (loop.size() < 3)
        throw Error("2D shape needs at least 3 points");
    std::vector<std::array<Index, 2>> segs;
    for (Index i = 0; i < loop.size(); ++i)
        segs.push_back({i, static_cast<Index>((i + 1) % loop.size())});
    return make_shape_2d(std::move(loop), std::move(segs));
}

BoundaryShape make_shape_2d(std::vector<Vec3> vertices, std::vector<std::array<Index, 2>> segments)
{
    std::vector<int> out_deg(vertices.size(), 0), in_deg(vertices.size(), 0);
    for (const auto& s : segments) {
        if (s[0] >= vertices.size() || s[1] >= vertices.size())
            throw Error("segment references a vertex out of range");
        if (s[0] == s[1])
            throw Error("degenerate segment at vertex " + std::to_string(s[0]));
        ++out_deg[s[0]];
        ++in_deg[s[1]];
    }
    for (Index v = 0; v < vertices.size(); ++v) {
        if (out_deg[v] + in_deg[v] != 2)
            throw Error("open or non-manifold polyline at vertex " + std::to_string(v));
        if (out_deg[v] != 1)
            throw Error("inconsistent orientation at vertex " + std::to_string(v));
    }
    BoundaryShape s;
    s.dim = 2;
    for (auto& v : vertices)
        v.z() = 0.0;
    s.vertices = std::move(vertices);
    s.segments = std::move(segments);
    finish(s);
    return s;
}

Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 <= 0.0)
        return a;
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Region classification (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0)
        return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3)
        return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0)
        return a + (d1 / (d1 - d3)) * ab;
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6)
        return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0)
        return a + (d2 / (d2 - d6)) * ac;
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

struct ShapeQuery::Impl {
    struct Node {
        Aabb box;
        Index left = kInvalidIndex, right = kInvalidIndex;
        Index begin = 0, count = 0;
    };

    const BoundaryShape* shape;
    std::vector<Index> elems;
    std::vector<Node> nodes;

    explicit Impl(const BoundaryShape& s) : shape(&s)
    {
        elems.resize(s.num_elements());
        std::iota(elems.begin(), elems.end(), Index{0});
        std::vector<Vec3> centroid(elems.size());
        std::vector<Aabb> boxes(elems.size());
        for (Index i = 0; i < elems.size(); ++i) {
            Aabb b;
            Vec3 c = Vec3::Zero();
            const int n = s.dim == 2 ? 2 : 3;
            for (int k = 0; k < n; ++k) {
                const Vec3& v = s.vertices[element_vertex(i, k)];
                b.extend(v);
                c += v;
            }
            boxes[i] = b;
            centroid[i] = c / n;
        }
        if (!elems.empty())
            build(0, static_cast<Index>(elems.size()), centroid, boxes);
    }

    Index element_vertex(Index e, int k) const
    {
        return shape->dim == 2 ? shape->segments[e][k] : shape->triangles[e][k];
    }

    Index build(Index begin, Index end, const std::vector<Vec3>& centroid, const std::vector<Aabb>& boxes)
    {
        const Index id = static_cast<Index>(nodes.size());
        nodes.emplace_back();
        Aabb box, cbox;
        for (Index i = begin; i < end; ++i) {
            box.extend(boxes[elems[i]]);
            cbox.extend(centroid[elems[i]]);
        }
        nodes[id].box = box;
        if (end - begin <= 4) {
            nodes[id].begin = begin;
            nodes[id].count = end - begin;
            return id;
        }
        int axis = 0;
        cbox.extent().maxCoeff(&axis);
        const Index mid = (begin + end) / 2;
        std::nth_element(elems.begin() + begin, elems.begin() + mid, elems.begin() + end,
                         [&](Index a, Index b) { return centroid[a][axis] < centroid[b][axis]; });
        const Index l = build(begin, mid, centroid, boxes);
        const Index r = build(mid, end, centroid, boxes);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }

    Vec3 closest_on_element(Index e, const Vec3& q) const
    {
        const auto& V = shape->vertices;
        if (shape->dim == 2)
            return closest_point_on_segment(q, V[shape->segments[e][0]], V[shape->segments[e][1]]);
        const auto& t = shape->triangles[e];
        return closest_point_on_triangle(q, V[t[0]], V[t[1]], V[t[2]]);
    }

    double closest(const Vec3& q, Vec3* out) const
    {
        double best = kInf;
        Vec3 best_p = Vec3::Zero();
        if (nodes.empty())
            return best;
        std::vector<std::pair<double, Index>> stack{{0.0, 0}};
        while (!stack.empty()) {
            const auto [d, n] = stack.back();
            stack.pop_back();
            if (d * d >= best)
                continue;
            const Node& node = nodes[n];
            if (node.left == kInvalidIndex) {
                for (Index i = node.begin; i < node.begin + node.count; ++i) {
                    const Vec3 c = closest_on_element(elems[i], q);
                    const double d2 = (c - q).squaredNorm();
                    if (d2 < best)
                        best = d2, best_p = c;
                }
                continue;
            }
            const double dl = nodes[node.left].box.distance(q);
            const double dr = nodes[node.right].box.distance(q);
            // Push the farther child first so the nearer one is visited next.
            if (dl < dr) {
                stack.emplace_back(dr, node.right);
                stack.emplace_back(dl, node.left);
            } else {
                stack.emplace_back(dl, node.left);
                stack.emplace_back(dr, node.right);
            }
        }
        if (out)
            *out = best_p;
        return std::sqrt(best);
    }

    static bool ray_hits_box(const Aabb& b, const Vec3& o, const Vec3& inv)
    {
        double t0 = 0.0, t1 = kInf;
        for (int k = 0; k < 3; ++k) {
            if (std::isinf(inv[k])) {
                if (o[k] < b.lo[k] || o[k] > b.hi[k])
                    return false;
                continue;
            }
            double a = (b.lo[k] - o[k]) * inv[k];
            double c = (b.hi[k] - o[k]) * inv[k];
            if (a > c)
                std::swap(a, c);
            t0 = std::max(t0, a);
            t1 = std::min(t1, c);
            if (t0 > t1)
                return false;
        }
        return true;
    }

    // Returns -1 for a grazing hit, else 0/1 for miss/hit.
    int ray_element(Index e, const Vec3& o, const Vec3& dir) const
    {
        constexpr double kGraze = 1e-9;
        const auto& V = shape->vertices;
        if (shape->dim == 2) {
            const Vec3& a = V[shape->segments[e][0]];
            const Vec3& b = V[shape->segments[e][1]];
            const Vec3 ab = b - a;
            const double den = dir.x() * ab.y() - dir.y() * ab.x();
            const Vec3 ao = a - o;
            if (std::abs(den) < 1e-300) {
                const double cr = ao.x() * dir.y() - ao.y() * dir.x();
                return std::abs(cr) <= kGraze * (ao.norm() + ab.norm()) ? -1 : 0;
            }
            const double t = (ao.x() * ab.y() - ao.y() * ab.x()) / den;
            const double s = (ao.x() * dir.y() - ao.y() * dir.x()) / den;
            if (t < 0 || s < -kGraze || s > 1 + kGraze)
                return 0;
            if (s < kGraze || s > 1 - kGraze)
                return -1;
            return 1;
        }
        const auto& tri = shape->triangles[e];
        const Vec3& a = V[tri[0]];
        const Vec3 e1 = V[tri[1]] - a, e2 = V[tri[2]] - a;
        const Vec3 pv = dir.cross(e2);
        const double det = e1.dot(pv);
        const double scale = e1.norm() * e2.norm();
        const Vec3 tv = o - a;
        if (std::abs(det) <= 1e-12 * scale) {
            // Parallel: grazing only if the origin lies in the triangle plane.
            const Vec3 n = e1.cross(e2);
            return std::abs(n.normalized().dot(tv)) <= kGraze * std::sqrt(scale) ? -1 : 0;
        }
        const double inv = 1.0 / det;
        const double u = tv.dot(pv) * inv;
        if (u < -kGraze || u > 1 + kGraze)
            return 0;
        const Vec3 qv = tv.cross(e1);
        const double v = dir.dot(qv) * inv;
        if (v < -kGraze || u + v > 1 + kGraze)
            return 0;
        const double t = e2.dot(qv) * inv;
        if (t < 0)
            return 0;
        if (u < kGraze || v < kGraze || u + v > 1 - kGraze)
            return -1;
        return 1;
    }

    bool inside(const Vec3& q) const
    {
        if (nodes.empty())
            return false;
        for (int attempt = 0; attempt < 64; ++attempt) {
            // Deterministic quasi-random directions (golden-ratio spiral).
            const double k = attempt + 0.5;
            const double phi = 2.0 * M_PI * std::fmod(k * 0.6180339887498949 + 0.137, 1.0);
            Vec3 dir;
            if (shape->dim == 2) {
                dir = Vec3(std::cos(phi), std::sin(phi), 0.0);
            } else {
                const double z = 1.0 - 2.0 * std::fmod(k * 0.7548776662466927 + 0.31, 1.0);
                const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                dir = Vec3(r * std::cos(phi), r * std::sin(phi), z);
            }
            const Vec3 inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());
            int hits = 0;
            bool grazed = false;
            std::vector<Index> stack{0};
            while (!stack.empty() && !grazed) {
                const Node& node = nodes[stack.back()];
                stack.pop_back();
                if (!ray_hits_box(node.box, q, inv))
                    continue;
                if (node.left != kInvalidIndex) {
                    stack.push_back(node.left);
                    stack.push_back(node.right);
                    continue;
                }
                for (Index i = node.begin; i < node.begin + node.count; ++i) {
                    const int h = ray_element(elems[i], q, dir);
                    if (h < 0) {
                        grazed = true;
                        break;
                    }
                    hits += h;
                }
            }
            if (!grazed)
                return hits % 2 == 1;
        }
        return false;
    }
};

ShapeQuery::ShapeQuery(const BoundaryShape& shape) : impl_(std::make_unique<Impl>(shape)) {}
ShapeQuery::~ShapeQuery() = default;
ShapeQuery::ShapeQuery(ShapeQuery&&) noexcept = default;
ShapeQuery& ShapeQuery::operator=(ShapeQuery&&) noexcept = default;

const BoundaryShape& ShapeQuery::shape() const
{
    return *impl_->shape;
}

double ShapeQuery::unsigned_distance(const Vec3& q, Vec3* closest) const
{
    return impl_->closest(q, closest);
}

bool ShapeQuery::inside(const Vec3& q) const
{
    return impl_->inside(q);
}

double ShapeQuery::signed_distance(const Vec3& q) const
{
    const double d = unsigned_distance(q);
    return inside(q) ? -d : d;
}

bool inside(const BoundaryShape& shape, const Vec3& q)
{
    return ShapeQuery(shape).inside(q);
}

} // namespace medial
