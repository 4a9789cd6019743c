#include "medial/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace medial {

Vec3 EnvelopePrimitive::center_at(const std::array<double, 3>& a) const
{
    Vec3 c = Vec3::Zero();
    for (int i = 0; i < size(); ++i)
        c += a[i] * spheres[i].center;
    return c;
}

double EnvelopePrimitive::radius_at(const std::array<double, 3>& a) const
{
    double r = 0.0;
    for (int i = 0; i < size(); ++i)
        r += a[i] * spheres[i].radius;
    return r;
}

double EnvelopePrimitive::max_radius() const
{
    double r = 0.0;
    for (int i = 0; i < size(); ++i)
        r = std::max(r, spheres[i].radius);
    return r;
}

Aabb EnvelopePrimitive::bounds() const
{
    Aabb b;
    for (int i = 0; i < size(); ++i) {
        b.extend(Vec3(spheres[i].center.array() - spheres[i].radius));
        b.extend(Vec3(spheres[i].center.array() + spheres[i].radius));
    }
    return b;
}

EnvelopePrimitive make_primitive(const MedialComplex& c, SimplexRef s)
{
    EnvelopePrimitive p;
    p.simplex = s;
    auto put = [&](int i, Index v) {
        p.spheres[i] = Sphere{c.vertex(v).position, c.vertex(v).radius};
    };
    switch (s.kind) {
    case SimplexKind::Vertex:
        p.kind = PrimitiveKind::Sphere;
        put(0, s.id);
        break;
    case SimplexKind::Edge:
        p.kind = PrimitiveKind::Cone;
        put(0, c.edge(s.id)[0]);
        put(1, c.edge(s.id)[1]);
        break;
    case SimplexKind::Face:
        p.kind = PrimitiveKind::Slab;
        for (int i = 0; i < 3; ++i)
            put(i, c.face(s.id)[i]);
        break;
    }
    return p;
}

std::vector<EnvelopePrimitive> make_primitives(const MedialComplex& c, std::span<const SimplexRef> simplices)
{
    std::vector<EnvelopePrimitive> out;
    out.reserve(simplices.size());
    for (const auto& s : simplices)
        out.push_back(make_primitive(c, s));
    return out;
}

double sphere_signed_distance(const Vec3& q, const Sphere& s)
{
    return (q - s.center).norm() - s.radius;
}

double cone_signed_distance(const Vec3& q, const Sphere& a, const Sphere& b, double* t_out)
{
    const Vec3 u = b.center - a.center;
    const Vec3 w = q - a.center;
    const double dr = b.radius - a.radius;
    const double uu = u.squaredNorm();
    auto f = [&](double t) { return (w - t * u).norm() - (a.radius + t * dr); };

    double best_t = 0.0, best = f(0.0);
    auto consider = [&](double t) {
        const double v = f(t);
        if (v < best)
            best = v, best_t = t;
    };
    consider(1.0);

    const double k = uu - dr * dr;
    if (uu > 0.0 && k > 1e-12 * uu) {
        // Stationarity uu (t - t0) = dr |w - t u| with t0 the foot of q on the
        // axis; squaring gives (t - t0) = dr d_perp / (|u| sqrt(k)).
        const double uw = u.dot(w);
        const double t0 = uw / uu;
        const double dperp = (w - t0 * u).norm();
        const double t = t0 + dr * dperp / (std::sqrt(uu) * std::sqrt(k));
        consider(std::clamp(t, 0.0, 1.0));
    } else if (uu > 0.0 && k > -1e-12 * uu) {
        // Nearly tangent configuration: the closed form loses precision, but f
        // is still convex.
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (f(m1) <= f(m2))
                hi = m2;
            else
                lo = m1;
        }
        consider(0.5 * (lo + hi));
    }
    // Otherwise one sphere contains the other and f is monotone in t.
    if (t_out)
        *t_out = best_t;
    return best;
}

double slab_signed_distance(const Vec3& q, const Sphere& a, const Sphere& b, const Sphere& c,
                            std::array<double, 3>* bary_out)
{
    std::array<double, 3> bary{1.0, 0.0, 0.0};
    double t = 0.0;
    double best = cone_signed_distance(q, a, b, &t);
    bary = {1.0 - t, t, 0.0};
    double d = cone_signed_distance(q, a, c, &t);
    if (d < best)
        best = d, bary = {1.0 - t, 0.0, t};
    d = cone_signed_distance(q, b, c, &t);
    if (d < best)
        best = d, bary = {0.0, 1.0 - t, t};

    const Vec3 u = b.center - a.center, v = c.center - a.center;
    const double uu = u.squaredNorm(), uv = u.dot(v), vv = v.squaredNorm();
    const double det = uu * vv - uv * uv;
    if (det > 1e-12 * uu * vv) {
        const Vec3 w = q - a.center;
        const double uw = u.dot(w), vw = v.dot(w);
        const double s0 = (vv * uw - uv * vw) / det;
        const double t0 = (uu * vw - uv * uw) / det;
        const Vec3 qp = a.center + s0 * u + t0 * v;
        const double h = (q - qp).norm();
        // In-plane part of the unit direction (q - c)/|q - c| at an interior
        // stationary point: its dot products with u and v are -dr1 and -dr2.
        const double dr1 = b.radius - a.radius, dr2 = c.radius - a.radius;
        const double alpha = (vv * -dr1 - uv * -dr2) / det;
        const double beta = (uu * -dr2 - uv * -dr1) / det;
        const double n2 = -alpha * dr1 - beta * dr2;
        if (n2 < 1.0) {
            const double g = h / std::sqrt(1.0 - n2);
            const double s = s0 - g * alpha, tt = t0 - g * beta;
            if (s >= 0.0 && tt >= 0.0 && s + tt <= 1.0) {
                const Vec3 cc = a.center + s * u + tt * v;
                const double r = a.radius + s * dr1 + tt * dr2;
                const double fi = (q - cc).norm() - r;
                if (fi < best)
                    best = fi, bary = {1.0 - s - tt, s, tt};
            }
        }
    }
    if (bary_out)
        *bary_out = bary;
    return best;
}

SignedDistanceResult primitive_signed_distance(const Vec3& q, const EnvelopePrimitive& prim)
{
    SignedDistanceResult r;
    r.primitive = prim.simplex;
    const auto& s = prim.spheres;
    switch (prim.kind) {
    case PrimitiveKind::Sphere:
        r.distance = sphere_signed_distance(q, s[0]);
        r.barycentric = {1.0, 0.0, 0.0};
        break;
    case PrimitiveKind::Cone: {
        double t = 0.0;
        r.distance = cone_signed_distance(q, s[0], s[1], &t);
        r.barycentric = {1.0 - t, t, 0.0};
        break;
    }
    case PrimitiveKind::Slab:
        r.distance = slab_signed_distance(q, s[0], s[1], s[2], &r.barycentric);
        break;
    }
    return r;
}

SignedDistanceResult min_signed_distance(const Vec3& q, std::span<const EnvelopePrimitive> prims)
{
    SignedDistanceResult best;
    for (const auto& p : prims) {
        auto r = primitive_signed_distance(q, p);
        if (r.distance < best.distance)
            best = r;
    }
    return best;
}

SignedDistanceResult complex_signed_distance(const Vec3& q, const MedialComplex& c,
                                             std::span<const SimplexRef> candidates)
{
    if (c.num_vertices() == 0)
        throw Error("complex_signed_distance: empty complex");
    std::vector<SimplexRef> all;
    if (candidates.empty()) {
        all = c.maximal_simplices();
        candidates = all;
    }
    SignedDistanceResult best;
    for (const auto& s : candidates) {
        auto r = primitive_signed_distance(q, make_primitive(c, s));
        if (r.distance < best.distance)
            best = r;
    }
    return best;
}

std::vector<std::array<double, 3>> barycentric_samples(PrimitiveKind kind, int n)
{
    std::vector<std::array<double, 3>> out;
    switch (kind) {
    case PrimitiveKind::Sphere:
        out.push_back({1.0, 0.0, 0.0});
        break;
    case PrimitiveKind::Cone: {
        const int m = std::max(n, 2);
        for (int i = 0; i < m; ++i) {
            const double t = static_cast<double>(i) / (m - 1);
            out.push_back({1.0 - t, t, 0.0});
        }
        break;
    }
    case PrimitiveKind::Slab: {
        int m = 1;
        while ((m + 1) * (m + 2) / 2 < n)
            ++m;
        for (int i = 0; i <= m; ++i)
            for (int j = 0; i + j <= m; ++j) {
                const double s = static_cast<double>(i) / m, t = static_cast<double>(j) / m;
                out.push_back({1.0 - s - t, s, t});
            }
        break;
    }
    }
    return out;
}

double protrusion_of_primitive(const EnvelopePrimitive& prim, const std::function<double(const Vec3&)>& boundary_sdf,
                               int n_samples)
{
    double worst = 0.0;
    for (const auto& a : barycentric_samples(prim.kind, n_samples))
        worst = std::max(worst, boundary_sdf(prim.center_at(a)) + prim.radius_at(a));
    return worst;
}

PrimitiveIndex::PrimitiveIndex(std::vector<EnvelopePrimitive> prims) : prims_(std::move(prims))
{
    if (prims_.empty())
        return;
    Aabb all;
    double rsum = 0.0;
    boxes_.reserve(prims_.size());
    for (const auto& p : prims_) {
        boxes_.push_back(p.bounds());
        all.extend(boxes_.back());
        for (int i = 0; i < p.size(); ++i)
            rsum += p.spheres[i].radius / p.size();
    }
    const Vec3 ext = all.extent();
    const double mean_r = rsum / prims_.size();
    // Twice the mean radius, but never so fine that the grid explodes.
    const double floor_cell = std::max(ext.maxCoeff() / 128.0, 1e-12 * (1.0 + ext.norm()));
    cell_ = std::max(2.0 * mean_r, floor_cell);
    origin_ = all.lo;
    for (int k = 0; k < 3; ++k)
        dims_[k] = std::max(1, static_cast<int>(std::ceil(ext[k] / cell_)));
    for (int k = 0; k < 3; ++k)
        if (origin_[k] + dims_[k] * cell_ < all.hi[k])
            ++dims_[k];

    const std::size_t ncells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    std::vector<Index> count(ncells + 1, 0);
    auto for_cells = [&](const Aabb& b, auto&& fn) {
        const auto lo = cell_of(b.lo), hi = cell_of(b.hi);
        for (int x = lo[0]; x <= hi[0]; ++x)
            for (int y = lo[1]; y <= hi[1]; ++y)
                for (int z = lo[2]; z <= hi[2]; ++z)
                    fn((static_cast<std::size_t>(x) * dims_[1] + y) * dims_[2] + z);
    };
    for (const auto& b : boxes_)
        for_cells(b, [&](std::size_t c) { ++count[c + 1]; });
    for (std::size_t c = 0; c < ncells; ++c)
        count[c + 1] += count[c];
    cell_start_ = count;
    cell_items_.resize(count.back());
    for (Index i = 0; i < boxes_.size(); ++i)
        for_cells(boxes_[i], [&](std::size_t c) { cell_items_[count[c]++] = i; });
}

PrimitiveIndex PrimitiveIndex::from_complex(const MedialComplex& c)
{
    const auto maximal = c.maximal_simplices();
    return PrimitiveIndex(make_primitives(c, maximal));
}

std::array<int, 3> PrimitiveIndex::cell_of(const Vec3& p) const
{
    std::array<int, 3> out{};
    for (int k = 0; k < 3; ++k) {
        const double f = std::floor((p[k] - origin_[k]) / cell_);
        out[k] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(dims_[k] - 1)));
    }
    return out;
}

SignedDistanceResult PrimitiveIndex::query(const Vec3& q) const
{
    SignedDistanceResult best;
    if (prims_.empty())
        return best;
    thread_local std::vector<std::uint32_t> stamp;
    thread_local std::uint32_t epoch = 0;
    if (stamp.size() < prims_.size()) {
        stamp.assign(prims_.size(), 0);
        epoch = 0;
    }
    if (++epoch == 0) {
        std::fill(stamp.begin(), stamp.end(), 0);
        epoch = 1;
    }

    const auto c = cell_of(q);
    auto visit_cell = [&](int x, int y, int z) {
        const std::size_t cell = (static_cast<std::size_t>(x) * dims_[1] + y) * dims_[2] + z;
        for (Index i = cell_start_[cell]; i < cell_start_[cell + 1]; ++i) {
            const Index p = cell_items_[i];
            if (stamp[p] == epoch)
                continue;
            stamp[p] = epoch;
            // Outside the box, the box distance bounds the signed distance.
            const double bd = boxes_[p].distance(q);
            if (bd > 0.0 && bd >= best.distance)
                continue;
            auto r = primitive_signed_distance(q, prims_[p]);
            if (r.distance < best.distance)
                best = r;
        }
    };
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int k = 0; k <= max_ring; ++k) {
        std::array<int, 3> lo, hi;
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max(0, c[a] - k);
            hi[a] = std::min(dims_[a] - 1, c[a] + k);
        }
        // Cells at Chebyshev distance exactly k from c.
        for (int x = lo[0]; x <= hi[0]; ++x)
            for (int y = lo[1]; y <= hi[1]; ++y) {
                if (std::abs(x - c[0]) == k || std::abs(y - c[1]) == k) {
                    for (int z = lo[2]; z <= hi[2]; ++z)
                        visit_cell(x, y, z);
                } else {
                    if (c[2] - k >= 0)
                        visit_cell(x, y, c[2] - k);
                    if (k > 0 && c[2] + k < dims_[2])
                        visit_cell(x, y, c[2] + k);
                }
            }
        // Unvisited cells lie in the grid beyond one of the ring box faces.
        double bound = kInf;
        for (int a = 0; a < 3; ++a) {
            Aabb beyond;
            beyond.lo = origin_;
            beyond.hi = origin_ + cell_ * Vec3(dims_[0], dims_[1], dims_[2]);
            if (lo[a] > 0) {
                Aabb below = beyond;
                below.hi[a] = origin_[a] + lo[a] * cell_;
                bound = std::min(bound, below.distance(q));
            }
            if (hi[a] < dims_[a] - 1) {
                Aabb above = beyond;
                above.lo[a] = origin_[a] + (hi[a] + 1) * cell_;
                bound = std::min(bound, above.distance(q));
            }
        }
        if (best.distance <= bound)
            break;
    }
    return best;
}

} // namespace medial
