#include "medial/filters.hpp"

#include "medial/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace medial {

namespace {

Sphere ball_of_two(const Vec3& a, const Vec3& b)
{
    return Sphere{0.5 * (a + b), 0.5 * (a - b).norm()};
}

bool contains(const Sphere& s, const Vec3& p)
{
    return s.radius >= 0.0 && (p - s.center).norm() <= s.radius * (1.0 + 1e-10) + 1e-14;
}

// Circle through three points in their plane; the widest pair when they are
// collinear.
Sphere ball_of_three(const Vec3& p0, const Vec3& p1, const Vec3& p2)
{
    const Vec3 a = p1 - p0, b = p2 - p0;
    const Vec3 n = a.cross(b);
    const double n2 = n.squaredNorm();
    if (n2 <= 1e-24 * std::max(1.0, a.squaredNorm() * b.squaredNorm())) {
        Sphere best = ball_of_two(p0, p1);
        for (const Sphere& s : {ball_of_two(p0, p2), ball_of_two(p1, p2)})
            if (s.radius > best.radius)
                best = s;
        return best;
    }
    const Vec3 off = (a.squaredNorm() * b.cross(n) + b.squaredNorm() * n.cross(a)) / (2.0 * n2);
    return Sphere{p0 + off, off.norm()};
}

Sphere ball_of_four(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3)
{
    Eigen::Matrix3d m;
    m.row(0) = (p1 - p0).transpose();
    m.row(1) = (p2 - p0).transpose();
    m.row(2) = (p3 - p0).transpose();
    const double scale = m.rowwise().squaredNorm().maxCoeff();
    const double det = m.determinant();
    if (std::abs(det) > 1e-12 * std::pow(scale, 1.5)) {
        const Eigen::Vector3d rhs(0.5 * m.row(0).squaredNorm(), 0.5 * m.row(1).squaredNorm(),
                                  0.5 * m.row(2).squaredNorm());
        const Vec3 off = m.partialPivLu().solve(rhs);
        return Sphere{p0 + off, off.norm()};
    }
    // Coplanar support: the smallest three-point circle covering all four.
    const std::array<Vec3, 4> p{p0, p1, p2, p3};
    Sphere best{Vec3::Zero(), kInf};
    for (int skip = 0; skip < 4; ++skip) {
        std::array<Vec3, 3> q;
        for (int i = 0, k = 0; i < 4; ++i)
            if (i != skip)
                q[k++] = p[i];
        const Sphere s = ball_of_three(q[0], q[1], q[2]);
        if (s.radius < best.radius && contains(s, p[skip]))
            best = s;
    }
    return best;
}

Sphere ball_on(const std::array<Vec3, 4>& r, int n)
{
    switch (n) {
    case 0:
        return Sphere{Vec3::Zero(), -1.0};
    case 1:
        return Sphere{r[0], 0.0};
    case 2:
        return ball_of_two(r[0], r[1]);
    case 3:
        return ball_of_three(r[0], r[1], r[2]);
    default:
        return ball_of_four(r[0], r[1], r[2], r[3]);
    }
}

Sphere welzl(const std::vector<Vec3>& pts, std::size_t n, std::array<Vec3, 4>& support, int ns)
{
    if (n == 0 || ns == 4)
        return ball_on(support, ns);
    const Vec3& p = pts[n - 1];
    const Sphere d = welzl(pts, n - 1, support, ns);
    if (contains(d, p))
        return d;
    support[ns] = p;
    return welzl(pts, n - 1, support, ns + 1);
}

std::vector<Vec3> tangency_points(const MedialComplex& c, Index v, std::span<const BoundarySample> samples)
{
    const auto& ids = c.vertex(v).tangency_ids;
    if (ids.empty())
        throw Error("filter: vertex " + std::to_string(v) + " has no tangency data");
    std::vector<Vec3> pts;
    pts.reserve(ids.size());
    for (Index i : ids) {
        if (i >= samples.size())
            throw Error("filter: tangency id " + std::to_string(i) + " out of range");
        pts.push_back(samples[i].point);
    }
    return pts;
}

MedialComplex remove_failing(const MedialComplex& c, const std::function<bool(Index)>& keep)
{
    const std::vector<Index> verts = c.live_vertices();
    std::vector<char> ok(verts.size());
    parallel_for(verts.size(), [&](std::size_t i) { ok[i] = keep(verts[i]) ? 1 : 0; });
    MedialComplex out = c;
    for (std::size_t i = 0; i < verts.size(); ++i)
        if (!ok[i])
            out.remove_vertex(verts[i]);
    return out.compacted();
}

} // namespace

Sphere minimum_enclosing_ball(std::span<const Vec3> points)
{
    // Reverse order so the recursion meets the points in their given order.
    std::vector<Vec3> pts(points.rbegin(), points.rend());
    std::array<Vec3, 4> support;
    return welzl(pts, pts.size(), support, 0);
}

double separation_angle(const Vec3& center, std::span<const Vec3> points)
{
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const Vec3 a = points[i] - center, b = points[j] - center;
            best = std::max(best, std::atan2(a.cross(b).norm(), a.dot(b)));
        }
    return best;
}

double tangency_circumradius(const MedialComplex& c, Index v, std::span<const BoundarySample> samples)
{
    const auto pts = tangency_points(c, v, samples);
    return minimum_enclosing_ball(pts).radius;
}

double tangency_angle(const MedialComplex& c, Index v, std::span<const BoundarySample> samples)
{
    const auto pts = tangency_points(c, v, samples);
    return separation_angle(c.vertex(v).position, pts);
}

MedialComplex lambda_filter(const MedialComplex& c, std::span<const BoundarySample> samples, double lambda)
{
    if (!(lambda >= 0.0))
        throw Error("lambda_filter: lambda must be non-negative");
    return remove_failing(c, [&](Index v) { return tangency_circumradius(c, v, samples) >= lambda; });
}

MedialComplex angle_filter(const MedialComplex& c, std::span<const BoundarySample> samples, double theta)
{
    if (!(theta >= 0.0))
        throw Error("angle_filter: theta must be non-negative");
    return remove_failing(c, [&](Index v) { return tangency_angle(c, v, samples) >= theta; });
}

} // namespace medial
