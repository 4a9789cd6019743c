#include "medial/shapes.hpp"

#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace medial::shapes {

namespace {

using Tri = std::array<Index, 3>;

BoundaryShape closed_mesh(std::vector<Vec3> v, std::vector<Tri> t)
{
    double vol = 0.0;
    for (const auto& f : t)
        vol += v[f[0]].dot(v[f[1]].cross(v[f[2]]));
    if (vol < 0)
        for (auto& f : t)
            std::swap(f[1], f[2]);
    return make_shape_3d(std::move(v), std::move(t));
}

// Surface of revolution around the x axis from a profile (x, rho) whose first
// and last entries sit on the axis.
BoundaryShape revolve(const std::vector<std::pair<double, double>>& profile, int around)
{
    std::vector<Vec3> v;
    std::vector<Tri> t;
    const Index n = static_cast<Index>(around);
    const Index rings = static_cast<Index>(profile.size() - 2);
    v.emplace_back(profile.front().first, 0.0, 0.0);
    for (Index k = 1; k <= rings; ++k) {
        const auto [x, rho] = profile[k];
        for (Index i = 0; i < n; ++i) {
            const double th = 2.0 * M_PI * i / n;
            v.emplace_back(x, rho * std::cos(th), rho * std::sin(th));
        }
    }
    const Index south = static_cast<Index>(v.size());
    v.emplace_back(profile.back().first, 0.0, 0.0);
    auto ring = [&](Index k, Index i) { return 1 + (k - 1) * n + (i % n); };
    for (Index i = 0; i < n; ++i) {
        t.push_back({0, ring(1, i + 1), ring(1, i)});
        t.push_back({south, ring(rings, i), ring(rings, i + 1)});
    }
    for (Index k = 1; k < rings; ++k)
        for (Index i = 0; i < n; ++i) {
            t.push_back({ring(k, i), ring(k, i + 1), ring(k + 1, i + 1)});
            t.push_back({ring(k, i), ring(k + 1, i + 1), ring(k + 1, i)});
        }
    return closed_mesh(std::move(v), std::move(t));
}

std::vector<Vec3> resample_loop(const std::vector<Vec3>& corners, double spacing)
{
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        const Vec3& a = corners[i];
        const Vec3& b = corners[(i + 1) % corners.size()];
        const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
        for (int k = 0; k < m; ++k)
            out.push_back(a + (b - a) * (static_cast<double>(k) / m));
    }
    return out;
}

} // namespace

BoundaryShape icosphere(int levels, double radius, const Vec3& center)
{
    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                           {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
    for (auto& p : v)
        p.normalize();
    std::vector<Tri> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                          {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                          {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<Index, Index>, Index> mid;
        auto midpoint = [&](Index a, Index b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end())
                return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const Index id = static_cast<Index>(v.size() - 1);
            mid.emplace(key, id);
            return id;
        };
        std::vector<Tri> next;
        for (const auto& f : t) {
            const Index a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        t = std::move(next);
    }
    for (auto& p : v)
        p = center + radius * p;
    return closed_mesh(std::move(v), std::move(t));
}

BoundaryShape capsule(double radius, double spine, int around, int cap_rings, int body_rings)
{
    std::vector<std::pair<double, double>> profile;
    const double h = spine / 2.0;
    for (int k = 0; k <= cap_rings; ++k) {
        const double a = M_PI / 2.0 * k / cap_rings;
        profile.emplace_back(-h - radius * std::cos(a), radius * std::sin(a));
    }
    for (int k = 1; k < body_rings; ++k)
        profile.emplace_back(-h + spine * k / body_rings, radius);
    for (int k = cap_rings; k >= 0; --k) {
        const double a = M_PI / 2.0 * k / cap_rings;
        profile.emplace_back(h + radius * std::cos(a), radius * std::sin(a));
    }
    return revolve(profile, around);
}

BoundaryShape torus(double major, double minor, int around, int tube)
{
    std::vector<Vec3> v;
    std::vector<Tri> t;
    for (int i = 0; i < around; ++i) {
        const double u = 2.0 * M_PI * i / around;
        for (int j = 0; j < tube; ++j) {
            const double w = 2.0 * M_PI * j / tube;
            const double rho = major + minor * std::cos(w);
            v.emplace_back(rho * std::cos(u), rho * std::sin(u), minor * std::sin(w));
        }
    }
    auto id = [&](int i, int j) { return static_cast<Index>((i % around) * tube + (j % tube)); };
    for (int i = 0; i < around; ++i)
        for (int j = 0; j < tube; ++j) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return closed_mesh(std::move(v), std::move(t));
}

BoundaryShape box(const Vec3& size, int n)
{
    std::map<std::tuple<int, int, int>, Index> ids;
    std::vector<Vec3> v;
    std::vector<Tri> t;
    auto vertex = [&](int i, int j, int k) {
        const auto key = std::make_tuple(i, j, k);
        auto it = ids.find(key);
        if (it != ids.end())
            return it->second;
        v.emplace_back((static_cast<double>(i) / n - 0.5) * size.x(), (static_cast<double>(j) / n - 0.5) * size.y(),
                       (static_cast<double>(k) / n - 0.5) * size.z());
        const Index id = static_cast<Index>(v.size() - 1);
        ids.emplace(key, id);
        return id;
    };
    for (int axis = 0; axis < 3; ++axis)
        for (int side = 0; side <= 1; ++side)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    auto at = [&](int da, int db) {
                        int c[3];
                        c[axis] = side * n;
                        c[(axis + 1) % 3] = a + da;
                        c[(axis + 2) % 3] = b + db;
                        return vertex(c[0], c[1], c[2]);
                    };
                    const Index p00 = at(0, 0), p10 = at(1, 0), p11 = at(1, 1), p01 = at(0, 1);
                    if (side == 1) {
                        t.push_back({p00, p10, p11});
                        t.push_back({p00, p11, p01});
                    } else {
                        t.push_back({p00, p11, p10});
                        t.push_back({p00, p01, p11});
                    }
                }
    return closed_mesh(std::move(v), std::move(t));
}

BoundaryShape star_2d(int arms, double outer, double inner, double spacing)
{
    std::vector<Vec3> corners;
    for (int i = 0; i < 2 * arms; ++i) {
        const double a = M_PI / 2.0 + M_PI * i / arms;
        const double r = i % 2 == 0 ? outer : inner;
        corners.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
    }
    return make_shape_2d(resample_loop(corners, spacing));
}

BoundaryShape circle_2d(double radius, int n)
{
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        pts.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
    }
    return make_shape_2d(std::move(pts));
}

BoundaryShape rectangle_2d(double w, double h, double spacing)
{
    return make_shape_2d(resample_loop({{0, 0, 0}, {w, 0, 0}, {w, h, 0}, {0, h, 0}}, spacing));
}

BoundaryShape l_shape_2d(double size, double arm, double spacing)
{
    return make_shape_2d(
        resample_loop({{0, 0, 0}, {size, 0, 0}, {size, arm, 0}, {arm, arm, 0}, {arm, size, 0}, {0, size, 0}},
                      spacing));
}

double mean_edge_length(const BoundaryShape& s)
{
    double sum = 0.0;
    std::size_t n = 0;
    if (s.dim == 2) {
        for (const auto& e : s.segments)
            sum += (s.vertices[e[0]] - s.vertices[e[1]]).norm(), ++n;
    } else {
        for (const auto& f : s.triangles)
            for (int i = 0; i < 3; ++i)
                sum += (s.vertices[f[i]] - s.vertices[f[(i + 1) % 3]]).norm(), ++n;
    }
    return n ? sum / n : 0.0;
}

BoundaryShape add_normal_noise_2d(const BoundaryShape& s, double eta, std::uint64_t seed)
{
    if (s.dim != 2)
        throw Error("add_normal_noise_2d expects a 2D shape");
    const double amp = eta * mean_edge_length(s);
    std::vector<Vec3> normal(s.vertices.size(), Vec3::Zero());
    for (const auto& e : s.segments) {
        const Vec3 d = s.vertices[e[1]] - s.vertices[e[0]];
        const Vec3 n(d.y(), -d.x(), 0.0);
        normal[e[0]] += n;
        normal[e[1]] += n;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    std::vector<Vec3> v = s.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] += u(rng) * normal[i].normalized();
    return make_shape_2d(std::move(v), s.segments);
}

BoundaryShape by_name(const std::string& name)
{
    if (name == "sphere")
        return icosphere();
    if (name == "capsule")
        return capsule();
    if (name == "torus")
        return torus();
    if (name == "box")
        return box();
    if (name == "star")
        return star_2d();
    if (name == "circle")
        return circle_2d();
    if (name == "rectangle")
        return rectangle_2d();
    if (name == "lshape")
        return l_shape_2d();
    throw Error("unknown shape '" + name + "'");
}

} // namespace medial::shapes
