#include "medial/envelope.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace medial;

namespace {

std::mt19937_64 rng(42);

double uni(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 rand_vec(double s)
{
    return Vec3(uni(-s, s), uni(-s, s), uni(-s, s));
}

Sphere rand_sphere()
{
    return Sphere{rand_vec(2.0), uni(0.05, 1.5)};
}

MedialVertex mv(const Vec3& p, double r)
{
    MedialVertex v;
    v.position = p;
    v.radius = r;
    return v;
}

} // namespace

TEST_CASE("primitive examples")
{
    CHECK(sphere_signed_distance(Vec3(2, 0, 0), Sphere{Vec3::Zero(), 1.0}) == doctest::Approx(1.0));

    double t = -1;
    const double d = cone_signed_distance(Vec3(1, 2, 0), Sphere{Vec3(0, 0, 0), 1}, Sphere{Vec3(2, 0, 0), 1}, &t);
    CHECK(d == doctest::Approx(1.0));
    CHECK(t == doctest::Approx(0.5));

    const Sphere a{Vec3(0, 0, 0), 1.0}, b{Vec3(3, 0, 0), 0.5};
    const Vec3 q(1.5, 1.5, 0);
    CHECK(std::abs(cone_signed_distance(q, a, b) - oracle::cone_grid_min(q, a, b, 100000)) < 1e-4);

    const Sphere s0{Vec3(0, 0, 0), 1}, s1{Vec3(2, 0, 0), 1}, s2{Vec3(1, 2, 0), 1};
    const Vec3 qs(1, 0.7, 3);
    CHECK(std::abs(slab_signed_distance(qs, s0, s1, s2) - oracle::slab_grid_min(qs, s0, s1, s2, 1000)) < 1e-4);
    // Equal radii: the slab is the triangle inflated by 1, and q sits above its interior.
    CHECK(slab_signed_distance(qs, s0, s1, s2) == doctest::Approx(2.0));
}

TEST_CASE("closed forms never exceed the grid minimum")
{
    for (int i = 0; i < 300; ++i) {
        const Sphere a = rand_sphere(), b = rand_sphere(), c = rand_sphere();
        const Vec3 q = rand_vec(4.0);
        const double cone = cone_signed_distance(q, a, b);
        const double cg = oracle::cone_grid_min(q, a, b, 20001);
        CHECK(cone <= cg + 1e-12);
        CHECK(cg - cone <= oracle::family_lipschitz(a, b, b) / 20000 + 1e-12);

        const double slab = slab_signed_distance(q, a, b, c);
        const double sg = oracle::slab_grid_min(q, a, b, c, 200);
        CHECK(slab <= sg + 1e-12);
        CHECK(sg - slab <= 2.0 * oracle::family_lipschitz(a, b, c) / 200 + 1e-12);
    }
}

TEST_CASE("reported barycentric reproduces the distance")
{
    for (int i = 0; i < 200; ++i) {
        EnvelopePrimitive p;
        p.kind = PrimitiveKind::Slab;
        p.spheres = {rand_sphere(), rand_sphere(), rand_sphere()};
        const Vec3 q = rand_vec(4.0);
        auto r = primitive_signed_distance(q, p);
        const double f = (q - p.center_at(r.barycentric)).norm() - p.radius_at(r.barycentric);
        CHECK(std::abs(f - r.distance) <= 1e-9 * std::max(1.0, std::abs(r.distance)));
        CHECK(r.barycentric[0] + r.barycentric[1] + r.barycentric[2] == doctest::Approx(1.0));
    }
}

TEST_CASE("degenerate primitives")
{
    // One sphere contains the other: the cone is just the big sphere.
    const Sphere big{Vec3(0, 0, 0), 2.0}, small{Vec3(0.5, 0, 0), 0.5};
    const Vec3 q(0, 3, 0);
    CHECK(cone_signed_distance(q, big, small) == doctest::Approx(1.0));
    // Identical spheres.
    CHECK(cone_signed_distance(q, big, big) == doctest::Approx(1.0));

    // Collinear slab with linear radii equals the cone over its extremes.
    for (int i = 0; i < 100; ++i) {
        const Sphere a = rand_sphere(), b = rand_sphere();
        const double t = uni(0.1, 0.9);
        const Sphere m{(1 - t) * a.center + t * b.center, (1 - t) * a.radius + t * b.radius};
        const Vec3 p = rand_vec(4.0);
        CHECK(std::abs(slab_signed_distance(p, a, m, b) - cone_signed_distance(p, a, b)) < 1e-9);
    }
}

TEST_CASE("rigid motion invariance")
{
    for (int i = 0; i < 100; ++i) {
        const Eigen::Quaterniond rot = Eigen::Quaterniond::UnitRandom();
        const Vec3 shift = rand_vec(5.0);
        auto xf = [&](const Vec3& p) -> Vec3 { return rot * p + shift; };
        const Sphere a = rand_sphere(), b = rand_sphere(), c = rand_sphere();
        const Vec3 q = rand_vec(4.0);
        const double d0 = slab_signed_distance(q, a, b, c);
        const double d1 = slab_signed_distance(xf(q), Sphere{xf(a.center), a.radius}, Sphere{xf(b.center), b.radius},
                                               Sphere{xf(c.center), c.radius});
        CHECK(std::abs(d0 - d1) < 1e-9);
    }
}

TEST_CASE("complex signed distance")
{
    std::vector<MedialVertex> v = {mv(Vec3(0, 0, 0), 1), mv(Vec3(10, 0, 0), 1)};
    auto two = build_complex(3, v, {}, {});
    CHECK(complex_signed_distance(Vec3(4, 0, 0), two).distance == doctest::Approx(3.0));

    std::vector<MedialVertex> chain = {mv(Vec3(0, 0, 0), 1), mv(Vec3(1, 0, 0), 1), mv(Vec3(2, 0, 0), 1)};
    std::vector<EdgeVerts> e = {{0, 1}, {1, 2}};
    auto c = build_complex(3, chain, e, {});
    for (int i = 0; i < 100; ++i) {
        const Vec3 q = rand_vec(3.0);
        CHECK(std::abs(complex_signed_distance(q, c).distance -
                       cone_signed_distance(q, Sphere{Vec3(0, 0, 0), 1}, Sphere{Vec3(2, 0, 0), 1})) < 1e-9);
    }
    CHECK_THROWS_AS(complex_signed_distance(Vec3::Zero(), MedialComplex(3)), Error);
}

TEST_CASE("envelope distance properties on random complexes")
{
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MedialVertex> v;
        for (int i = 0; i < 6; ++i)
            v.push_back(mv(rand_vec(2.0), uni(0.1, 0.8)));
        std::vector<FaceVerts> f = {{0, 1, 2}, {2, 3, 4}};
        std::vector<EdgeVerts> e = {{4, 5}};
        auto c = build_complex(3, v, e, f);
        for (int i = 0; i < 100; ++i) {
            const Vec3 q1 = rand_vec(4.0), q2 = rand_vec(4.0);
            const double d1 = complex_signed_distance(q1, c).distance;
            const double d2 = complex_signed_distance(q2, c).distance;
            CHECK(std::abs(d1 - d2) <= (q1 - q2).norm() + 1e-12);
            // Adding a primitive never increases the distance.
            auto bigger = c;
            const Index extra = bigger.add_vertex(mv(rand_vec(2.0), uni(0.1, 0.8)));
            bigger.insert_edge(0, extra);
            CHECK(complex_signed_distance(q1, bigger).distance <= d1 + 1e-15);
        }
    }
}

TEST_CASE("protrusion")
{
    auto ball = [](const Vec3& x) { return x.norm() - 2.0; };
    EnvelopePrimitive s;
    s.spheres[0] = Sphere{Vec3::Zero(), 1.0};
    CHECK(protrusion_of_primitive(s, ball, 16) == 0.0);
    s.spheres[0].center = Vec3(2, 0, 0);
    CHECK(protrusion_of_primitive(s, ball, 16) == doctest::Approx(1.0));

    // Cone half inside the unit box [-1,1]^3 against a dense estimate.
    auto box = [](const Vec3& x) {
        const Vec3 d = x.cwiseAbs() - Vec3::Ones();
        return d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
    };
    EnvelopePrimitive cone;
    cone.kind = PrimitiveKind::Cone;
    cone.spheres[0] = Sphere{Vec3(0, 0, 0), 0.3};
    cone.spheres[1] = Sphere{Vec3(1.5, 0.2, 0), 0.2};
    const double dense = protrusion_of_primitive(cone, box, 10000);
    CHECK(std::abs(protrusion_of_primitive(cone, box, 16) - dense) <= 0.02 * dense);

    CHECK(barycentric_samples(PrimitiveKind::Slab, 16).size() >= 16);
    CHECK(barycentric_samples(PrimitiveKind::Cone, 16).size() == 16);
}

TEST_CASE("primitive index matches brute force")
{
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<EnvelopePrimitive> prims;
        for (int i = 0; i < 150; ++i) {
            EnvelopePrimitive p;
            p.kind = static_cast<PrimitiveKind>(1 + i % 3);
            const Vec3 base = rand_vec(10.0);
            for (auto& s : p.spheres)
                s = Sphere{base + rand_vec(0.7), uni(0.01, 0.4)};
            p.simplex = SimplexRef{SimplexKind::Vertex, static_cast<Index>(i)};
            prims.push_back(p);
        }
        PrimitiveIndex index(prims);
        for (int i = 0; i < 300; ++i) {
            const Vec3 q = rand_vec(14.0);
            const auto fast = index.query(q);
            const auto slow = min_signed_distance(q, prims);
            CHECK(fast.distance == slow.distance);
        }
    }
}
