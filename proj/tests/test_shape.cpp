#include "medial/shape.hpp"
#include "medial/shapes.hpp"

#include <doctest.h>

#include <random>

using namespace medial;

TEST_CASE("generated shapes are closed and valid")
{
    CHECK(shapes::icosphere(3).vertices.size() == 642);
    for (const char* name : {"sphere", "capsule", "torus", "box", "star", "circle", "rectangle", "lshape"})
        CHECK_NOTHROW(shapes::by_name(name));
}

TEST_CASE("inside on analytic shapes")
{
    auto ball = shapes::icosphere(3);
    ShapeQuery q(ball);
    CHECK(q.inside(Vec3(0, 0, 0)));
    CHECK_FALSE(q.inside(Vec3(5, 0, 0)));
    // Vertex-aligned probe forces grazing rays to be retried.
    CHECK(q.inside(0.5 * ball.vertices[0]));

    auto tor = shapes::torus(2.0, 0.5);
    ShapeQuery t(tor);
    CHECK_FALSE(t.inside(Vec3(0, 0, 0)));
    CHECK(t.inside(Vec3(2, 0, 0)));
    CHECK_FALSE(t.inside(Vec3(2, 0, 0.6)));

    auto sq = make_shape_2d({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    ShapeQuery s(sq);
    CHECK(s.inside(Vec3(0.5, 0.5, 0)));
    CHECK(s.inside(Vec3(0.5, 0.0 + 1e-6, 0)));
    CHECK_FALSE(s.inside(Vec3(1.5, 0.5, 0)));
}

TEST_CASE("distance queries match brute force")
{
    auto tor = shapes::torus(2.0, 0.5, 32, 12);
    ShapeQuery q(tor);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(u(rng), u(rng), u(rng));
        double best = kInf;
        for (const auto& f : tor.triangles)
            best = std::min(best, (closest_point_on_triangle(p, tor.vertices[f[0]], tor.vertices[f[1]],
                                                             tor.vertices[f[2]]) -
                                   p)
                                      .norm());
        CHECK(q.unsigned_distance(p) == doctest::Approx(best).epsilon(1e-12));
        // Analytic torus as a sign oracle away from the surface.
        const double rho = std::hypot(p.x(), p.y());
        const double analytic = std::hypot(rho - 2.0, p.z()) - 0.5;
        if (std::abs(analytic) > 0.05)
            CHECK((q.signed_distance(p) < 0) == (analytic < 0));
    }
}

TEST_CASE("validation names the offending edge")
{
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<std::array<Index, 3>> open = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}};
    CHECK_THROWS_WITH_AS(make_shape_3d(v, open), doctest::Contains("boundary edge (0,2)"), Error);
    std::vector<std::array<Index, 3>> flipped = {{0, 1, 2}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
    CHECK_THROWS_AS(make_shape_3d(v, flipped), Error);
    CHECK_THROWS_AS(make_shape_2d(v, {{0, 1}, {1, 2}}), Error);
}

TEST_CASE("closest point on triangle regions")
{
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    CHECK((closest_point_on_triangle(Vec3(0.2, 0.2, 1), a, b, c) - Vec3(0.2, 0.2, 0)).norm() < 1e-15);
    CHECK((closest_point_on_triangle(Vec3(-1, -1, 0), a, b, c) - a).norm() < 1e-15);
    CHECK((closest_point_on_triangle(Vec3(1, 1, 0), a, b, c) - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
    CHECK((closest_point_on_segment(Vec3(0.5, 2, 0), a, b) - Vec3(0.5, 0, 0)).norm() < 1e-15);
}
