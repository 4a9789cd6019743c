#include "medial/init.hpp"
#include "medial/envelope.hpp"
#include "medial/filters.hpp"
#include "medial/shapes.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace medial;

namespace {

// Distance from p to the segment of the rectangle [0,w]x[0,h] medial axis
// (w >= h): the mid-line segment plus the four corner bisectors.
double rectangle_ma_distance(const Vec3& p, double w, double h)
{
    const double m = h / 2.0;
    const Vec3 a(m, m, 0), b(w - m, m, 0);
    double d = (closest_point_on_segment(p, a, b) - p).norm();
    const Vec3 corners[4] = {{0, 0, 0}, {0, h, 0}, {w, 0, 0}, {w, h, 0}};
    const Vec3 ends[4] = {a, a, b, b};
    for (int i = 0; i < 4; ++i)
        d = std::min(d, (closest_point_on_segment(p, corners[i], ends[i]) - p).norm());
    return d;
}

void check_tangency(const MedialComplex& c, const std::vector<BoundarySample>& s, double diag)
{
    for (Index v : c.live_vertices()) {
        const auto& mv = c.vertex(v);
        // Voronoi vertices touch dim + 1 samples; 2D edge subdivision points
        // lie on a bisector and touch two.
        CHECK(mv.tangency_ids.size() >= static_cast<std::size_t>(c.dim()));
        for (Index t : mv.tangency_ids)
            CHECK(std::abs((s[t].point - mv.position).norm() - mv.radius) <= 1e-7 * diag);
        // Medial balls are empty.
        double nearest = kInf;
        for (const auto& x : s)
            nearest = std::min(nearest, (x.point - mv.position).norm());
        CHECK(nearest >= mv.radius - 1e-7 * diag);
    }
}

} // namespace

TEST_CASE("sample_boundary")
{
    auto sq = make_shape_2d({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    auto s4 = sample_boundary(sq, 4, 1);
    REQUIRE(s4.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(s4[i].point == sq.vertices[i]);
    CHECK_THROWS_AS(sample_boundary(sq, 3, 1), Error);

    auto ball = shapes::icosphere(3);
    auto s = sample_boundary(ball, 2000, 7);
    REQUIRE(s.size() == 2000);
    for (std::size_t i = 0; i < 642; ++i)
        CHECK(s[i].point == ball.vertices[i]);
    ShapeQuery q(ball);
    for (std::size_t i = 642; i < 2000; ++i)
        CHECK(q.unsigned_distance(s[i].point) <= 1e-9 * ball.diag);

    auto again = sample_boundary(ball, 2000, 7);
    for (std::size_t i = 0; i < 2000; ++i)
        CHECK(again[i].point == s[i].point);
}

TEST_CASE("planar edges track the exact radius")
{
    auto star = shapes::star_2d();
    auto s = sample_boundary(star, 2000, 7);
    InitStats st;
    auto c = initial_medial_complex(s, star, &st);
    CHECK(st.refined > 0);
    check_tangency(c, s, star.diag);
    const double tol = 0.1 * sample_spacing(star, s.size());
    double worst = 0.0;
    for (Index e : c.live_edges()) {
        const auto& a = c.vertex(c.edge(e)[0]);
        const auto& b = c.vertex(c.edge(e)[1]);
        for (double t : {0.25, 0.5, 0.75}) {
            const Vec3 x = (1 - t) * a.position + t * b.position;
            double nearest = kInf;
            for (const auto& p : s)
                nearest = std::min(nearest, (p.point - x).norm());
            worst = std::max(worst, (1 - t) * a.radius + t * b.radius - nearest);
        }
    }
    CHECK(worst <= tol + 1e-9);

    // Reflex corners are no longer swallowed by long interpolated edges.
    double deepest = 0.0;
    for (const auto& p : s)
        deepest = std::min(deepest, complex_signed_distance(p.point, c).distance);
    CHECK(-deepest <= 2.0 * tol);
}

TEST_CASE("circle medial axis collapses to its centre")
{
    auto circle = shapes::circle_2d(1.0, 400);
    auto s = sample_boundary(circle, 400, 1);
    auto c = initial_medial_complex(s, circle);
    REQUIRE(c.num_vertices() >= 1);
    for (Index v : c.live_vertices()) {
        CHECK(c.vertex(v).radius == doctest::Approx(1.0).epsilon(0.05));
        CHECK(c.vertex(v).position.norm() < 0.05);
    }
}

TEST_CASE("rectangle medial axis")
{
    auto rect = shapes::rectangle_2d(4.0, 1.0, 0.02);
    auto s = sample_boundary(rect, 500, 3);
    InitStats st;
    auto c = initial_medial_complex(s, rect, &st);
    const double spacing = sample_spacing(rect, s.size());
    double worst = 0.0;
    for (Index v : c.live_vertices())
        worst = std::max(worst, rectangle_ma_distance(c.vertex(v).position, 4.0, 1.0));
    CHECK(worst <= spacing);
    CHECK(connected_components(c) == 1);
    check_tangency(c, s, rect.diag);

    // Corner bisector balls touch two sides of a right angle and are not
    // counted, so the estimate measures to the mid-line segment.
    auto fs = local_feature_size(s, c);
    const Vec3 a(0.5, 0.5, 0.0), b(3.5, 0.5, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(std::abs(fs.lfs[i] - (closest_point_on_segment(s[i].point, a, b) - s[i].point).norm()) <=
              2.0 * spacing);
    CHECK(fs.global_cap == doctest::Approx(0.25).epsilon(0.02));
    CHECK(fs.support_vertices > 0);
}

TEST_CASE("capsule medial vertices hug the spine")
{
    auto cap = shapes::capsule(1.0, 2.0, 48, 12, 12);
    auto s = sample_boundary(cap, 5000, 1);
    auto c = initial_medial_complex(s, cap);
    // The faceted mesh's own medial axis also has sheets running out to every
    // facet edge; the near-maximal spheres are the ones that sit on the spine.
    const double spacing = sample_spacing(cap, s.size());
    std::size_t maximal = 0, near = 0;
    for (Index v : c.live_vertices()) {
        const Vec3& p = c.vertex(v).position;
        if (c.vertex(v).radius < 1.0 - 2.0 * spacing)
            continue;
        ++maximal;
        if ((closest_point_on_segment(p, Vec3(-1, 0, 0), Vec3(1, 0, 0)) - p).norm() <= 2.0 * spacing)
            ++near;
    }
    CHECK(maximal > 0);
    CHECK(near >= 0.95 * maximal);
    for (int k = 0; k <= 20; ++k) {
        const Vec3 spine(-1.0 + 0.1 * k, 0, 0);
        double best = kInf;
        for (Index v : c.live_vertices())
            best = std::min(best, (c.vertex(v).position - spine).norm());
        CHECK(best <= 2.0 * spacing);
    }
    check_tangency(c, s, cap.diag);
    c.validate();

    ShapeQuery q(cap);
    for (Index v : c.live_vertices()) {
        const auto& mv = c.vertex(v);
        CHECK(q.inside(mv.position));
        CHECK(q.signed_distance(mv.position) + mv.radius <= 2.0 * spacing);
    }
}

TEST_CASE("sphere feature size")
{
    auto ball = shapes::icosphere(3);
    auto s = sample_boundary(ball, 2000, 7);
    auto c = initial_medial_complex(s, ball);
    auto fs = local_feature_size(s, c);

    // Recompute the radius floor and the stable set by brute force.
    std::vector<double> nn(s.size(), kInf);
    for (Index v : c.live_vertices()) {
        const auto& t = c.vertex(v).tangency_ids;
        for (Index i : t)
            for (Index j : t)
                if (i != j)
                    nn[i] = std::min(nn[i], (s[i].point - s[j].point).norm());
    }
    std::vector<double> sorted;
    for (double d : nn)
        if (d < kInf)
            sorted.push_back(d);
    std::sort(sorted.begin(), sorted.end());
    const double resolution = sorted[sorted.size() * 95 / 100];
    CHECK(fs.lambda == doctest::Approx(std::max(2.0 * resolution, 0.01 * ball.diag)));

    std::vector<Vec3> stable;
    for (Index v : c.live_vertices()) {
        const auto& mv = c.vertex(v);
        if (mv.radius < fs.lambda)
            continue;
        std::vector<Vec3> pts;
        for (Index i : mv.tangency_ids)
            pts.push_back(s[i].point);
        if (minimum_enclosing_ball(pts).radius >= 0.98 * mv.radius)
            stable.push_back(mv.position);
    }
    REQUIRE(!stable.empty());
    CHECK(fs.support_vertices == stable.size());

    double lo = kInf;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double brute = kInf;
        for (const Vec3& p : stable)
            brute = std::min(brute, (s[i].point - p).norm());
        CHECK(fs.lfs[i] == doctest::Approx(brute).epsilon(1e-12));
        CHECK(fs.lfs[i] == doctest::Approx(1.0).epsilon(0.05));
        lo = std::min(lo, fs.lfs[i]);
    }
    CHECK(fs.global_cap == doctest::Approx(lo / 2.0));
    CHECK(fs.global_cap == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("feature size without tangency data")
{
    auto cap = shapes::capsule();
    auto s = sample_boundary(cap, 500, 2);
    MedialVertex a, b;
    a.position = Vec3(-1, 0, 0);
    b.position = Vec3(1, 0, 0);
    a.radius = b.radius = 1.0;
    std::vector<EdgeVerts> e = {{0, 1}};
    auto c = build_complex(3, {a, b}, e, {});
    auto fs = local_feature_size(s, c);
    CHECK(fs.support_vertices == 2);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(fs.lfs[i] == doctest::Approx(std::min((s[i].point - a.position).norm(),
                                                    (s[i].point - b.position).norm())));
}

TEST_CASE("rotation equivariance")
{
    auto star = shapes::star_2d(5, 1.0, 0.5, 0.05);
    const Eigen::AngleAxisd rot(0.7, Vec3::UnitZ());
    std::vector<Vec3> rv;
    for (const auto& p : star.vertices)
        rv.push_back(rot * p);
    auto rstar = make_shape_2d(rv, star.segments);
    auto s1 = sample_boundary(star, star.vertices.size(), 1);
    auto s2 = sample_boundary(rstar, rstar.vertices.size(), 1);
    auto c1 = initial_medial_complex(s1, star);
    auto c2 = initial_medial_complex(s2, rstar);
    // Compare as sphere sets: every rotated sphere has a partner.
    std::size_t matched = 0;
    for (Index v : c1.live_vertices()) {
        const Vec3 p = rot * c1.vertex(v).position;
        for (Index w : c2.live_vertices())
            if ((c2.vertex(w).position - p).norm() < 1e-7 &&
                std::abs(c2.vertex(w).radius - c1.vertex(v).radius) < 1e-7) {
                ++matched;
                break;
            }
    }
    CHECK(matched == c1.num_vertices());
    CHECK(c1.num_vertices() == c2.num_vertices());
    CHECK(connected_components(c1) == 1);
}

TEST_CASE("assign_nearest")
{
    auto cap = shapes::capsule();
    auto s = sample_boundary(cap, 1000, 2);
    MedialVertex a, b;
    a.position = Vec3(-1, 0, 0);
    b.position = Vec3(1, 0, 0);
    a.radius = b.radius = 1.0;
    std::vector<EdgeVerts> e = {{0, 1}};
    auto c = build_complex(3, {a, b}, e, {});
    const double worst = assign_nearest(s, c);
    CHECK(worst < 0.02);
    for (const auto& x : s)
        CHECK(x.assigned == SimplexRef{SimplexKind::Edge, 0});
}
