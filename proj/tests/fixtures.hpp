#pragma once

// Input generators shared by unit and acceptance tests.

#include "medial/init.hpp"
#include "medial/shape.hpp"
#include "medial/shapes.hpp"

#include <algorithm>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <vector>

namespace fixtures {

using namespace medial;

struct Input {
    BoundaryShape shape;
    std::vector<BoundarySample> samples;
    MedialComplex complex;
};

// Random star-shaped polygons and perturbed spheres.
inline std::vector<Input> random_filter_inputs(int count)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Input> out;
    for (int k = 0; k < count; ++k) {
        Input in;
        if (k % 5 != 4) {
            const int n = 40 + static_cast<int>(40 * u(rng));
            const double f1 = 0.3 * u(rng), f2 = 0.2 * u(rng);
            const int m = 2 + static_cast<int>(4 * u(rng));
            std::vector<Vec3> loop;
            for (int i = 0; i < n; ++i) {
                const double t = 2.0 * std::numbers::pi * i / n;
                const double r = 1.0 + f1 * std::sin(m * t) + f2 * std::cos(3 * t + 1.0) + 0.02 * u(rng);
                loop.emplace_back(r * std::cos(t), r * std::sin(t), 0.0);
            }
            in.shape = make_shape_2d(loop);
        } else {
            in.shape = shapes::icosphere(2);
            const double ax = 0.5 + u(rng), ay = 0.5 + u(rng);
            for (Vec3& v : in.shape.vertices)
                v = Vec3(ax * v.x(), ay * v.y(), v.z() * (1.0 + 0.05 * u(rng)));
            in.shape = make_shape_3d(in.shape.vertices, in.shape.triangles);
        }
        in.samples = sample_boundary(in.shape, in.shape.dim == 2 ? in.shape.vertices.size() : 400, k + 1);
        in.complex = initial_medial_complex(in.samples, in.shape);
        out.push_back(std::move(in));
    }
    return out;
}

using Key = std::tuple<double, double, double, double>;

inline std::set<Key> vertex_keys(const MedialComplex& c)
{
    std::set<Key> keys;
    for (Index v : c.live_vertices()) {
        const auto& mv = c.vertex(v);
        keys.emplace(mv.position.x(), mv.position.y(), mv.position.z(), mv.radius);
    }
    return keys;
}

inline bool subset(const std::set<Key>& a, const std::set<Key>& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace fixtures
