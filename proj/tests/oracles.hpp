#pragma once

// Brute-force reference computations shared by unit and acceptance tests.

#include "medial/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

using medial::Sphere;
using medial::Vec3;

inline double family_value(const Vec3& q, const Sphere& a, const Sphere& b, const Sphere& c, double s, double t)
{
    const Vec3 cc = (1.0 - s - t) * a.center + s * b.center + t * c.center;
    const double r = (1.0 - s - t) * a.radius + s * b.radius + t * c.radius;
    return (q - cc).norm() - r;
}

// Minimum of f over t = i / (n - 1).
inline double cone_grid_min(const Vec3& q, const Sphere& a, const Sphere& b, int n)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        best = std::min(best, family_value(q, a, b, b, static_cast<double>(i) / (n - 1), 0.0));
    return best;
}

// Minimum of f over the barycentric lattice with n steps per side.
inline double slab_grid_min(const Vec3& q, const Sphere& a, const Sphere& b, const Sphere& c, int n)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            best = std::min(best, family_value(q, a, b, c, static_cast<double>(i) / n, static_cast<double>(j) / n));
    return best;
}

// Lipschitz constant of f in the barycentric parameters, bounding how far a
// grid minimum can sit above the true minimum.
inline double family_lipschitz(const Sphere& a, const Sphere& b, const Sphere& c)
{
    return std::max({(b.center - a.center).norm() + std::abs(b.radius - a.radius),
                     (c.center - a.center).norm() + std::abs(c.radius - a.radius),
                     (c.center - b.center).norm() + std::abs(c.radius - b.radius)});
}

} // namespace oracle
