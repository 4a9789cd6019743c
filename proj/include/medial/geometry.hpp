#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace medial {

using Vec3 = Eigen::Vector3d;
using Index = std::uint32_t;

inline constexpr Index kInvalidIndex = std::numeric_limits<Index>::max();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for malformed input and violated preconditions across the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Aabb {
    Vec3 lo = Vec3::Constant(kInf);
    Vec3 hi = Vec3::Constant(-kInf);

    void extend(const Vec3& p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void extend(const Aabb& b)
    {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    bool empty() const { return lo.x() > hi.x(); }
    Vec3 extent() const { return empty() ? Vec3::Zero() : Vec3(hi - lo); }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double diagonal() const { return extent().norm(); }

    // Euclidean distance from p to the box, zero inside.
    double distance(const Vec3& p) const
    {
        const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
        return d.norm();
    }
};

} // namespace medial
