#pragma once

#include "medial/complex.hpp"
#include "medial/envelope.hpp"
#include "medial/init.hpp"

#include <span>

namespace medial {

/// Smallest ball containing all points (Welzl). Radius is negative for an
/// empty set.
Sphere minimum_enclosing_ball(std::span<const Vec3> points);

/// Largest angle at `center` between two of the points.
double separation_angle(const Vec3& center, std::span<const Vec3> points);

/// Radius of the minimum enclosing ball of a vertex's tangency samples.
/// Throws Error when the vertex carries no tangency data.
double tangency_circumradius(const MedialComplex& c, Index v, std::span<const BoundarySample> samples);

/// Separation angle of a vertex's tangency samples seen from its centre.
double tangency_angle(const MedialComplex& c, Index v, std::span<const BoundarySample> samples);

/// λ-medial axis: drops vertices whose tangency circumradius is below
/// `lambda`, together with their incident simplices. The result is compacted.
MedialComplex lambda_filter(const MedialComplex& c, std::span<const BoundarySample> samples, double lambda);

/// Angle-based filter: drops vertices whose separation angle is below
/// `theta` (radians), together with their incident simplices.
MedialComplex angle_filter(const MedialComplex& c, std::span<const BoundarySample> samples, double theta);

} // namespace medial
