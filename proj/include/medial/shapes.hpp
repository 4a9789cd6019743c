#pragma once

#include "medial/shape.hpp"

#include <cstdint>
#include <string>

namespace medial::shapes {

// Analytic test shapes. 3D meshes are closed with outward orientation; 2D
// loops are counter-clockwise.

/// Subdivided icosahedron projected on a sphere; 3 levels give 642 vertices.
BoundaryShape icosphere(int levels = 3, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Capsule around the x axis: a cylinder of the given radius whose spine runs
/// from -spine/2 to spine/2, closed by hemispheres.
BoundaryShape capsule(double radius = 1.0, double spine = 2.0, int around = 32, int cap_rings = 8,
                      int body_rings = 8);

/// Torus around the z axis.
BoundaryShape torus(double major = 2.0, double minor = 0.5, int around = 64, int tube = 24);

/// Axis-aligned box centred at the origin, each face split into n x n quads.
BoundaryShape box(const Vec3& size = Vec3(2.0, 1.5, 1.0), int n = 8);

/// Star polygon with `arms` tips, resampled so no segment exceeds `spacing`.
BoundaryShape star_2d(int arms = 5, double outer = 1.0, double inner = 0.5, double spacing = 0.02);

BoundaryShape circle_2d(double radius = 1.0, int n = 256);
BoundaryShape rectangle_2d(double w = 4.0, double h = 1.0, double spacing = 0.05);
/// L-shaped hexagon: a `size` square with the upper-right `size - arm` square removed.
BoundaryShape l_shape_2d(double size = 2.0, double arm = 1.0, double spacing = 0.05);

/// Displaces every vertex of a 2D loop along its normal by a uniform random
/// amount in [-eta * mean_edge, eta * mean_edge].
BoundaryShape add_normal_noise_2d(const BoundaryShape& s, double eta, std::uint64_t seed);

double mean_edge_length(const BoundaryShape& s);

/// Looks up a shape by name ("sphere", "capsule", "torus", "box", "star",
/// "circle", "rectangle", "lshape"). Throws Error for unknown names.
BoundaryShape by_name(const std::string& name);

} // namespace medial::shapes
