#pragma once

#include "medial/complex.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace medial {

struct Sphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

enum class PrimitiveKind : std::uint8_t { Sphere = 1, Cone = 2, Slab = 3 };

/// Convex hull of 1, 2 or 3 spheres: the union of the linearly interpolated
/// sphere family c(a) = sum a_i p_i, r(a) = sum a_i r_i over the simplex.
struct EnvelopePrimitive {
    PrimitiveKind kind = PrimitiveKind::Sphere;
    std::array<Sphere, 3> spheres{};
    SimplexRef simplex;

    int size() const { return static_cast<int>(kind); }
    Vec3 center_at(const std::array<double, 3>& a) const;
    double radius_at(const std::array<double, 3>& a) const;
    double max_radius() const;
    Aabb bounds() const;
};

struct SignedDistanceResult {
    double distance = kInf;
    std::array<double, 3> barycentric{1.0, 0.0, 0.0};
    SimplexRef primitive;
};

EnvelopePrimitive make_primitive(const MedialComplex& c, SimplexRef s);
std::vector<EnvelopePrimitive> make_primitives(const MedialComplex& c, std::span<const SimplexRef> simplices);

/// Minimum over the simplex of f(a) = |q - c(a)| - r(a).
SignedDistanceResult primitive_signed_distance(const Vec3& q, const EnvelopePrimitive& prim);

double sphere_signed_distance(const Vec3& q, const Sphere& s);
/// Returns f at the minimiser and writes the minimising t (weight of b).
double cone_signed_distance(const Vec3& q, const Sphere& a, const Sphere& b, double* t_out = nullptr);
/// Returns f at the minimiser and writes barycentric weights of (a, b, c).
double slab_signed_distance(const Vec3& q, const Sphere& a, const Sphere& b, const Sphere& c,
                            std::array<double, 3>* bary_out = nullptr);

/// Minimum signed distance over the candidate simplices, or over all maximal
/// simplices when `candidates` is empty. Throws Error for an empty complex.
SignedDistanceResult complex_signed_distance(const Vec3& q, const MedialComplex& c,
                                             std::span<const SimplexRef> candidates = {});

/// Same as above over an explicit primitive list.
SignedDistanceResult min_signed_distance(const Vec3& q, std::span<const EnvelopePrimitive> prims);

/// Deterministic barycentric sample set with at least `n` points covering the
/// primitive's simplex (including its corners).
std::vector<std::array<double, 3>> barycentric_samples(PrimitiveKind kind, int n);

/// max over barycentric samples of boundary_sdf(c(a)) + r(a), clamped at 0.
double protrusion_of_primitive(const EnvelopePrimitive& prim, const std::function<double(const Vec3&)>& boundary_sdf,
                               int n_samples);

/// Uniform grid over primitive bounding boxes for exact nearest-primitive
/// queries against a whole envelope.
class PrimitiveIndex {
public:
    PrimitiveIndex() = default;
    explicit PrimitiveIndex(std::vector<EnvelopePrimitive> prims);
    static PrimitiveIndex from_complex(const MedialComplex& c);

    bool empty() const { return prims_.empty(); }
    const std::vector<EnvelopePrimitive>& primitives() const { return prims_; }

    /// Exact minimum signed distance over all indexed primitives.
    SignedDistanceResult query(const Vec3& q) const;

private:
    std::array<int, 3> cell_of(const Vec3& p) const;

    std::vector<EnvelopePrimitive> prims_;
    std::vector<Aabb> boxes_;
    Vec3 origin_ = Vec3::Zero();
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<Index> cell_start_;
    std::vector<Index> cell_items_;
};

} // namespace medial
