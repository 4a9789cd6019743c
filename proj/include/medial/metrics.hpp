#pragma once

#include "medial/complex.hpp"
#include "medial/init.hpp"
#include "medial/shape.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace medial {

struct HausdorffResult {
    double distance = 0.0;
    Index argmax = kInvalidIndex;
};

/// max over points of |complex_signed_distance|, with the index attaining it.
/// Throws Error for an empty complex or an empty point set.
HausdorffResult one_sided_hausdorff(std::span<const Vec3> points, const MedialComplex& c);
HausdorffResult one_sided_hausdorff(std::span<const BoundarySample> samples, const MedialComplex& c);

struct EnvelopeDistance {
    double distance = 0.0;
    std::size_t points = 0;
    // Points whose projection onto the envelope surface did not converge;
    // they are left out of the maximum.
    std::size_t failures = 0;
    bool flagged = false;
};

/// Distance from the envelope surface to the input boundary: `n` quasi-random
/// points on the primitives are projected onto the zero level set of the
/// envelope's signed distance and measured against the shape. More than 1%
/// non-converged projections set `flagged`.
EnvelopeDistance envelope_to_input_distance(const MedialComplex& c, const BoundaryShape& shape, std::size_t n,
                                            std::uint64_t seed);

/// Points on the envelope surface, as produced for envelope_to_input_distance.
/// `converged`, when given, flags each point.
std::vector<Vec3> envelope_surface_points(const MedialComplex& c, std::size_t n, std::uint64_t seed,
                                          std::vector<char>* converged = nullptr);

struct ErrorReport {
    double one_sided_in_to_env = 0.0;
    std::optional<double> one_sided_env_to_in;
    std::optional<double> symmetric;
    double diag = 0.0;
    double normalized_in_to_env = 0.0;
    std::optional<double> normalized_env_to_in;
    std::optional<double> normalized_symmetric;
    std::size_t n_samples = 0;
    Index argmax_sample = kInvalidIndex;
    std::size_t envelope_points = 0;
    std::size_t projection_failures = 0;
    bool projection_flagged = false;
};

/// Assembles a report and divides each distance by `diag`.
ErrorReport make_report(const HausdorffResult& in_to_env, std::size_t n_samples, double diag,
                        const std::optional<EnvelopeDistance>& env_to_in = std::nullopt);

} // namespace medial
