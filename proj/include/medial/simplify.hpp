#pragma once

#include "medial/complex.hpp"
#include "medial/envelope.hpp"
#include "medial/init.hpp"
#include "medial/shape.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace medial {

// Where the simplicial link condition is required before a contraction.
// The raw Voronoi complex is riddled with bare 3-cycles around non-manifold
// vertices that the strict check would preserve forever.
enum class LinkPolicy { Strict, ManifoldVertices };

struct SimplifyConfig {
    // Absolute threshold in model units.
    double epsilon = 0.0;
    // Clamp epsilon to half the smallest local feature size.
    bool enforce_lfs_cap = true;
    int protrusion_samples = 16;
    LinkPolicy link_policy = LinkPolicy::ManifoldVertices;
    std::optional<std::size_t> max_contractions;
    // Contractions between two global re-assignments of all samples.
    std::size_t sweep_interval = 2048;
};

struct ContractionCandidate {
    Index edge = kInvalidIndex;
    Index keep = kInvalidIndex;
    double error = kInf;
    std::uint32_t version = 0;
};

struct SimplifyReport {
    std::size_t initial_vertices = 0, initial_edges = 0, initial_faces = 0, initial_primitives = 0;
    std::size_t final_vertices = 0, final_edges = 0, final_faces = 0, final_primitives = 0;
    std::size_t contractions = 0;
    std::size_t stale_pops = 0;
    std::size_t ligature_vetoes = 0;
    // Pops dropped because a new primitive would cover a sample too deeply.
    std::size_t coverage_rejections = 0;
    std::size_t frozen_vertices = 0;
    std::size_t global_sweeps = 0;
    double epsilon = 0.0;
    double lfs_cap = kInf;
    double effective_epsilon = 0.0;
    // Max |signed distance| over all samples, fully re-measured at the end.
    double measured_error = 0.0;
    Index argmax_sample = kInvalidIndex;
    double wall_seconds = 0.0;
    std::string stop_reason;
};

struct PostContractionError {
    double error = kInf;
    Index keep = kInvalidIndex;
    // Samples assigned to maximal simplices incident to either endpoint.
    std::vector<Index> affected_samples;
};

/// Error of contracting edge `e` onto each endpoint, measured over the
/// samples assigned to primitives incident to either endpoint against the
/// kept vertex's post-contraction star. Forbidden merges (link condition,
/// frozen removed vertex, non-manifold vertex merging into a manifold one)
/// score infinity. The smaller of the two choices is returned.
PostContractionError post_contraction_error(const MedialComplex& c, std::span<const BoundarySample> samples, Index e,
                                            LinkPolicy policy = LinkPolicy::ManifoldVertices);

/// Whether the topology checks allow contracting `e` onto `keep`.
bool contraction_allowed(const MedialComplex& c, Index e, Index keep, LinkPolicy policy);

/// Primitives of the star of `keep` after contracting `e` onto it, without
/// mutating `c`. `changed`, when given, flags primitives whose geometry did
/// not exist before the contraction.
std::vector<EnvelopePrimitive> hypothetical_star(const MedialComplex& c, Index e, Index keep,
                                                 std::vector<char>* changed = nullptr);

/// Vetoes the contraction of `e` onto `keep` when a primitive created by it
/// pokes out of the shape by more than `epsilon`; the vertex that would have
/// been removed is then frozen.
bool ligature_guard(MedialComplex& c, Index e, Index keep, const std::function<double(const Vec3&)>& boundary_sdf,
                    double epsilon, int protrusion_samples);

struct SimplifyResult {
    MedialComplex complex;
    SimplifyReport report;
};

/// Greedy error-driven edge contraction. `samples` are re-assigned in place
/// and refer to the returned (compacted) complex afterwards.
SimplifyResult simplify(const MedialComplex& c, std::span<BoundarySample> samples, const BoundaryShape& shape,
                        const SimplifyConfig& cfg);

} // namespace medial
