#pragma once

#include "medial/geometry.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

namespace medial {

/// A medial sphere: the 4D point (position, radius) of the medial mesh.
struct MedialVertex {
    Vec3 position = Vec3::Zero();
    double radius = 0.0;
    // Boundary-sample indices that define this sphere (dual Delaunay corners).
    std::vector<Index> tangency_ids;
    // Pinned vertices are never removed by a contraction.
    bool frozen = false;
};

using EdgeVerts = std::array<Index, 2>;
using FaceVerts = std::array<Index, 3>;

enum class SimplexKind : std::uint8_t { Vertex = 0, Edge = 1, Face = 2 };

struct SimplexRef {
    SimplexKind kind = SimplexKind::Vertex;
    Index id = kInvalidIndex;

    friend auto operator<=>(const SimplexRef&, const SimplexRef&) = default;
    bool valid() const { return id != kInvalidIndex; }
};

enum class VertexClass { ManifoldInterior, ManifoldBoundary, NonManifold };

const char* to_string(VertexClass c);

/// Bookkeeping emitted by MedialComplex::contract.
struct ChangeSet {
    Index removed_vertex = kInvalidIndex;
    Index kept_vertex = kInvalidIndex;
    std::vector<Index> removed_edges;
    std::vector<Index> removed_faces;
    std::vector<Index> modified_edges;
    std::vector<Index> modified_faces;
    // Maximal simplices incident to the kept vertex after the contraction.
    std::vector<SimplexRef> kept_star;
};

struct FaceKeyHash {
    std::size_t operator()(const FaceVerts& f) const noexcept
    {
        std::uint64_t h = f[0];
        h = h * 0x9E3779B97F4A7C15ull ^ f[1];
        h = h * 0x9E3779B97F4A7C15ull ^ f[2];
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Non-manifold simplicial 2-complex of medial spheres.
///
/// Vertex, edge and face ids are stable: removal tombstones a slot instead of
/// compacting, so ids held by samples and queue entries stay meaningful while a
/// simplification runs. `compacted()` renumbers once the run is over.
/// Edges and faces are stored with sorted vertex indices. Every face implies
/// its three edges.
class MedialComplex {
public:
    explicit MedialComplex(int dim = 3);

    int dim() const { return dim_; }

    Index add_vertex(MedialVertex v);
    // Returns the existing id when the simplex is already present.
    Index insert_edge(Index a, Index b);
    Index insert_face(Index a, Index b, Index c);

    void remove_edge(Index e);
    void remove_face(Index f);
    // Removes the vertex and every simplex incident to it.
    void remove_vertex(Index v);

    std::size_t vertex_slots() const { return vertices_.size(); }
    std::size_t edge_slots() const { return edges_.size(); }
    std::size_t face_slots() const { return faces_.size(); }

    std::size_t num_vertices() const { return live_vertices_; }
    std::size_t num_edges() const { return edge_map_.size(); }
    std::size_t num_faces() const { return face_map_.size(); }

    bool vertex_alive(Index v) const { return v < vertex_alive_.size() && vertex_alive_[v]; }
    bool edge_alive(Index e) const { return e < edge_alive_.size() && edge_alive_[e]; }
    bool face_alive(Index f) const { return f < face_alive_.size() && face_alive_[f]; }

    const MedialVertex& vertex(Index v) const { return vertices_[v]; }
    MedialVertex& vertex(Index v) { return vertices_[v]; }
    const EdgeVerts& edge(Index e) const { return edges_[e]; }
    const FaceVerts& face(Index f) const { return faces_[f]; }

    Index find_edge(Index a, Index b) const;
    Index find_face(Index a, Index b, Index c) const;

    std::span<const Index> vertex_edges(Index v) const { return vertex_edges_[v]; }
    std::span<const Index> vertex_faces(Index v) const { return vertex_faces_[v]; }

    std::vector<Index> neighbors(Index v) const;
    std::vector<Index> edge_faces(Index e) const;
    bool is_maximal_edge(Index e) const;

    // Maximal simplices: faces, edges in no face, and isolated vertices.
    std::vector<SimplexRef> maximal_simplices() const;
    std::vector<SimplexRef> star(Index v) const;
    std::size_t num_primitives() const;

    std::vector<Index> live_vertices() const;
    std::vector<Index> live_edges() const;
    std::vector<Index> live_faces() const;

    /// Contracts edge `e` onto its endpoint `keep`; the other endpoint is
    /// removed. Throws Error without touching the complex when `keep` is not an
    /// endpoint or the link condition fails.
    ChangeSet contract(Index e, Index keep, bool require_link = true);

    /// Renumbers live simplices densely. `old_to_new`, when given, receives the
    /// vertex id map (kInvalidIndex for dead slots).
    MedialComplex compacted(std::vector<Index>* old_to_new = nullptr) const;

    /// Checks structural invariants, throwing Error on the first violation.
    void validate() const;

    /// Rebuilds adjacency from the simplex lists and compares with the
    /// incrementally maintained one.
    bool adjacency_matches_rebuild() const;

private:
    static std::uint64_t edge_key(Index a, Index b);
    void erase_from(std::vector<Index>& list, Index id);

    int dim_;
    std::vector<MedialVertex> vertices_;
    std::vector<char> vertex_alive_;
    std::vector<EdgeVerts> edges_;
    std::vector<char> edge_alive_;
    std::vector<FaceVerts> faces_;
    std::vector<char> face_alive_;
    std::vector<std::vector<Index>> vertex_edges_;
    std::vector<std::vector<Index>> vertex_faces_;
    std::unordered_map<std::uint64_t, Index> edge_map_;
    std::unordered_map<FaceVerts, Index, FaceKeyHash> face_map_;
    std::size_t live_vertices_ = 0;
};

/// Validated construction. Faces insert their edges automatically; duplicate
/// and degenerate simplices and out-of-range indices are rejected.
MedialComplex build_complex(int dim,
                            std::vector<MedialVertex> vertices,
                            std::span<const EdgeVerts> edges,
                            std::span<const FaceVerts> faces);

VertexClass classify_vertex(const MedialComplex& c, Index v);

/// True iff the common neighbours of the edge endpoints are exactly the apex
/// vertices of the faces containing the edge.
bool link_condition(const MedialComplex& c, Index e);

/// Edges and faces (and isolated vertices) whose vertices all lie within
/// graph distance k of v.
std::vector<SimplexRef> k_ring(const MedialComplex& c, Index v, int k);

std::size_t connected_components(const MedialComplex& c);

} // namespace medial
