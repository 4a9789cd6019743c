#include "medial/complex.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace medial {

namespace {

EdgeVerts sorted_edge(Index a, Index b)
{
    return a < b ? EdgeVerts{a, b} : EdgeVerts{b, a};
}

FaceVerts sorted_face(Index a, Index b, Index c)
{
    FaceVerts f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

bool contains(const FaceVerts& f, Index v)
{
    return f[0] == v || f[1] == v || f[2] == v;
}

} // namespace

const char* to_string(VertexClass c)
{
    switch (c) {
    case VertexClass::ManifoldInterior: return "manifold-interior";
    case VertexClass::ManifoldBoundary: return "manifold-boundary";
    case VertexClass::NonManifold: return "non-manifold";
    }
    return "?";
}

MedialComplex::MedialComplex(int dim) : dim_(dim)
{
    if (dim != 2 && dim != 3)
        throw Error("medial complex dimension must be 2 or 3");
}

std::uint64_t MedialComplex::edge_key(Index a, Index b)
{
    if (a > b)
        std::swap(a, b);
    return (std::uint64_t(a) << 32) | b;
}

void MedialComplex::erase_from(std::vector<Index>& list, Index id)
{
    auto it = std::find(list.begin(), list.end(), id);
    if (it != list.end()) {
        *it = list.back();
        list.pop_back();
    }
}

Index MedialComplex::add_vertex(MedialVertex v)
{
    if (!(v.radius >= 0.0))
        throw Error("medial vertex radius must be non-negative");
    vertices_.push_back(std::move(v));
    vertex_alive_.push_back(1);
    vertex_edges_.emplace_back();
    vertex_faces_.emplace_back();
    ++live_vertices_;
    return static_cast<Index>(vertices_.size() - 1);
}

Index MedialComplex::insert_edge(Index a, Index b)
{
    if (a == b)
        throw Error("degenerate simplex: edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    if (!vertex_alive(a) || !vertex_alive(b))
        throw Error("edge references a missing vertex");
    const auto key = edge_key(a, b);
    if (auto it = edge_map_.find(key); it != edge_map_.end())
        return it->second;
    const auto id = static_cast<Index>(edges_.size());
    edges_.push_back(sorted_edge(a, b));
    edge_alive_.push_back(1);
    edge_map_.emplace(key, id);
    vertex_edges_[a].push_back(id);
    vertex_edges_[b].push_back(id);
    return id;
}

Index MedialComplex::insert_face(Index a, Index b, Index c)
{
    if (a == b || b == c || a == c)
        throw Error("degenerate simplex: face (" + std::to_string(a) + "," + std::to_string(b) + "," +
                    std::to_string(c) + ")");
    if (dim_ == 2)
        throw Error("faces are not allowed in a 2D medial complex");
    const FaceVerts key = sorted_face(a, b, c);
    if (auto it = face_map_.find(key); it != face_map_.end())
        return it->second;
    insert_edge(a, b);
    insert_edge(b, c);
    insert_edge(a, c);
    const auto id = static_cast<Index>(faces_.size());
    faces_.push_back(key);
    face_alive_.push_back(1);
    face_map_.emplace(key, id);
    for (Index v : key)
        vertex_faces_[v].push_back(id);
    return id;
}

void MedialComplex::remove_face(Index f)
{
    if (!face_alive(f))
        return;
    const FaceVerts fv = faces_[f];
    face_map_.erase(fv);
    for (Index v : fv)
        erase_from(vertex_faces_[v], f);
    face_alive_[f] = 0;
}

void MedialComplex::remove_edge(Index e)
{
    if (!edge_alive(e))
        return;
    for (Index f : edge_faces(e))
        remove_face(f);
    const EdgeVerts ev = edges_[e];
    edge_map_.erase(edge_key(ev[0], ev[1]));
    erase_from(vertex_edges_[ev[0]], e);
    erase_from(vertex_edges_[ev[1]], e);
    edge_alive_[e] = 0;
}

void MedialComplex::remove_vertex(Index v)
{
    if (!vertex_alive(v))
        return;
    const std::vector<Index> fs = vertex_faces_[v];
    for (Index f : fs)
        remove_face(f);
    const std::vector<Index> es = vertex_edges_[v];
    for (Index e : es)
        remove_edge(e);
    vertex_alive_[v] = 0;
    --live_vertices_;
}

Index MedialComplex::find_edge(Index a, Index b) const
{
    auto it = edge_map_.find(edge_key(a, b));
    return it == edge_map_.end() ? kInvalidIndex : it->second;
}

Index MedialComplex::find_face(Index a, Index b, Index c) const
{
    auto it = face_map_.find(sorted_face(a, b, c));
    return it == face_map_.end() ? kInvalidIndex : it->second;
}

std::vector<Index> MedialComplex::neighbors(Index v) const
{
    std::vector<Index> out;
    out.reserve(vertex_edges_[v].size());
    for (Index e : vertex_edges_[v]) {
        const auto& ev = edges_[e];
        out.push_back(ev[0] == v ? ev[1] : ev[0]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Index> MedialComplex::edge_faces(Index e) const
{
    const auto [a, b] = edges_[e];
    const auto& fa = vertex_faces_[a];
    const auto& fb = vertex_faces_[b];
    const Index pivot = fa.size() <= fb.size() ? a : b;
    const Index other = pivot == a ? b : a;
    std::vector<Index> out;
    for (Index f : vertex_faces_[pivot])
        if (contains(faces_[f], other))
            out.push_back(f);
    return out;
}

bool MedialComplex::is_maximal_edge(Index e) const
{
    const auto [a, b] = edges_[e];
    const Index pivot = vertex_faces_[a].size() <= vertex_faces_[b].size() ? a : b;
    const Index other = pivot == a ? b : a;
    for (Index f : vertex_faces_[pivot])
        if (contains(faces_[f], other))
            return false;
    return true;
}

std::vector<SimplexRef> MedialComplex::maximal_simplices() const
{
    std::vector<SimplexRef> out;
    for (Index f = 0; f < faces_.size(); ++f)
        if (face_alive_[f])
            out.push_back({SimplexKind::Face, f});
    for (Index e = 0; e < edges_.size(); ++e)
        if (edge_alive_[e] && is_maximal_edge(e))
            out.push_back({SimplexKind::Edge, e});
    for (Index v = 0; v < vertices_.size(); ++v)
        if (vertex_alive_[v] && vertex_edges_[v].empty())
            out.push_back({SimplexKind::Vertex, v});
    return out;
}

std::vector<SimplexRef> MedialComplex::star(Index v) const
{
    std::vector<SimplexRef> out;
    for (Index f : vertex_faces_[v])
        out.push_back({SimplexKind::Face, f});
    for (Index e : vertex_edges_[v])
        if (is_maximal_edge(e))
            out.push_back({SimplexKind::Edge, e});
    if (vertex_edges_[v].empty())
        out.push_back({SimplexKind::Vertex, v});
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t MedialComplex::num_primitives() const
{
    return maximal_simplices().size();
}

std::vector<Index> MedialComplex::live_vertices() const
{
    std::vector<Index> out;
    for (Index v = 0; v < vertices_.size(); ++v)
        if (vertex_alive_[v])
            out.push_back(v);
    return out;
}

std::vector<Index> MedialComplex::live_edges() const
{
    std::vector<Index> out;
    for (Index e = 0; e < edges_.size(); ++e)
        if (edge_alive_[e])
            out.push_back(e);
    return out;
}

std::vector<Index> MedialComplex::live_faces() const
{
    std::vector<Index> out;
    for (Index f = 0; f < faces_.size(); ++f)
        if (face_alive_[f])
            out.push_back(f);
    return out;
}

ChangeSet MedialComplex::contract(Index e, Index keep, bool require_link)
{
    if (!edge_alive(e))
        throw Error("contract: edge " + std::to_string(e) + " not found");
    const auto [a, b] = edges_[e];
    if (keep != a && keep != b)
        throw Error("contract: kept vertex is not an endpoint of the edge");
    if (require_link && !link_condition(*this, e))
        throw Error("contract: link condition fails for edge " + std::to_string(e));

    const Index gone = keep == a ? b : a;
    ChangeSet cs;
    cs.removed_vertex = gone;
    cs.kept_vertex = keep;

    const std::vector<Index> gone_faces = vertex_faces_[gone];
    for (Index f : gone_faces) {
        const FaceVerts fv = faces_[f];
        if (contains(fv, keep)) {
            remove_face(f);
            cs.removed_faces.push_back(f);
            continue;
        }
        FaceVerts nf = fv;
        for (Index& v : nf)
            if (v == gone)
                v = keep;
        nf = sorted_face(nf[0], nf[1], nf[2]);
        if (face_map_.count(nf)) {
            remove_face(f);
            cs.removed_faces.push_back(f);
            continue;
        }
        face_map_.erase(fv);
        faces_[f] = nf;
        face_map_.emplace(nf, f);
        erase_from(vertex_faces_[gone], f);
        vertex_faces_[keep].push_back(f);
        cs.modified_faces.push_back(f);
    }

    // Edges after faces: a re-indexed face (keep, x, y) relies on edges (keep, x)
    // and (keep, y), which either exist already or come from (gone, x) below.
    const std::vector<Index> gone_edges = vertex_edges_[gone];
    for (Index ge : gone_edges) {
        const EdgeVerts ev = edges_[ge];
        const Index w = ev[0] == gone ? ev[1] : ev[0];
        if (w == keep || edge_map_.count(edge_key(keep, w))) {
            // Faces on this edge were already re-indexed or removed above.
            edge_map_.erase(edge_key(ev[0], ev[1]));
            erase_from(vertex_edges_[ev[0]], ge);
            erase_from(vertex_edges_[ev[1]], ge);
            edge_alive_[ge] = 0;
            cs.removed_edges.push_back(ge);
            continue;
        }
        edge_map_.erase(edge_key(ev[0], ev[1]));
        edges_[ge] = sorted_edge(keep, w);
        edge_map_.emplace(edge_key(keep, w), ge);
        erase_from(vertex_edges_[gone], ge);
        vertex_edges_[keep].push_back(ge);
        cs.modified_edges.push_back(ge);
    }

    vertex_faces_[gone].clear();
    vertex_edges_[gone].clear();
    vertex_alive_[gone] = 0;
    --live_vertices_;

    cs.kept_star = star(keep);
    return cs;
}

MedialComplex MedialComplex::compacted(std::vector<Index>* old_to_new) const
{
    MedialComplex out(dim_);
    std::vector<Index> remap(vertices_.size(), kInvalidIndex);
    for (Index v = 0; v < vertices_.size(); ++v)
        if (vertex_alive_[v])
            remap[v] = out.add_vertex(vertices_[v]);
    std::vector<EdgeVerts> es;
    for (Index e = 0; e < edges_.size(); ++e)
        if (edge_alive_[e])
            es.push_back(sorted_edge(remap[edges_[e][0]], remap[edges_[e][1]]));
    std::sort(es.begin(), es.end());
    std::vector<FaceVerts> fs;
    for (Index f = 0; f < faces_.size(); ++f)
        if (face_alive_[f])
            fs.push_back(sorted_face(remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]));
    std::sort(fs.begin(), fs.end());
    for (const auto& ev : es)
        out.insert_edge(ev[0], ev[1]);
    for (const auto& fv : fs)
        out.insert_face(fv[0], fv[1], fv[2]);
    if (old_to_new)
        *old_to_new = std::move(remap);
    return out;
}

void MedialComplex::validate() const
{
    for (Index v = 0; v < vertices_.size(); ++v)
        if (vertex_alive_[v] && !(vertices_[v].radius >= 0.0))
            throw Error("vertex " + std::to_string(v) + " has a negative radius");
    for (Index e = 0; e < edges_.size(); ++e) {
        if (!edge_alive_[e])
            continue;
        const auto [a, b] = edges_[e];
        if (a >= b || !vertex_alive(a) || !vertex_alive(b))
            throw Error("edge " + std::to_string(e) + " is degenerate or references a dead vertex");
        if (find_edge(a, b) != e)
            throw Error("edge map is inconsistent for edge " + std::to_string(e));
    }
    for (Index f = 0; f < faces_.size(); ++f) {
        if (!face_alive_[f])
            continue;
        const auto [a, b, c] = faces_[f];
        if (!(a < b && b < c))
            throw Error("face " + std::to_string(f) + " is degenerate");
        if (find_edge(a, b) == kInvalidIndex || find_edge(b, c) == kInvalidIndex ||
            find_edge(a, c) == kInvalidIndex)
            throw Error("face " + std::to_string(f) + " is missing an edge");
        if (find_face(a, b, c) != f)
            throw Error("face map is inconsistent for face " + std::to_string(f));
    }
    if (!adjacency_matches_rebuild())
        throw Error("adjacency lists disagree with the simplex sets");
}

bool MedialComplex::adjacency_matches_rebuild() const
{
    std::vector<std::vector<Index>> ve(vertices_.size()), vf(vertices_.size());
    for (Index e = 0; e < edges_.size(); ++e)
        if (edge_alive_[e])
            for (Index v : edges_[e])
                ve[v].push_back(e);
    for (Index f = 0; f < faces_.size(); ++f)
        if (face_alive_[f])
            for (Index v : faces_[f])
                vf[v].push_back(f);
    for (Index v = 0; v < vertices_.size(); ++v) {
        auto a = vertex_edges_[v];
        auto b = vertex_faces_[v];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::sort(ve[v].begin(), ve[v].end());
        std::sort(vf[v].begin(), vf[v].end());
        if (a != ve[v] || b != vf[v])
            return false;
        if (!vertex_alive_[v] && (!a.empty() || !b.empty()))
            return false;
    }
    return true;
}

MedialComplex build_complex(int dim,
                            std::vector<MedialVertex> vertices,
                            std::span<const EdgeVerts> edges,
                            std::span<const FaceVerts> faces)
{
    MedialComplex c(dim);
    const auto n = vertices.size();
    for (auto& v : vertices)
        c.add_vertex(std::move(v));

    std::set<EdgeVerts> seen_edges;
    for (const auto& e : edges) {
        if (e[0] >= n || e[1] >= n)
            throw Error("edge index out of range");
        if (e[0] == e[1])
            throw Error("degenerate simplex: edge repeats vertex " + std::to_string(e[0]));
        if (!seen_edges.insert(sorted_edge(e[0], e[1])).second)
            throw Error("duplicate simplex: edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) + ")");
        c.insert_edge(e[0], e[1]);
    }
    std::set<FaceVerts> seen_faces;
    for (const auto& f : faces) {
        if (f[0] >= n || f[1] >= n || f[2] >= n)
            throw Error("face index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw Error("degenerate simplex: face (" + std::to_string(f[0]) + "," + std::to_string(f[1]) + "," +
                        std::to_string(f[2]) + ")");
        if (!seen_faces.insert(sorted_face(f[0], f[1], f[2])).second)
            throw Error("duplicate simplex: face (" + std::to_string(f[0]) + "," + std::to_string(f[1]) + "," +
                        std::to_string(f[2]) + ")");
        c.insert_face(f[0], f[1], f[2]);
    }
    return c;
}

VertexClass classify_vertex(const MedialComplex& c, Index v)
{
    const auto faces = c.vertex_faces(v);
    if (faces.empty()) {
        // Purely 1-dimensional star: the link is a set of points.
        const auto deg = c.vertex_edges(v).size();
        if (deg <= 1)
            return VertexClass::ManifoldBoundary;
        return deg == 2 ? VertexClass::ManifoldInterior : VertexClass::NonManifold;
    }
    // Link graph: opposite edge of each incident face, plus an isolated vertex
    // for every dangling incident edge.
    std::map<Index, std::vector<Index>> link;
    for (Index f : faces) {
        const auto& fv = c.face(f);
        Index x = kInvalidIndex, y = kInvalidIndex;
        for (Index w : fv) {
            if (w == v)
                continue;
            (x == kInvalidIndex ? x : y) = w;
        }
        link[x].push_back(y);
        link[y].push_back(x);
    }
    for (Index e : c.vertex_edges(v)) {
        if (!c.is_maximal_edge(e))
            continue;
        const auto& ev = c.edge(e);
        link[ev[0] == v ? ev[1] : ev[0]];
    }
    std::size_t ends = 0;
    for (const auto& [w, adj] : link) {
        if (adj.size() > 2 || adj.empty())
            return VertexClass::NonManifold;
        if (adj.size() == 1)
            ++ends;
    }
    // Connectivity of the link graph.
    std::set<Index> visited;
    std::vector<Index> stack{link.begin()->first};
    while (!stack.empty()) {
        const Index w = stack.back();
        stack.pop_back();
        if (!visited.insert(w).second)
            continue;
        for (Index x : link[w])
            stack.push_back(x);
    }
    if (visited.size() != link.size())
        return VertexClass::NonManifold;
    if (ends == 0)
        return VertexClass::ManifoldInterior;
    return ends == 2 ? VertexClass::ManifoldBoundary : VertexClass::NonManifold;
}

bool link_condition(const MedialComplex& c, Index e)
{
    if (!c.edge_alive(e))
        throw Error("link_condition: edge " + std::to_string(e) + " not found");
    const auto [a, b] = c.edge(e);
    const auto na = c.neighbors(a);
    const auto nb = c.neighbors(b);
    std::vector<Index> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    std::vector<Index> apexes;
    for (Index f : c.edge_faces(e))
        for (Index w : c.face(f))
            if (w != a && w != b)
                apexes.push_back(w);
    std::sort(apexes.begin(), apexes.end());
    return common == apexes;
}

std::vector<SimplexRef> k_ring(const MedialComplex& c, Index v, int k)
{
    if (!c.vertex_alive(v))
        throw Error("k_ring: vertex " + std::to_string(v) + " not found");
    std::map<Index, int> dist{{v, 0}};
    std::queue<Index> q;
    q.push(v);
    while (!q.empty()) {
        const Index w = q.front();
        q.pop();
        if (dist[w] >= k)
            continue;
        for (Index x : c.neighbors(w))
            if (dist.emplace(x, dist[w] + 1).second)
                q.push(x);
    }
    std::set<SimplexRef> out;
    auto within = [&](Index x) { return dist.count(x) > 0; };
    for (const auto& [w, d] : dist) {
        if (c.vertex_edges(w).empty())
            out.insert({SimplexKind::Vertex, w});
        for (Index e : c.vertex_edges(w)) {
            const auto& ev = c.edge(e);
            if (within(ev[0]) && within(ev[1]))
                out.insert({SimplexKind::Edge, e});
        }
        for (Index f : c.vertex_faces(w)) {
            const auto& fv = c.face(f);
            if (within(fv[0]) && within(fv[1]) && within(fv[2]))
                out.insert({SimplexKind::Face, f});
        }
    }
    return {out.begin(), out.end()};
}

std::size_t connected_components(const MedialComplex& c)
{
    std::vector<Index> parent(c.vertex_slots());
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Index e : c.live_edges()) {
        const auto& ev = c.edge(e);
        parent[find(ev[0])] = find(ev[1]);
    }
    std::size_t n = 0;
    for (Index v : c.live_vertices())
        if (find(v) == v)
            ++n;
    return n;
}

} // namespace medial
