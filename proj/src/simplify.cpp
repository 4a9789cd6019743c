#include "medial/simplify.hpp"

#include "medial/envelope.hpp"
#include "medial/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace medial {

namespace {

Index other_endpoint(const MedialComplex& c, Index e, Index v)
{
    const auto& ev = c.edge(e);
    return ev[0] == v ? ev[1] : ev[0];
}

// Max over samples of |min signed distance to prims|, abandoning the scan as
// soon as it exceeds `stop`. A sample whose current error already exceeds
// `tolerated` contributes at most `tolerated` unless the contraction makes it
// worse, so violations inherited from the raw complex do not pin it.
double local_error(std::span<const EnvelopePrimitive> prims, std::span<const BoundarySample> samples,
                   std::span<const Index> ids, double stop, double tolerated = kInf)
{
    double worst = 0.0;
    for (Index i : ids) {
        const Vec3& q = samples[i].point;
        const double before = std::abs(samples[i].last_distance);
        const bool inherited = before > tolerated;
        const double floor = inherited ? std::max(stop, before) : stop;
        double d = kInf;
        for (const auto& p : prims) {
            d = std::min(d, primitive_signed_distance(q, p).distance);
            if (d < -floor)
                break;
        }
        double err = std::abs(d);
        if (inherited && err <= before)
            err = std::min(err, tolerated);
        worst = std::max(worst, err);
        if (worst > stop)
            return worst;
    }
    return worst;
}

} // namespace

namespace {

using CornerIds = std::array<Index, 3>;

// Per-thread vertex marks, reset in O(1) by bumping the stamp.
class VertexMarks {
public:
    void reset(std::size_t n)
    {
        if (mark_.size() < n)
            mark_.resize(n, 0);
        if (++stamp_ == 0) {
            std::fill(mark_.begin(), mark_.end(), 0);
            stamp_ = 1;
        }
    }
    void set(Index v) { mark_[v] = stamp_; }
    bool test(Index v) const { return mark_[v] == stamp_; }

private:
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
};

std::vector<EnvelopePrimitive> star_after(const MedialComplex& c, Index e, Index keep, std::vector<char>* changed,
                                          std::vector<CornerIds>* corners)
{
    thread_local VertexMarks in_new_faces, in_old_faces, seen;
    const Index gone = other_endpoint(c, e, keep);
    in_new_faces.reset(c.vertex_slots());
    in_old_faces.reset(c.vertex_slots());
    seen.reset(c.vertex_slots());

    std::vector<EnvelopePrimitive> out;
    std::vector<char> flags;
    std::vector<CornerIds> ids;
    auto sphere_of = [&](Index v) { return Sphere{c.vertex(v).position, c.vertex(v).radius}; };
    auto add_face = [&](const FaceVerts& fv, Index id, bool fresh) {
        EnvelopePrimitive p;
        p.kind = PrimitiveKind::Slab;
        for (int i = 0; i < 3; ++i) {
            p.spheres[i] = sphere_of(fv[i]);
            in_new_faces.set(fv[i]);
        }
        p.simplex = SimplexRef{SimplexKind::Face, id};
        out.push_back(p);
        flags.push_back(fresh ? 1 : 0);
        ids.push_back(fv);
    };

    for (Index f : c.vertex_faces(keep)) {
        const FaceVerts& fv = c.face(f);
        for (Index v : fv)
            in_old_faces.set(v);
        if (std::find(fv.begin(), fv.end(), gone) == fv.end())
            add_face(fv, f, false);
    }
    for (Index f : c.vertex_faces(gone)) {
        FaceVerts fv = c.face(f);
        if (std::find(fv.begin(), fv.end(), keep) != fv.end())
            continue;
        for (Index& x : fv)
            if (x == gone)
                x = keep;
        std::sort(fv.begin(), fv.end());
        // A re-indexed face that already exists around keep adds nothing.
        if (c.find_face(fv[0], fv[1], fv[2]) != kInvalidIndex)
            continue;
        add_face(fv, kInvalidIndex, true);
    }

    bool any_edge = false;
    const MedialVertex& kv = c.vertex(keep);
    for (Index v : {keep, gone})
        for (Index ed : c.vertex_edges(v)) {
            const Index w = other_endpoint(c, ed, v);
            if (w == keep || w == gone || seen.test(w))
                continue;
            seen.set(w);
            any_edge = true;
            if (in_new_faces.test(w))
                continue;
            EnvelopePrimitive p;
            p.kind = PrimitiveKind::Cone;
            p.spheres[0] = Sphere{kv.position, kv.radius};
            p.spheres[1] = sphere_of(w);
            const Index existing = c.find_edge(keep, w);
            p.simplex = SimplexRef{SimplexKind::Edge, existing};
            out.push_back(p);
            // Maximal before iff it existed and no face of keep contained w.
            flags.push_back(existing == kInvalidIndex || in_old_faces.test(w) ? 1 : 0);
            ids.push_back({keep, w, kInvalidIndex});
        }
    if (!any_edge) {
        EnvelopePrimitive p;
        p.spheres[0] = Sphere{kv.position, kv.radius};
        p.simplex = SimplexRef{SimplexKind::Vertex, keep};
        out.push_back(p);
        flags.push_back(0);
        ids.push_back({keep, kInvalidIndex, kInvalidIndex});
    }
    if (changed)
        *changed = std::move(flags);
    if (corners)
        *corners = std::move(ids);
    return out;
}

// Lower bounds of a primitive's signed distance.
struct PrimBound {
    Aabb centres;
    Vec3 centroid = Vec3::Zero();
    double max_radius = 0.0;

    PrimBound() = default;
    explicit PrimBound(const EnvelopePrimitive& p) : max_radius(p.max_radius())
    {
        for (int k = 0; k < p.size(); ++k) {
            centres.extend(p.spheres[k].center);
            centroid += p.spheres[k].center;
        }
        centroid /= p.size();
    }

    // Box distance minus the largest radius, and the tangent plane of the
    // (convex) distance family at the centroid, evaluated at the corners.
    double lower(const EnvelopePrimitive& p, const Vec3& q) const
    {
        const double box = centres.distance(q) - max_radius;
        const Vec3 v = q - centroid;
        const double len = v.norm();
        if (len == 0.0)
            return box;
        const Vec3 u = v / len;
        double plane = kInf;
        for (int k = 0; k < p.size(); ++k)
            plane = std::min(plane, u.dot(q - p.spheres[k].center) - p.spheres[k].radius);
        return std::max(box, plane);
    }
};

} // namespace

std::vector<EnvelopePrimitive> hypothetical_star(const MedialComplex& c, Index e, Index keep,
                                                 std::vector<char>* changed)
{
    return star_after(c, e, keep, changed, nullptr);
}

namespace {

template <class ClassOf>
bool allowed_with(const MedialComplex& c, Index e, Index keep, LinkPolicy policy, ClassOf&& class_of)
{
    const Index gone = other_endpoint(c, e, keep);
    if (c.vertex(gone).frozen)
        return false;
    const VertexClass ck = class_of(keep);
    const VertexClass cg = class_of(gone);
    if (cg == VertexClass::NonManifold && ck != VertexClass::NonManifold)
        return false;
    const bool manifold = ck != VertexClass::NonManifold && cg != VertexClass::NonManifold;
    if (policy == LinkPolicy::Strict || manifold)
        return link_condition(c, e);
    return true;
}

} // namespace

bool contraction_allowed(const MedialComplex& c, Index e, Index keep, LinkPolicy policy)
{
    return allowed_with(c, e, keep, policy, [&](Index v) { return classify_vertex(c, v); });
}

PostContractionError post_contraction_error(const MedialComplex& c, std::span<const BoundarySample> samples, Index e,
                                            LinkPolicy policy)
{
    PostContractionError out;
    if (!c.edge_alive(e))
        throw Error("post_contraction_error: edge " + std::to_string(e) + " not found");
    const auto [a, b] = c.edge(e);
    auto star_a = c.star(a), star_b = c.star(b);
    std::vector<SimplexRef> region(star_a);
    region.insert(region.end(), star_b.begin(), star_b.end());
    std::sort(region.begin(), region.end());
    for (Index i = 0; i < samples.size(); ++i)
        if (std::binary_search(region.begin(), region.end(), samples[i].assigned))
            out.affected_samples.push_back(i);
    out.keep = a;
    for (Index keep : {a, b}) {
        if (!contraction_allowed(c, e, keep, policy))
            continue;
        const auto prims = hypothetical_star(c, e, keep);
        const double err = local_error(prims, samples, out.affected_samples, kInf);
        if (err < out.error)
            out.error = err, out.keep = keep;
    }
    return out;
}

bool ligature_guard(MedialComplex& c, Index e, Index keep, const std::function<double(const Vec3&)>& boundary_sdf,
                    double epsilon, int protrusion_samples)
{
    std::vector<char> changed;
    const auto prims = hypothetical_star(c, e, keep, &changed);
    for (std::size_t i = 0; i < prims.size(); ++i) {
        if (!changed[i])
            continue;
        // Protrusion already present at the corner spheres is not caused by
        // this contraction.
        double limit = epsilon;
        for (int k = 0; k < prims[i].size(); ++k)
            limit = std::max(limit, boundary_sdf(prims[i].spheres[k].center) + prims[i].spheres[k].radius);
        if (protrusion_of_primitive(prims[i], boundary_sdf, protrusion_samples) > limit) {
            c.vertex(other_endpoint(c, e, keep)).frozen = true;
            return true;
        }
    }
    return false;
}

namespace {

// Uniform grid over the sample points for box queries.
class PointGrid {
public:
    PointGrid(std::span<const BoundarySample> samples, double diag)
    {
        for (const auto& s : samples)
            box_.extend(s.point);
        const double n = std::max<double>(1.0, std::cbrt(static_cast<double>(samples.size())));
        cell_ = std::max(diag / (2.0 * n), 1e-12);
        for (int k = 0; k < 3; ++k)
            dims_[k] = std::max(1, static_cast<int>(std::ceil(box_.extent()[k] / cell_)) + 1);
        start_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2] + 1, 0);
        std::vector<std::size_t> cell_of(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            cell_of[i] = flat(coord(samples[i].point));
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t i = 1; i < start_.size(); ++i)
            start_[i] += start_[i - 1];
        items_.resize(samples.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < samples.size(); ++i)
            items_[fill[cell_of[i]]++] = static_cast<Index>(i);
    }

    template <class Fn>
    void for_each_in(const Aabb& b, Fn&& fn) const
    {
        const auto lo = coord(b.lo), hi = coord(b.hi);
        for (int z = lo[2]; z <= hi[2]; ++z)
            for (int y = lo[1]; y <= hi[1]; ++y)
                for (int x = lo[0]; x <= hi[0]; ++x) {
                    const std::size_t f = flat({x, y, z});
                    for (std::size_t i = start_[f]; i < start_[f + 1]; ++i)
                        fn(items_[i]);
                }
    }

private:
    std::array<int, 3> coord(const Vec3& p) const
    {
        std::array<int, 3> c{};
        for (int k = 0; k < 3; ++k)
            c[k] = std::clamp(static_cast<int>(std::floor((p[k] - box_.lo[k]) / cell_)), 0, dims_[k] - 1);
        return c;
    }
    std::size_t flat(const std::array<int, 3>& c) const
    {
        return (static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
    }

    Aabb box_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<std::size_t> start_;
    std::vector<Index> items_;
};

struct QueueEntry {
    double error;
    Index edge;
    Index keep;
    std::uint32_t version;

    bool operator>(const QueueEntry& o) const
    {
        if (error != o.error)
            return error > o.error;
        if (edge != o.edge)
            return edge > o.edge;
        return keep > o.keep;
    }
};

class Simplifier {
public:
    Simplifier(const MedialComplex& c, std::span<BoundarySample> samples, const BoundaryShape& shape,
               const SimplifyConfig& cfg)
        : c_(c), samples_(samples), query_(shape), cfg_(cfg), grid_(samples, shape.diag)
    {
    }

    SimplifyResult run();

private:
    std::vector<Index>& list_of(SimplexRef s)
    {
        switch (s.kind) {
        case SimplexKind::Vertex:
            return vert_samples_[s.id];
        case SimplexKind::Edge:
            return edge_samples_[s.id];
        default:
            return face_samples_[s.id];
        }
    }
    const std::vector<Index>& list_of(SimplexRef s) const
    {
        return const_cast<Simplifier*>(this)->list_of(s);
    }

    void rebuild_lists();
    std::vector<Index> region_samples(Index a, Index b) const;
    ContractionCandidate evaluate(Index e, bool full = false) const;
    double choice_error(Index e, Index keep, double stop) const;
    void cache_face(Index f);
    void cache_edge(Index e);
    void refresh(std::vector<Index> edges);
    bool guard_vetoes(std::span<const EnvelopePrimitive> prims, std::span<const char> changed,
                      std::span<const CornerIds> corners);
    bool coverage_ok(std::span<const EnvelopePrimitive> prims, std::span<const char> changed,
                     std::vector<Index>& covered) const;
    double vertex_sdf(Index v);
    void global_sweep();

    MedialComplex c_;
    std::span<BoundarySample> samples_;
    ShapeQuery query_;
    SimplifyConfig cfg_;
    PointGrid grid_;
    double eps_ = 0.0;

    std::vector<std::vector<Index>> vert_samples_, edge_samples_, face_samples_;
    std::vector<std::uint32_t> version_;
    std::vector<double> sdf_cache_;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> heap_;
    SimplifyReport report_;
    // Primitive geometry per simplex slot, refreshed when a contraction
    // re-indexes the simplex.
    std::vector<EnvelopePrimitive> face_prims_, edge_prims_;
    std::vector<PrimBound> face_bounds_, edge_bounds_;
    // Cached vertex classes, -1 when unknown. Filled before parallel batches.
    std::vector<signed char> class_cache_;
};

void Simplifier::rebuild_lists()
{
    vert_samples_.assign(c_.vertex_slots(), {});
    edge_samples_.assign(c_.edge_slots(), {});
    face_samples_.assign(c_.face_slots(), {});
    for (Index i = 0; i < samples_.size(); ++i)
        list_of(samples_[i].assigned).push_back(i);
}

std::vector<Index> Simplifier::region_samples(Index a, Index b) const
{
    std::vector<Index> out;
    for (Index v : {a, b})
        for (const auto& s : c_.star(v)) {
            if (v == b && s.kind != SimplexKind::Vertex) {
                // Simplices shared with a were already visited.
                bool shared = false;
                if (s.kind == SimplexKind::Edge) {
                    const auto& ev = c_.edge(s.id);
                    shared = ev[0] == a || ev[1] == a;
                } else {
                    const auto& fv = c_.face(s.id);
                    shared = std::find(fv.begin(), fv.end(), a) != fv.end();
                }
                if (shared)
                    continue;
            }
            for (Index i : list_of(s))
                if (samples_[i].assigned == s)
                    out.push_back(i);
        }
    return out;
}

double Simplifier::choice_error(Index e, Index keep, double stop) const
{
    thread_local VertexMarks in_new_faces, in_old_faces, seen, near;
    const Index gone = other_endpoint(c_, e, keep);
    in_new_faces.reset(c_.vertex_slots());
    in_old_faces.reset(c_.vertex_slots());
    seen.reset(c_.vertex_slots());
    near.reset(c_.vertex_slots());
    for (Index ed : c_.vertex_edges(gone))
        near.set(other_endpoint(c_, ed, gone));
    auto sphere_of = [&](Index v) { return Sphere{c_.vertex(v).position, c_.vertex(v).radius}; };

    // Primitives created by the contraction are built here; the unchanged
    // part of keep's star is read from the caches when needed.
    std::vector<EnvelopePrimitive> fresh;
    std::vector<Index> kept_faces, kept_edges, far_faces, far_edges;
    for (Index f : c_.vertex_faces(keep)) {
        const FaceVerts& fv = c_.face(f);
        for (Index v : fv)
            in_old_faces.set(v);
        if (std::find(fv.begin(), fv.end(), gone) != fv.end())
            continue;
        const bool close = near.test(fv[0]) + near.test(fv[1]) + near.test(fv[2]) > 1;
        (close ? kept_faces : far_faces).push_back(f);
        for (Index v : fv)
            in_new_faces.set(v);
    }
    for (Index f : c_.vertex_faces(gone)) {
        FaceVerts fv = c_.face(f);
        if (std::find(fv.begin(), fv.end(), keep) != fv.end())
            continue;
        for (Index& x : fv)
            if (x == gone)
                x = keep;
        if (c_.find_face(fv[0], fv[1], fv[2]) != kInvalidIndex)
            continue;
        EnvelopePrimitive p;
        p.kind = PrimitiveKind::Slab;
        for (int i = 0; i < 3; ++i) {
            p.spheres[i] = sphere_of(fv[i]);
            in_new_faces.set(fv[i]);
        }
        fresh.push_back(p);
    }
    bool any_edge = false;
    for (Index v : {keep, gone})
        for (Index ed : c_.vertex_edges(v)) {
            const Index w = other_endpoint(c_, ed, v);
            if (w == keep || w == gone || seen.test(w))
                continue;
            seen.set(w);
            any_edge = true;
            if (in_new_faces.test(w))
                continue;
            const Index existing = c_.find_edge(keep, w);
            if (existing != kInvalidIndex && !in_old_faces.test(w)) {
                (near.test(w) ? kept_edges : far_edges).push_back(existing);
                continue;
            }
            EnvelopePrimitive p;
            p.kind = PrimitiveKind::Cone;
            p.spheres[0] = sphere_of(keep);
            p.spheres[1] = sphere_of(w);
            fresh.push_back(p);
        }
    if (!any_edge) {
        EnvelopePrimitive p;
        p.spheres[0] = sphere_of(keep);
        fresh.push_back(p);
    }
    std::vector<PrimBound> fresh_bounds;
    fresh_bounds.reserve(fresh.size());
    for (const auto& p : fresh)
        fresh_bounds.emplace_back(p);

    // Samples whose primitive disappears or changes: those on the removed
    // vertex's star and on edges of keep swallowed by new faces. The others
    // keep their distance unless a new primitive covers them, which the
    // coverage check at pop time handles exactly.
    std::vector<Index> region;
    auto collect = [&](SimplexRef s) {
        for (Index i : list_of(s))
            if (samples_[i].assigned == s)
                region.push_back(i);
    };
    for (Index f : c_.vertex_faces(gone))
        collect({SimplexKind::Face, f});
    for (Index ed : c_.vertex_edges(gone))
        collect({SimplexKind::Edge, ed});
    for (Index ed : c_.vertex_edges(keep)) {
        const Index w = other_endpoint(c_, ed, keep);
        if (w != gone && in_new_faces.test(w) && !in_old_faces.test(w))
            collect({SimplexKind::Edge, ed});
    }

    double worst = 0.0;
    for (Index i : region) {
        const Vec3& q = samples_[i].point;
        const double before = std::abs(samples_[i].last_distance);
        // Violations inherited from the raw complex do not pin a region as
        // long as the contraction does not make them worse.
        const bool inherited = before > eps_;
        const double floor = inherited ? std::max(stop, before) : stop;
        double d = kInf;
        bool done = false;
        auto visit = [&](const EnvelopePrimitive& p, const PrimBound& b) {
            if (b.lower(p, q) >= d)
                return;
            d = std::min(d, primitive_signed_distance(q, p).distance);
            done = d < -floor;
        };
        if (fresh.size() > 32) {
            // Start from the most promising primitive so that the bound
            // prunes most of the others.
            std::size_t best = 0;
            double best_lower = kInf;
            for (std::size_t j = 0; j < fresh.size(); ++j) {
                const double lo = fresh_bounds[j].lower(fresh[j], q);
                if (lo < best_lower)
                    best_lower = lo, best = j;
            }
            visit(fresh[best], fresh_bounds[best]);
        }
        for (std::size_t j = 0; j < fresh.size() && !done; ++j)
            visit(fresh[j], fresh_bounds[j]);
        {
            // The part of keep's star next to the removed vertex usually
            // decides; the rest is consulted only when the estimate would
            // reject the contraction.
            for (std::size_t j = 0; j < kept_faces.size() && !done; ++j)
                visit(face_prims_[kept_faces[j]], face_bounds_[kept_faces[j]]);
            for (std::size_t j = 0; j < kept_edges.size() && !done; ++j)
                visit(edge_prims_[kept_edges[j]], edge_bounds_[kept_edges[j]]);
            auto estimate = [&] {
                double err = std::abs(d);
                return inherited && err <= before ? std::min(err, eps_) : err;
            };
            if (!done && estimate() > stop) {
                for (std::size_t j = 0; j < far_faces.size() && !done; ++j)
                    visit(face_prims_[far_faces[j]], face_bounds_[far_faces[j]]);
                for (std::size_t j = 0; j < far_edges.size() && !done; ++j)
                    visit(edge_prims_[far_edges[j]], edge_bounds_[far_edges[j]]);
            }
        }
        double err = std::abs(d);
        if (inherited && err <= before)
            err = std::min(err, eps_);
        worst = std::max(worst, err);
        if (worst > stop)
            return worst;
    }
    return worst;
}

void Simplifier::cache_face(Index f)
{
    face_prims_[f] = make_primitive(c_, {SimplexKind::Face, f});
    face_bounds_[f] = PrimBound(face_prims_[f]);
}

void Simplifier::cache_edge(Index e)
{
    EnvelopePrimitive p;
    p.kind = PrimitiveKind::Cone;
    for (int k = 0; k < 2; ++k)
        p.spheres[k] = Sphere{c_.vertex(c_.edge(e)[k]).position, c_.vertex(c_.edge(e)[k]).radius};
    p.simplex = {SimplexKind::Edge, e};
    edge_prims_[e] = p;
    edge_bounds_[e] = PrimBound(p);
}

ContractionCandidate Simplifier::evaluate(Index e, bool full) const
{
    ContractionCandidate cand;
    cand.edge = e;
    const auto [a, b] = c_.edge(e);
    cand.keep = a;
    // Keeping the busier endpoint is usually cheaper and tightens the early
    // exit for the other choice. Equal errors still resolve to the lower id.
    const bool swap = c_.vertex_faces(b).size() + c_.vertex_edges(b).size() >
                      c_.vertex_faces(a).size() + c_.vertex_edges(a).size();
    const std::array<Index, 2> order = swap ? std::array<Index, 2>{b, a} : std::array<Index, 2>{a, b};
    for (Index keep : order) {
        // Removing a busy vertex rebuilds its whole star. During batch
        // updates that choice is deferred to the exact check at pop time
        // once the cheaper choice already qualifies.
        const Index gone = other_endpoint(c_, e, keep);
        if (!full && cand.error <= eps_ && c_.vertex_faces(gone).size() + c_.vertex_edges(gone).size() > 24)
            continue;
        if (!allowed_with(c_, e, keep, cfg_.link_policy,
                          [&](Index v) { return static_cast<VertexClass>(class_cache_[v]); }))
            continue;
        const double err = choice_error(e, keep, std::min(cand.error, eps_));
        if (err < cand.error || (err == cand.error && keep < cand.keep))
            cand.error = err, cand.keep = keep;
    }
    return cand;
}

void Simplifier::refresh(std::vector<Index> edges)
{
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (Index e : edges) {
        if (!c_.edge_alive(e))
            continue;
        for (Index v : c_.edge(e))
            if (class_cache_[v] < 0)
                class_cache_[v] = static_cast<signed char>(classify_vertex(c_, v));
    }
    std::vector<ContractionCandidate> out(edges.size());
    parallel_for(edges.size(), [&](std::size_t i) {
        if (c_.edge_alive(edges[i]))
            out[i] = evaluate(edges[i]);
    });
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Index e = edges[i];
        const std::uint32_t v = ++version_[e];
        if (c_.edge_alive(e) && out[i].error <= eps_)
            heap_.push(QueueEntry{out[i].error, e, out[i].keep, v});
    }
}

double Simplifier::vertex_sdf(Index v)
{
    if (std::isnan(sdf_cache_[v]))
        sdf_cache_[v] = query_.signed_distance(c_.vertex(v).position);
    return sdf_cache_[v];
}

bool Simplifier::guard_vetoes(std::span<const EnvelopePrimitive> prims, std::span<const char> changed,
                              std::span<const CornerIds> corners)
{
    for (std::size_t i = 0; i < prims.size(); ++i) {
        if (!changed[i])
            continue;
        const auto& p = prims[i];
        std::array<double, 3> base{};
        std::array<Vec3, 3> pos{};
        const int nb = p.size();
        double limit = eps_;
        for (int k = 0; k < nb; ++k) {
            base[k] = vertex_sdf(corners[i][k]);
            pos[k] = c_.vertex(corners[i][k]).position;
            limit = std::max(limit, base[k] + p.spheres[k].radius);
        }
        for (const auto& a : barycentric_samples(p.kind, cfg_.protrusion_samples)) {
            const Vec3 x = p.center_at(a);
            const double r = p.radius_at(a);
            // 1-Lipschitz upper bound of the boundary distance from the corners.
            double bound = kInf;
            for (int k = 0; k < nb; ++k)
                bound = std::min(bound, base[k] + (x - pos[k]).norm());
            if (bound + r <= limit)
                continue;
            if (query_.signed_distance(x) + r > limit)
                return true;
        }
    }
    return false;
}

bool Simplifier::coverage_ok(std::span<const EnvelopePrimitive> prims, std::span<const char> changed,
                             std::vector<Index>& covered) const
{
    covered.clear();
    for (std::size_t i = 0; i < prims.size(); ++i) {
        if (!changed[i])
            continue;
        const auto& p = prims[i];
        bool ok = true;
        grid_.for_each_in(p.bounds(), [&](Index s) {
            if (!ok)
                return;
            const double d = primitive_signed_distance(samples_[s].point, p).distance;
            if (d >= samples_[s].last_distance)
                return;
            if (d < -eps_)
                ok = false;
            covered.push_back(s);
        });
        if (!ok)
            return false;
    }
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    return true;
}

void Simplifier::global_sweep()
{
    ++report_.global_sweeps;
    std::vector<SimplexRef> before(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i)
        before[i] = samples_[i].assigned;
    assign_nearest(samples_, c_);
    rebuild_lists();
    std::vector<Index> touched;
    auto add_vertices = [&](SimplexRef s) {
        if (s.kind == SimplexKind::Vertex)
            touched.push_back(s.id);
        else if (s.kind == SimplexKind::Edge)
            touched.insert(touched.end(), c_.edge(s.id).begin(), c_.edge(s.id).end());
        else
            touched.insert(touched.end(), c_.face(s.id).begin(), c_.face(s.id).end());
    };
    for (std::size_t i = 0; i < samples_.size(); ++i)
        if (!(before[i] == samples_[i].assigned)) {
            add_vertices(before[i]);
            add_vertices(samples_[i].assigned);
        }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    std::vector<Index> edges;
    for (Index v : touched)
        if (c_.vertex_alive(v))
            edges.insert(edges.end(), c_.vertex_edges(v).begin(), c_.vertex_edges(v).end());
    refresh(std::move(edges));
}

SimplifyResult Simplifier::run()
{
    const auto t0 = std::chrono::steady_clock::now();
    if (c_.num_vertices() == 0)
        throw Error("simplify: empty complex");
    if (!(cfg_.epsilon > 0.0))
        throw Error("simplify: epsilon must be positive");
    report_.epsilon = cfg_.epsilon;
    report_.initial_vertices = c_.num_vertices();
    report_.initial_edges = c_.num_edges();
    report_.initial_faces = c_.num_faces();
    report_.initial_primitives = c_.num_primitives();
    eps_ = cfg_.epsilon;
    if (cfg_.enforce_lfs_cap) {
        const auto fs = local_feature_size(std::span<const BoundarySample>(samples_.data(), samples_.size()), c_);
        store_feature_size(samples_, fs);
        report_.lfs_cap = fs.global_cap;
        eps_ = std::min(eps_, fs.global_cap);
    }
    report_.effective_epsilon = eps_;

    assign_nearest(samples_, c_);
    rebuild_lists();
    version_.assign(c_.edge_slots(), 0);
    sdf_cache_.assign(c_.vertex_slots(), std::numeric_limits<double>::quiet_NaN());
    class_cache_.assign(c_.vertex_slots(), -1);
    face_prims_.resize(c_.face_slots());
    face_bounds_.resize(c_.face_slots());
    edge_prims_.resize(c_.edge_slots());
    edge_bounds_.resize(c_.edge_slots());
    for (Index f : c_.live_faces())
        cache_face(f);
    for (Index e : c_.live_edges())
        cache_edge(e);
    refresh(c_.live_edges());

    report_.stop_reason = "threshold";
    // Edges of a kept vertex outside the refreshed set are only confirmed when
    // popped, so one that was above the threshold before may have dropped below
    // it unseen. Once the queue runs dry every live edge is re-evaluated, and
    // the run ends when that adds nothing.
    std::size_t settled_at = 0;
    while (true) {
        if (cfg_.max_contractions && report_.contractions >= *cfg_.max_contractions) {
            report_.stop_reason = "max_contractions";
            break;
        }
        if (heap_.empty()) {
            if (report_.contractions == settled_at)
                break;
            settled_at = report_.contractions;
            refresh(c_.live_edges());
            continue;
        }
        const QueueEntry top = heap_.top();
        heap_.pop();
        if (!c_.edge_alive(top.edge) || version_[top.edge] != top.version) {
            ++report_.stale_pops;
            continue;
        }
        if (top.error > eps_) {
            heap_ = {};
            continue;
        }
        // Keys of edges near a contraction but outside the refreshed set may
        // be stale; confirm before acting.
        {
            for (Index v : c_.edge(top.edge))
                if (class_cache_[v] < 0)
                    class_cache_[v] = static_cast<signed char>(classify_vertex(c_, v));
            const ContractionCandidate now = evaluate(top.edge, true);
            if (now.keep != top.keep || now.error != top.error) {
                const std::uint32_t v = ++version_[top.edge];
                if (now.error <= eps_)
                    heap_.push(QueueEntry{now.error, top.edge, now.keep, v});
                continue;
            }
        }
        const Index keep = top.keep;
        const Index gone = other_endpoint(c_, top.edge, keep);
        std::vector<char> changed;
        std::vector<CornerIds> corners;
        const auto hyp = star_after(c_, top.edge, keep, &changed, &corners);
        const bool veto = guard_vetoes(hyp, changed, corners);
        if (veto) {
            ++report_.ligature_vetoes;
            c_.vertex(gone).frozen = true;
            const auto inc = c_.vertex_edges(gone);
            refresh(std::vector<Index>(inc.begin(), inc.end()));
            continue;
        }
        // New primitives may also swallow samples outside the local region.
        std::vector<Index> covered;
        const bool cov = coverage_ok(hyp, changed, covered);
        if (!cov) {
            ++report_.coverage_rejections;
            ++version_[top.edge];
            continue;
        }

        auto region = region_samples(keep, gone);
        std::sort(region.begin(), region.end());
        std::vector<Index> touched = c_.neighbors(gone);
        const ChangeSet cs = c_.contract(top.edge, keep, false);
        for (Index f : cs.modified_faces)
            cache_face(f);
        for (Index ed : cs.modified_edges)
            cache_edge(ed);
        ++report_.contractions;

        // Local re-assignment among the kept vertex's new star. Covered
        // samples outside the region only move when the star is now nearer.
        const auto prims = make_primitives(c_, cs.kept_star);
        auto reassign = [&](Index i, bool forced) {
            const auto r = min_signed_distance(samples_[i].point, prims);
            if (!forced && r.distance >= samples_[i].last_distance)
                return;
            samples_[i].assigned = r.primitive;
            samples_[i].last_distance = r.distance;
            list_of(r.primitive).push_back(i);
        };
        for (Index i : region)
            reassign(i, true);
        for (Index i : covered)
            if (!std::binary_search(region.begin(), region.end(), i))
                reassign(i, false);
        for (const auto& s : cs.kept_star) {
            auto& l = list_of(s);
            l.erase(std::remove_if(l.begin(), l.end(), [&](Index i) { return !(samples_[i].assigned == s); }),
                    l.end());
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }

        // Only the removed vertex's former neighbours and the kept vertex
        // have a different star now. The kept vertex's other edges can be
        // numerous; their keys are confirmed when popped.
        std::vector<Index> edges(cs.removed_edges.begin(), cs.removed_edges.end());
        class_cache_[keep] = -1;
        for (Index w : touched) {
            if (w == keep)
                continue;
            class_cache_[w] = -1;
            edges.insert(edges.end(), c_.vertex_edges(w).begin(), c_.vertex_edges(w).end());
        }
        refresh(std::move(edges));

        if (cfg_.sweep_interval > 0 && report_.contractions % cfg_.sweep_interval == 0) {
            global_sweep();
        }
    }
    if (heap_.empty() && report_.stop_reason == "threshold" && c_.num_edges() == 0)
        report_.stop_reason = "exhausted";

    std::size_t frozen = 0;
    for (Index v : c_.live_vertices())
        frozen += c_.vertex(v).frozen ? 1 : 0;
    report_.frozen_vertices = frozen;

    SimplifyResult out{c_.compacted(), {}};
    assign_nearest(samples_, out.complex);
    double worst = 0.0;
    for (Index i = 0; i < samples_.size(); ++i)
        if (std::abs(samples_[i].last_distance) > worst) {
            worst = std::abs(samples_[i].last_distance);
            report_.argmax_sample = i;
        }
    report_.measured_error = worst;
    report_.final_vertices = out.complex.num_vertices();
    report_.final_edges = out.complex.num_edges();
    report_.final_faces = out.complex.num_faces();
    report_.final_primitives = out.complex.num_primitives();
    report_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.report = report_;
    return out;
}

} // namespace

SimplifyResult simplify(const MedialComplex& c, std::span<BoundarySample> samples, const BoundaryShape& shape,
                        const SimplifyConfig& cfg)
{
    return Simplifier(c, samples, shape, cfg).run();
}

} // namespace medial
