#include "medial/delaunay.hpp"

#include "medial/predicates.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace medial {

namespace {

template <int D>
using Point = Eigen::Matrix<double, D, 1>;

template <int D>
struct Predicates;

template <>
struct Predicates<2> {
    static int orient(const std::array<const Point<2>*, 3>& p)
    {
        return predicates::orient2d(*p[0], *p[1], *p[2]);
    }
    static int insphere(const std::array<const Point<2>*, 3>& p, const Point<2>& q)
    {
        return predicates::incircle(*p[0], *p[1], *p[2], q);
    }
    static Vec3 circumcenter(const std::array<const Point<2>*, 3>& p)
    {
        const Eigen::Vector2d a = *p[0];
        const Eigen::Vector2d ba = *p[1] - a, ca = *p[2] - a;
        const double den = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
        const double ux = (ca.y() * ba.squaredNorm() - ba.y() * ca.squaredNorm()) / den;
        const double uy = (ba.x() * ca.squaredNorm() - ca.x() * ba.squaredNorm()) / den;
        return Vec3(a.x() + ux, a.y() + uy, 0.0);
    }
    static Vec3 lift(const Point<2>& p) { return Vec3(p.x(), p.y(), 0.0); }
};

template <>
struct Predicates<3> {
    static int orient(const std::array<const Point<3>*, 4>& p)
    {
        return predicates::orient3d(*p[0], *p[1], *p[2], *p[3]);
    }
    static int insphere(const std::array<const Point<3>*, 4>& p, const Point<3>& q)
    {
        return predicates::insphere(*p[0], *p[1], *p[2], *p[3], q);
    }
    static Vec3 circumcenter(const std::array<const Point<3>*, 4>& p)
    {
        const Vec3 a = *p[0];
        const Vec3 ba = *p[1] - a, ca = *p[2] - a, da = *p[3] - a;
        const double den = 2.0 * ba.dot(ca.cross(da));
        return a + (ba.squaredNorm() * ca.cross(da) + ca.squaredNorm() * da.cross(ba) +
                    da.squaredNorm() * ba.cross(ca)) /
                       den;
    }
    static Vec3 lift(const Point<3>& p) { return p; }
};

std::uint64_t morton_spread(std::uint64_t x, int dim)
{
    std::uint64_t out = 0;
    for (int bit = 0; bit < 21; ++bit)
        out |= ((x >> bit) & 1ull) << (bit * dim);
    return out;
}

template <int D>
class BowyerWatson {
public:
    static constexpr int N = D + 1;
    static constexpr Index kGhost = kInvalidIndex - 1;
    using P = Point<D>;
    using Pred = Predicates<D>;

    struct Cell {
        std::array<Index, N> v;
        std::array<Index, N> nb;
    };

    BowyerWatson(std::vector<P> pts, std::uint64_t seed) : pts_(std::move(pts)), rng_(seed) {}

    void run(const std::vector<Index>& order, double retry_scale)
    {
        init_simplex(order);
        for (Index pi : order) {
            if (used_[pi])
                continue;
            int attempt = 0;
            while (!insert(pi)) {
                // Exactly degenerate configuration: nudge the point and retry.
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                for (int k = 0; k < D; ++k)
                    pts_[pi][k] += retry_scale * (1 << std::min(attempt, 20)) * u(rng_);
                if (++attempt > 64)
                    throw Error("delaunay: could not resolve a degenerate configuration");
            }
        }
    }

    DelaunayResult result() const
    {
        DelaunayResult out;
        out.dim = D;
        std::vector<Index> remap(cells_.size(), kInvalidIndex);
        for (Index c = 0; c < cells_.size(); ++c)
            if (alive_[c] && !is_ghost(c))
                remap[c] = static_cast<Index>(out.simplices.size()), out.simplices.emplace_back();
        out.neighbors.resize(out.simplices.size());
        out.circumcenters.resize(out.simplices.size());
        out.circumradii.resize(out.simplices.size());
        for (Index c = 0; c < cells_.size(); ++c) {
            const Index s = remap[c];
            if (s == kInvalidIndex)
                continue;
            std::array<Index, 4> sv{kInvalidIndex, kInvalidIndex, kInvalidIndex, kInvalidIndex};
            std::array<Index, 4> sn = sv;
            std::array<const P*, N> ps;
            for (int i = 0; i < N; ++i) {
                sv[i] = cells_[c].v[i];
                sn[i] = remap[cells_[c].nb[i]];
                ps[i] = &pts_[cells_[c].v[i]];
            }
            out.simplices[s] = sv;
            out.neighbors[s] = sn;
            const Vec3 cc = Pred::circumcenter(ps);
            out.circumcenters[s] = cc;
            out.circumradii[s] = (cc - Pred::lift(*ps[0])).norm();
        }
        return out;
    }

private:
    bool is_ghost(Index c) const
    {
        for (Index v : cells_[c].v)
            if (v == kGhost)
                return true;
        return false;
    }

    int ghost_pos(Index c) const
    {
        for (int i = 0; i < N; ++i)
            if (cells_[c].v[i] == kGhost)
                return i;
        return -1;
    }

    // Orientation of cell c with vertex `pos` replaced by q (pos = -1: none).
    int orient_with(Index c, int pos, const P& q) const
    {
        std::array<const P*, N> ps;
        for (int i = 0; i < N; ++i)
            ps[i] = i == pos ? &q : &pts_[cells_[c].v[i]];
        return Pred::orient(ps);
    }

    // > 0: q conflicts with c; 0: exactly degenerate; < 0: no conflict.
    int conflict(Index c, const P& q) const
    {
        const int g = ghost_pos(c);
        if (g >= 0)
            return orient_with(c, g, q);
        std::array<const P*, N> ps;
        for (int i = 0; i < N; ++i)
            ps[i] = &pts_[cells_[c].v[i]];
        return Pred::insphere(ps, q);
    }

    Index new_cell(const Cell& cell)
    {
        if (!free_.empty()) {
            const Index c = free_.back();
            free_.pop_back();
            cells_[c] = cell;
            alive_[c] = 1;
            return c;
        }
        cells_.push_back(cell);
        alive_.push_back(1);
        mark_.push_back(0);
        return static_cast<Index>(cells_.size() - 1);
    }

    static std::uint64_t ridge_key(const std::array<Index, N>& v, int skip_a, int skip_b)
    {
        std::array<Index, N> ids{};
        int n = 0;
        for (int i = 0; i < N; ++i)
            if (i != skip_a && i != skip_b)
                ids[n++] = v[i];
        std::sort(ids.begin(), ids.begin() + n);
        std::uint64_t key = 0;
        for (int i = 0; i < n; ++i)
            key = (key << 32) | ids[i];
        return key;
    }

    void init_simplex(const std::vector<Index>& order)
    {
        used_.assign(pts_.size(), 0);
        std::vector<Index> chosen{order.front()};
        const P& p0 = pts_[order.front()];
        // Farthest point, then the one maximising area/volume, verified exactly.
        Index best = kInvalidIndex;
        double best_d = 0.0;
        for (Index i : order) {
            const double d = (pts_[i] - p0).squaredNorm();
            if (d > best_d)
                best_d = d, best = i;
        }
        if (best == kInvalidIndex)
            throw Error("delaunay: all points coincide");
        chosen.push_back(best);
        for (int k = 2; k <= D; ++k) {
            std::vector<std::pair<double, Index>> cand;
            for (Index i : order) {
                Eigen::Matrix<double, D, D> m = Eigen::Matrix<double, D, D>::Zero();
                for (int j = 1; j < k; ++j)
                    m.col(j - 1) = pts_[chosen[j]] - p0;
                m.col(k - 1) = pts_[i] - p0;
                double measure;
                if (k == D) {
                    measure = std::abs(m.determinant());
                } else {
                    // k == 2 < D == 3: area of the triangle.
                    const Vec3 a(m(0, 0), m(1, 0), m(2 % D, 0));
                    const Vec3 b(m(0, 1), m(1, 1), m(2 % D, 1));
                    measure = a.cross(b).norm();
                }
                cand.emplace_back(measure, i);
            }
            std::sort(cand.begin(), cand.end(), std::greater<>());
            Index pick = kInvalidIndex;
            for (const auto& [measure, i] : cand) {
                if (measure <= 0.0)
                    break;
                if (k == D) {
                    std::array<const P*, N> ps;
                    for (int j = 0; j < D; ++j)
                        ps[j] = &pts_[chosen[j]];
                    ps[D] = &pts_[i];
                    if (Pred::orient(ps) == 0)
                        continue;
                }
                pick = i;
                break;
            }
            if (pick == kInvalidIndex)
                throw Error(D == 3 ? "delaunay: all points are coplanar" : "delaunay: all points are collinear");
            chosen.push_back(pick);
        }
        for (Index i : chosen)
            used_[i] = 1;

        Cell root;
        for (int i = 0; i < N; ++i)
            root.v[i] = chosen[i];
        {
            std::array<const P*, N> ps;
            for (int i = 0; i < N; ++i)
                ps[i] = &pts_[root.v[i]];
            if (Pred::orient(ps) < 0)
                std::swap(root.v[0], root.v[1]);
        }
        root.nb.fill(kInvalidIndex);
        std::vector<Index> ids{new_cell(root)};
        for (int i = 0; i < N; ++i) {
            Cell g = root;
            g.v[i] = kGhost;
            // Replacing the ghost by a point beyond facet i must orient positively.
            const int a = i == 0 ? 1 : 0;
            const int b = (i == 0 || i == 1) ? 2 : 1;
            std::swap(g.v[a], g.v[b]);
            g.nb.fill(kInvalidIndex);
            ids.push_back(new_cell(g));
        }
        std::unordered_map<std::uint64_t, std::pair<Index, int>> open;
        for (Index c : ids) {
            for (int i = 0; i < N; ++i) {
                std::uint64_t key = 0;
                std::array<Index, N> facet = cells_[c].v;
                facet[i] = kInvalidIndex;
                std::sort(facet.begin(), facet.end());
                for (int j = 0; j < N - 1; ++j)
                    key = key * 0x9E3779B97F4A7C15ull + facet[j] + 1;
                auto [it, fresh] = open.emplace(key, std::make_pair(c, i));
                if (!fresh) {
                    cells_[c].nb[i] = it->second.first;
                    cells_[it->second.first].nb[it->second.second] = c;
                    open.erase(it);
                }
            }
        }
        last_ = ids.front();
    }

    Index locate(const P& q)
    {
        Index c = last_;
        if (!alive_[c]) {
            c = 0;
            while (!alive_[c])
                ++c;
        }
        if (const int g = ghost_pos(c); g >= 0)
            c = cells_[c].nb[g];
        std::size_t guard = 0;
        while (true) {
            if (ghost_pos(c) >= 0)
                return c;
            const int start = static_cast<int>(rng_() % N);
            bool moved = false;
            for (int k = 0; k < N; ++k) {
                const int i = (start + k) % N;
                if (orient_with(c, i, q) < 0) {
                    c = cells_[c].nb[i];
                    moved = true;
                    break;
                }
            }
            if (!moved)
                return c;
            if (++guard > 4 * cells_.size() + 1000)
                throw Error("delaunay: point location did not terminate");
        }
    }

    bool insert(Index pi)
    {
        const P& q = pts_[pi];
        const Index start = locate(q);
        if (conflict(start, q) <= 0)
            return false;

        std::vector<Index> cavity{start};
        std::vector<std::pair<Index, int>> boundary;
        mark_[start] = 1;
        bool degenerate = false;
        for (std::size_t k = 0; k < cavity.size() && !degenerate; ++k) {
            const Index c = cavity[k];
            for (int i = 0; i < N; ++i) {
                const Index n = cells_[c].nb[i];
                if (mark_[n])
                    continue;
                const int s = conflict(n, q);
                if (s > 0) {
                    mark_[n] = 1;
                    cavity.push_back(n);
                } else if (s == 0) {
                    degenerate = true;
                    break;
                } else {
                    boundary.emplace_back(c, i);
                }
            }
        }
        if (degenerate) {
            for (Index c : cavity)
                mark_[c] = 0;
            return false;
        }

        std::unordered_map<std::uint64_t, std::pair<Index, int>> ridges;
        ridges.reserve(boundary.size() * N);
        std::vector<Index> created;
        created.reserve(boundary.size());
        for (const auto& [c, i] : boundary) {
            Cell cell;
            cell.v = cells_[c].v;
            cell.v[i] = pi;
            cell.nb.fill(kInvalidIndex);
            const Index outside = cells_[c].nb[i];
            cell.nb[i] = outside;
            const Index nc = new_cell(cell);
            created.push_back(nc);
            for (int j = 0; j < N; ++j)
                if (cells_[outside].nb[j] == c)
                    cells_[outside].nb[j] = nc;
            for (int j = 0; j < N; ++j) {
                if (j == i)
                    continue;
                const std::uint64_t key = ridge_key(cells_[nc].v, i, j);
                auto [it, fresh] = ridges.emplace(key, std::make_pair(nc, j));
                if (!fresh) {
                    cells_[nc].nb[j] = it->second.first;
                    cells_[it->second.first].nb[it->second.second] = nc;
                    ridges.erase(it);
                }
            }
        }
        for (Index c : cavity) {
            mark_[c] = 0;
            alive_[c] = 0;
            free_.push_back(c);
        }
        used_[pi] = 1;
        last_ = created.front();
        return true;
    }

    std::vector<P> pts_;
    std::vector<Cell> cells_;
    std::vector<char> alive_;
    std::vector<char> mark_;
    std::vector<Index> free_;
    std::vector<char> used_;
    Index last_ = 0;
    std::mt19937_64 rng_;
};

template <int D>
DelaunayResult run_delaunay(std::span<const Vec3> points, const DelaunayOptions& opts)
{
    using P = Point<D>;
    Aabb box;
    for (const auto& p : points)
        box.extend(p);
    const double diag = std::max(box.diagonal(), 1e-300);

    // Exact duplicates collapse onto their first occurrence.
    std::vector<Index> order(points.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<Index> representative(points.size());
    {
        auto key_less = [&](Index a, Index b) {
            for (int k = 0; k < D; ++k)
                if (points[a][k] != points[b][k])
                    return points[a][k] < points[b][k];
            return a < b;
        };
        std::vector<Index> sorted = order;
        std::sort(sorted.begin(), sorted.end(), key_less);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const Index cur = sorted[i];
            representative[cur] = cur;
            if (i > 0) {
                const Index prev = sorted[i - 1];
                bool same = true;
                for (int k = 0; k < D; ++k)
                    same = same && points[prev][k] == points[cur][k];
                if (same)
                    representative[cur] = representative[prev];
            }
        }
    }

    {
        // Reject inputs that do not span `D` dimensions before jitter hides it.
        Eigen::Matrix<double, D, 1> mean = Eigen::Matrix<double, D, 1>::Zero();
        for (const auto& p : points)
            mean += p.template head<D>();
        mean /= static_cast<double>(points.size());
        Eigen::Matrix<double, D, D> cov = Eigen::Matrix<double, D, D>::Zero();
        for (const auto& p : points) {
            const Eigen::Matrix<double, D, 1> d = p.template head<D>() - mean;
            cov += d * d.transpose();
        }
        cov /= static_cast<double>(points.size());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(cov);
        if (!(std::sqrt(std::max(es.eigenvalues()(0), 0.0)) > 1e-9 * diag))
            throw Error(D == 3 ? "delaunay: all points are coplanar" : "delaunay: all points are collinear");
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<P> pts(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int k = 0; k < D; ++k)
            pts[i][k] = points[i][k] + opts.jitter * diag * u(rng);

    // Spatial (Morton) insertion order keeps point location walks short.
    std::vector<Index> unique;
    for (Index i : order)
        if (representative[i] == i)
            unique.push_back(i);
    if (unique.size() < static_cast<std::size_t>(D + 1))
        throw Error("delaunay: need at least " + std::to_string(D + 1) + " distinct points");
    std::vector<std::uint64_t> code(points.size(), 0);
    const Vec3 ext = box.extent();
    for (Index i : unique) {
        std::uint64_t c = 0;
        for (int k = 0; k < D; ++k) {
            const double t = ext[k] > 0 ? (points[i][k] - box.lo[k]) / ext[k] : 0.0;
            const auto cell = static_cast<std::uint64_t>(std::clamp(t, 0.0, 1.0) * ((1 << 21) - 1));
            c |= morton_spread(cell, D) << k;
        }
        code[i] = c;
    }
    std::stable_sort(unique.begin(), unique.end(), [&](Index a, Index b) { return code[a] < code[b]; });

    BowyerWatson<D> bw(std::move(pts), opts.seed ^ 0x9E3779B97F4A7C15ull);
    bw.run(unique, std::max(opts.jitter, 1e-14) * diag);
    DelaunayResult out = bw.result();
    out.representative = std::move(representative);
    return out;
}

} // namespace

DelaunayResult delaunay(std::span<const Vec3> points, int dim, const DelaunayOptions& opts)
{
    if (dim == 2)
        return run_delaunay<2>(points, opts);
    if (dim == 3)
        return run_delaunay<3>(points, opts);
    throw Error("delaunay: dimension must be 2 or 3");
}

} // namespace medial
