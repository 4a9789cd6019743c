#include "medial/metrics.hpp"

#include "medial/envelope.hpp"
#include "medial/parallel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace medial {

namespace {

constexpr int kProjectionSteps = 20;

double radical_inverse(std::size_t i, unsigned base)
{
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

double wrap(double x)
{
    return x - std::floor(x);
}

} // namespace

HausdorffResult one_sided_hausdorff(std::span<const Vec3> points, const MedialComplex& c)
{
    if (points.empty())
        throw Error("one_sided_hausdorff: no sample points");
    const PrimitiveIndex index = PrimitiveIndex::from_complex(c);
    if (index.empty())
        throw Error("one_sided_hausdorff: empty complex");
    std::vector<double> d(points.size());
    parallel_for(points.size(), [&](std::size_t i) { d[i] = std::abs(index.query(points[i]).distance); });
    HausdorffResult out;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (out.argmax == kInvalidIndex || d[i] > out.distance) {
            out.distance = d[i];
            out.argmax = static_cast<Index>(i);
        }
    return out;
}

HausdorffResult one_sided_hausdorff(std::span<const BoundarySample> samples, const MedialComplex& c)
{
    std::vector<Vec3> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples)
        pts.push_back(s.point);
    return one_sided_hausdorff(pts, c);
}

std::vector<Vec3> envelope_surface_points(const MedialComplex& c, std::size_t n, std::uint64_t seed,
                                          std::vector<char>* converged)
{
    const PrimitiveIndex index = PrimitiveIndex::from_complex(c);
    if (index.empty())
        throw Error("envelope_surface_points: empty complex");
    const auto& prims = index.primitives();
    Aabb box;
    for (const auto& p : prims)
        box.extend(p.bounds());
    const double tol = 1e-9 * std::max(box.diagonal(), 1e-12);
    const bool planar = c.dim() == 2;

    // Randomly shifted Halton points, dealt out to the primitives in turn.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double shift[4] = {u01(rng), u01(rng), u01(rng), u01(rng)};

    std::vector<Vec3> out(n);
    std::vector<char> ok(n, 0);
    parallel_for(n, [&](std::size_t k) {
        const auto& prim = prims[k % prims.size()];
        const std::size_t h = k / prims.size() + 1;
        double s = wrap(radical_inverse(h, 2) + shift[0]);
        double t = wrap(radical_inverse(h, 3) + shift[1]);
        std::array<double, 3> a{1.0, 0.0, 0.0};
        if (prim.kind == PrimitiveKind::Cone) {
            a = {1.0 - s, s, 0.0};
        } else if (prim.kind == PrimitiveKind::Slab) {
            if (s + t > 1.0)
                s = 1.0 - s, t = 1.0 - t;
            a = {1.0 - s - t, s, t};
        }
        const double d0 = wrap(radical_inverse(h, 5) + shift[2]);
        const double d1 = wrap(radical_inverse(h, 7) + shift[3]);
        Vec3 dir;
        if (planar) {
            dir = Vec3(std::cos(2.0 * std::numbers::pi * d0), std::sin(2.0 * std::numbers::pi * d0), 0.0);
        } else {
            const double z = 1.0 - 2.0 * d0;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            dir = Vec3(rho * std::cos(2.0 * std::numbers::pi * d1), rho * std::sin(2.0 * std::numbers::pi * d1), z);
        }
        Vec3 x = prim.center_at(a) + prim.radius_at(a) * dir;
        // Newton steps on the union's signed distance, whose gradient is the
        // direction from the minimising sphere centre.
        for (int step = 0; step < kProjectionSteps; ++step) {
            const auto r = index.query(x);
            if (std::abs(r.distance) <= tol) {
                ok[k] = 1;
                break;
            }
            const auto near = make_primitive(c, r.primitive);
            const Vec3 g = x - near.center_at(r.barycentric);
            const double len = g.norm();
            if (len <= tol)
                break;
            x -= r.distance * g / len;
        }
        if (!ok[k])
            ok[k] = std::abs(index.query(x).distance) <= tol ? 1 : 0;
        out[k] = x;
    });
    if (converged)
        *converged = std::move(ok);
    return out;
}

EnvelopeDistance envelope_to_input_distance(const MedialComplex& c, const BoundaryShape& shape, std::size_t n,
                                            std::uint64_t seed)
{
    if (n == 0)
        throw Error("envelope_to_input_distance: point count must be positive");
    std::vector<char> ok;
    const auto pts = envelope_surface_points(c, n, seed, &ok);
    const ShapeQuery q(shape);
    std::vector<double> d(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        if (ok[i])
            d[i] = q.unsigned_distance(pts[i]);
    });
    EnvelopeDistance out;
    out.points = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i])
            ++out.failures;
        out.distance = std::max(out.distance, d[i]);
    }
    out.flagged = out.failures * 100 > n;
    return out;
}

ErrorReport make_report(const HausdorffResult& in_to_env, std::size_t n_samples, double diag,
                        const std::optional<EnvelopeDistance>& env_to_in)
{
    if (!(diag > 0.0))
        throw Error("make_report: diagonal must be positive");
    ErrorReport r;
    r.diag = diag;
    r.n_samples = n_samples;
    r.argmax_sample = in_to_env.argmax;
    r.one_sided_in_to_env = in_to_env.distance;
    r.normalized_in_to_env = in_to_env.distance / diag;
    if (env_to_in) {
        r.one_sided_env_to_in = env_to_in->distance;
        r.symmetric = std::max(in_to_env.distance, env_to_in->distance);
        r.normalized_env_to_in = env_to_in->distance / diag;
        r.normalized_symmetric = *r.symmetric / diag;
        r.envelope_points = env_to_in->points;
        r.projection_failures = env_to_in->failures;
        r.projection_flagged = env_to_in->flagged;
    }
    return r;
}

} // namespace medial
