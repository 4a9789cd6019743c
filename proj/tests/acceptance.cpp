// Acceptance run: one PASS/FAIL line per criterion.

#include "medial/envelope.hpp"
#include "medial/filters.hpp"
#include "medial/init.hpp"
#include "medial/metrics.hpp"
#include "medial/reconstruct.hpp"
#include "medial/shapes.hpp"
#include "medial/simplify.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace medial;

namespace {

// Pinned tolerances.
constexpr double kCollapseEps = 0.02;
constexpr double kCollapseBound = 0.022;
constexpr double kSphereSeconds = 30.0;
constexpr double kBoundSlack = 1.1;
constexpr double kKernelTol = 1e-4;
constexpr double kSplitTol = 1e-9;
constexpr double kPerfSeconds = 120.0;
constexpr double kPerfBytes = 1024.0 * 1024.0 * 1024.0;
constexpr std::uint64_t kSeed = 7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, ...)
{
    char buf[1024];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

int failed = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail)
{
    if (!pass)
        ++failed;
    std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
}

SimplifyResult run(const BoundaryShape& shape, const std::vector<BoundarySample>& samples, const MedialComplex& init,
                   double eps, bool cap = true)
{
    auto s = samples;
    SimplifyConfig cfg;
    cfg.epsilon = eps;
    cfg.enforce_lfs_cap = cap;
    return simplify(init, s, shape, cfg);
}

void collapse_sphere()
{
    const auto t0 = Clock::now();
    const auto sphere = shapes::icosphere();
    const auto samples = sample_boundary(sphere, 2000, kSeed);
    const auto init = initial_medial_complex(samples, sphere);
    const auto r = run(sphere, samples, init, kCollapseEps * sphere.diag);
    const double secs = seconds_since(t0);
    const double rel = r.report.measured_error / sphere.diag;
    verdict(1, "sphere collapse",
            r.complex.num_vertices() <= 3 && rel <= kCollapseBound && secs < kSphereSeconds,
            format("%zu mesh vertices, %zu -> %zu medial vertices, error %.5f diag (<= %.3f), %.1f s (< %.0f)",
                   sphere.vertices.size(), init.num_vertices(), r.complex.num_vertices(), rel, kCollapseBound, secs,
                   kSphereSeconds));
}

void collapse_capsule()
{
    const auto cap = shapes::capsule(1.0, 2.0);
    const auto samples = sample_boundary(cap, 5000, kSeed);
    const auto init = initial_medial_complex(samples, cap);
    const auto r = run(cap, samples, init, kCollapseEps * cap.diag);
    const double rel = r.report.measured_error / cap.diag;
    verdict(2, "capsule collapse",
            r.complex.num_vertices() <= 8 && r.complex.num_edges() >= 1 && rel <= kCollapseBound,
            format("%zu -> %zu vertices, %zu edges, error %.5f diag (<= %.3f)", init.num_vertices(),
                   r.complex.num_vertices(), r.complex.num_edges(), rel, kCollapseBound));
}

// Error bound on the first three epsilons and monotone vertex counts over all
// six, sharing one initial complex per shape.
void bound_and_sweep()
{
    const std::vector<double> eps = {0.032, 0.016, 0.008, 0.004, 0.002, 0.001};
    struct Case {
        const char* name;
        BoundaryShape shape;
        std::size_t samples;
    };
    const std::vector<Case> cases = {{"sphere", shapes::icosphere(), 2000},
                                     {"capsule", shapes::capsule(), 5000},
                                     {"box", shapes::box(), 5000},
                                     {"torus", shapes::torus(), 2000},
                                     {"star", shapes::star_2d(), 2000}};
    bool bound_ok = true, mono_ok = true;
    std::string bound_detail, mono_detail;
    for (const auto& c : cases) {
        const auto samples = sample_boundary(c.shape, c.samples, kSeed);
        const auto init = initial_medial_complex(samples, c.shape);
        double worst_ratio = 0.0;
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const auto r = run(c.shape, samples, init, eps[i] * c.shape.diag);
            counts.push_back(r.complex.num_vertices());
            if (i < 3)
                worst_ratio = std::max(worst_ratio, r.report.measured_error / r.report.effective_epsilon);
        }
        const bool b = worst_ratio <= kBoundSlack;
        bool m = true;
        for (std::size_t i = 1; i < counts.size(); ++i)
            m = m && counts[i] >= counts[i - 1];
        bound_ok = bound_ok && b;
        mono_ok = mono_ok && m;
        bound_detail += format("%s%s %.3f", bound_detail.empty() ? "" : ", ", c.name, worst_ratio);
        std::string seq;
        for (std::size_t n : counts)
            seq += format("%s%zu", seq.empty() ? "" : "<=", n);
        mono_detail += format("%s%s %s", mono_detail.empty() ? "" : "; ", c.name, seq.c_str());
    }
    verdict(3, "error bound", bound_ok,
            "worst error / effective epsilon: " + bound_detail + format(" (<= %.1f)", kBoundSlack));
    verdict(4, "monotone sweep", mono_ok, mono_detail);
}

void topology()
{
    const auto torus = shapes::torus(2.0, 0.5);
    const auto samples = sample_boundary(torus, 2000, kSeed);
    const auto init = initial_medial_complex(samples, torus);
    const double cap = local_feature_size(samples, init).global_cap;

    const auto kept = run(torus, samples, init, cap);
    const auto mesh = reconstruct_surface(kept.complex, 96);
    const bool watertight = is_watertight(mesh);
    const long chi = watertight ? euler_characteristic(mesh) : 0;

    const auto loose = run(torus, samples, init, 4.0 * cap, false);
    const auto loose_mesh = reconstruct_surface(loose.complex, 96);
    const bool loose_closed = is_watertight(loose_mesh);
    const std::string loose_chi = loose_closed ? std::to_string(euler_characteristic(loose_mesh)) : "n/a";
    verdict(5, "topology preservation", watertight && chi == 0,
            format("epsilon = cap %.4f: %zu vertices, watertight %s, chi %ld; uncapped 4 x cap: %zu vertices, "
                   "watertight %s, chi %s (change permitted)",
                   cap, kept.complex.num_vertices(), watertight ? "yes" : "no", chi, loose.complex.num_vertices(),
                   loose_closed ? "yes" : "no", loose_chi.c_str()));
}

void noise()
{
    const auto clean = shapes::star_2d();
    const double amplitude = 0.2 * shapes::mean_edge_length(clean);
    const auto noisy = shapes::add_normal_noise_2d(clean, 0.2, 11);
    const auto samples = sample_boundary(noisy, 2000, kSeed);
    const auto init = initial_medial_complex(samples, noisy);
    const auto r = run(noisy, samples, init, 0.002 * noisy.diag);
    const auto reference = sample_boundary(clean, 20000, 3);
    const double err = one_sided_hausdorff(reference, r.complex).distance;
    const double share = static_cast<double>(r.complex.num_vertices()) / init.num_vertices();
    verdict(6, "noise robustness", err <= 2.0 * amplitude && share <= 0.05,
            format("error to noise-free star %.5f = %.2f x amplitude %.5f (<= 2), %zu of %zu vertices = %.1f%% "
                   "(<= 5%%)",
                   err, err / amplitude, amplitude, r.complex.num_vertices(), init.num_vertices(), 100.0 * share));
}

void kernel_oracle()
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ur(0.05, 1.5);
    auto vec = [&](double s) { return Vec3(s * u(rng), s * u(rng), s * u(rng)); };
    auto sphere = [&] { return Sphere{vec(2.0), ur(rng)}; };
    double worst[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < 1000; ++i) {
        EnvelopePrimitive p;
        p.kind = PrimitiveKind::Sphere;
        p.spheres[0] = sphere();
        Vec3 q = vec(4.0);
        worst[0] = std::max(worst[0], std::abs(primitive_signed_distance(q, p).distance -
                                               ((q - p.spheres[0].center).norm() - p.spheres[0].radius)));

        p.kind = PrimitiveKind::Cone;
        p.spheres = {sphere(), sphere(), Sphere{}};
        q = vec(4.0);
        const double cg = oracle::cone_grid_min(q, p.spheres[0], p.spheres[1], 100001);
        worst[1] = std::max(worst[1], std::abs(primitive_signed_distance(q, p).distance - cg));

        p.kind = PrimitiveKind::Slab;
        p.spheres = {sphere(), sphere(), sphere()};
        q = vec(4.0);
        const double sg = oracle::slab_grid_min(q, p.spheres[0], p.spheres[1], p.spheres[2], 1000);
        worst[2] = std::max(worst[2], std::abs(primitive_signed_distance(q, p).distance - sg));
    }
    verdict(7, "distance kernel oracle", std::max({worst[0], worst[1], worst[2]}) <= kKernelTol,
            format("max deviation from grid minimum over 1000 pairs: sphere %.2e, cone %.2e, slab %.2e (<= %.0e)",
                   worst[0], worst[1], worst[2], kKernelTol));
}

// Inserts the interpolated sphere at parameter t of edge e and splits every
// face through e.
void split_edge(MedialComplex& c, Index e, double t)
{
    const auto ends = c.edge(e);
    const auto& a = c.vertex(ends[0]);
    const auto& b = c.vertex(ends[1]);
    MedialVertex m;
    m.position = (1.0 - t) * a.position + t * b.position;
    m.radius = (1.0 - t) * a.radius + t * b.radius;
    std::vector<Index> apexes;
    for (Index f : c.edge_faces(e)) {
        for (Index v : c.face(f))
            if (v != ends[0] && v != ends[1])
                apexes.push_back(v);
        c.remove_face(f);
    }
    c.remove_edge(e);
    const Index mid = c.add_vertex(std::move(m));
    c.insert_edge(ends[0], mid);
    c.insert_edge(mid, ends[1]);
    for (Index x : apexes) {
        c.insert_face(ends[0], mid, x);
        c.insert_face(mid, ends[1], x);
    }
}

void subdivision()
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<MedialVertex> verts(7);
    for (auto& v : verts) {
        v.position = Vec3(2 * u(rng), 2 * u(rng), 2 * u(rng));
        v.radius = 0.45 + 0.35 * u(rng);
    }
    std::vector<EdgeVerts> edges = {{4, 5}, {5, 6}};
    std::vector<FaceVerts> faces = {{0, 1, 2}, {0, 2, 3}, {2, 3, 4}};
    auto c = build_complex(3, verts, edges, faces);
    std::vector<Vec3> probes;
    std::vector<double> reference;
    for (int i = 0; i < 100; ++i) {
        probes.emplace_back(4 * u(rng), 4 * u(rng), 4 * u(rng));
        reference.push_back(complex_signed_distance(probes.back(), c).distance);
    }
    double worst = 0.0;
    for (int split = 0; split < 100; ++split) {
        const auto live = c.live_edges();
        split_edge(c, live[rng() % live.size()], 0.1 + 0.8 * (u(rng) + 1.0) / 2.0);
        for (std::size_t i = 0; i < probes.size(); ++i)
            worst = std::max(worst, std::abs(complex_signed_distance(probes[i], c).distance - reference[i]));
    }
    c.validate();
    verdict(8, "subdivision invariance", worst <= kSplitTol,
            format("100 splits (%zu vertices, %zu faces after), 100 probes each, max change %.2e (<= %.0e)",
                   c.num_vertices(), c.num_faces(), worst, kSplitTol));
}

bool same_complex(const MedialComplex& a, const MedialComplex& b)
{
    if (a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() || a.num_faces() != b.num_faces())
        return false;
    for (Index v : a.live_vertices())
        if (!b.vertex_alive(v) || a.vertex(v).position != b.vertex(v).position ||
            a.vertex(v).radius != b.vertex(v).radius)
            return false;
    for (Index e : a.live_edges())
        if (b.find_edge(a.edge(e)[0], a.edge(e)[1]) == kInvalidIndex)
            return false;
    for (Index f : a.live_faces())
        if (b.find_face(a.face(f)[0], a.face(f)[1], a.face(f)[2]) == kInvalidIndex)
            return false;
    return true;
}

void filter_properties()
{
    const auto inputs = fixtures::random_filter_inputs(50);
    bool idempotent = true, monotone = true;
    for (const auto& in : inputs) {
        const auto& c = in.complex;
        const auto all = fixtures::vertex_keys(c);
        std::vector<double> radii;
        for (Index v : c.live_vertices())
            radii.push_back(tangency_circumradius(c, v, in.samples));
        std::sort(radii.begin(), radii.end());
        std::vector<double> lambdas = {0.0};
        for (double q : {0.2, 0.5, 0.8, 0.95})
            lambdas.push_back(radii[static_cast<std::size_t>(q * (radii.size() - 1))]);
        auto previous = all;
        for (double l : lambdas) {
            const auto f = lambda_filter(c, in.samples, l);
            idempotent = idempotent && same_complex(lambda_filter(f, in.samples, l), f);
            const auto keys = fixtures::vertex_keys(f);
            monotone = monotone && fixtures::subset(keys, previous);
            previous = keys;
        }
        previous = all;
        for (double deg : {0.0, 30.0, 60.0, 90.0, 120.0, 150.0}) {
            const double theta = deg * std::numbers::pi / 180.0;
            const auto f = angle_filter(c, in.samples, theta);
            idempotent = idempotent && same_complex(angle_filter(f, in.samples, theta), f);
            const auto keys = fixtures::vertex_keys(f);
            monotone = monotone && fixtures::subset(keys, previous);
            previous = keys;
        }
    }
    const auto star = shapes::add_normal_noise_2d(shapes::star_2d(), 0.2, 11);
    const auto s = sample_boundary(star, star.vertices.size(), 1);
    const auto c = initial_medial_complex(s, star);
    const std::size_t before = connected_components(c);
    const std::size_t after = connected_components(angle_filter(c, s, 0.75 * std::numbers::pi));
    verdict(9, "filter properties", idempotent && monotone && before == 1 && after > 1,
            format("50 inputs: idempotent %s, monotone %s; noisy star components %zu -> %zu at 135 degrees",
                   idempotent ? "yes" : "no", monotone ? "yes" : "no", before, after));
}

void performance()
{
    const auto t0 = Clock::now();
    const auto torus = shapes::torus(2.0, 0.5, 128, 32);
    const auto samples = sample_boundary(torus, torus.vertices.size(), kSeed);
    const auto init = initial_medial_complex(samples, torus);
    const auto r = run(torus, samples, init, 0.001 * torus.diag);
    const double secs = seconds_since(t0);
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    const double peak = static_cast<double>(usage.ru_maxrss) * 1024.0;
    verdict(10, "performance", secs <= kPerfSeconds && peak <= kPerfBytes,
            format("%zu-vertex mesh, %zu -> %zu medial vertices at 0.001 diag in %.1f s (<= %.0f), process peak "
                   "%.0f MB (<= %.0f)",
                   torus.vertices.size(), init.num_vertices(), r.complex.num_vertices(), secs, kPerfSeconds,
                   peak / (1024.0 * 1024.0), kPerfBytes / (1024.0 * 1024.0)));
}

} // namespace

int main()
{
    const std::vector<void (*)()> criteria = {collapse_sphere, collapse_capsule, bound_and_sweep, topology, noise,
                                              kernel_oracle,   subdivision,      filter_properties, performance};
    for (auto fn : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            ++failed;
            std::printf("[FAIL] criterion aborted: %s\n", e.what());
        }
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
