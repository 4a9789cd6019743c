#include "medial/filters.hpp"
#include "medial/init.hpp"
#include "medial/io.hpp"
#include "medial/metrics.hpp"
#include "medial/parallel.hpp"
#include "medial/reconstruct.hpp"
#include "medial/shapes.hpp"
#include "medial/simplify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace medial;

namespace {

constexpr int kValidationExit = 2;

// A shape file, or the name of a built-in test shape when the argument has no
// extension and no such file exists.
BoundaryShape load_shape(const std::string& arg)
{
    if (std::filesystem::path(arg).has_extension() || std::filesystem::is_regular_file(arg))
        return read_shape(arg);
    try {
        return shapes::by_name(arg);
    } catch (const Error&) {
        throw Error("shape '" + arg + "' is neither a readable file nor a built-in shape");
    }
}

// Regenerates the samples a complex's tangency ids refer to.
std::vector<BoundarySample> samples_for(const BoundaryShape& shape, const MedialComplex& c,
                                        const std::optional<SampleInfo>& stored, std::size_t count,
                                        std::uint64_t seed, bool count_given, bool seed_given)
{
    const std::size_t n = count_given || !stored ? count : stored->count;
    const std::uint64_t s = seed_given || !stored ? seed : stored->seed;
    auto samples = sample_boundary(shape, n, s);
    for (Index v : c.live_vertices())
        for (Index i : c.vertex(v).tangency_ids)
            if (i >= samples.size())
                throw Error("tangency id " + std::to_string(i) + " exceeds the sample count " +
                            std::to_string(samples.size()) + "; pass the --samples/--seed used by init");
    return samples;
}

void print_counts(const char* label, const MedialComplex& c)
{
    std::printf("%s: %zu vertices, %zu edges, %zu faces, %zu primitives\n", label, c.num_vertices(), c.num_edges(),
                c.num_faces(), c.num_primitives());
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !(v > 0.0))
            throw Error("invalid epsilon '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw Error("no epsilons given");
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Medial mesh computation: initial Voronoi complex, error-driven simplification, reconstruction "
                 "and measurement."};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: MEDIALMESH_THREADS or all cores)");

    // init
    auto* init_cmd = app.add_subcommand("init", "Sample the boundary and build the initial medial complex");
    std::string init_shape, init_out;
    std::size_t init_samples = 2000;
    std::uint64_t init_seed = 7;
    init_cmd->add_option("shape", init_shape, "Shape file (.obj/.ply/.csv) or built-in name")->required();
    init_cmd->add_option("--samples", init_samples, "Boundary sample count")->capture_default_str();
    init_cmd->add_option("--seed", init_seed, "Sampling seed")->capture_default_str();
    init_cmd->add_option("-o,--output", init_out, "Output .mma file");

    // simplify
    auto* simp_cmd = app.add_subcommand("simplify", "Error-driven edge contraction");
    std::string simp_shape, simp_in, simp_out, simp_report;
    double simp_eps = 0.0;
    bool simp_relative = false, simp_no_cap = false;
    std::size_t simp_max = 0, simp_samples = 2000;
    std::uint64_t simp_seed = 7;
    simp_cmd->add_option("shape", simp_shape, "Shape file or built-in name")->required();
    simp_cmd->add_option("input", simp_in, "Input .mma from init")->required();
    simp_cmd->add_option("--epsilon", simp_eps, "Error threshold")->required();
    simp_cmd->add_flag("--relative", simp_relative, "Epsilon is a fraction of the bounding-box diagonal");
    simp_cmd->add_flag("--no-lfs-cap", simp_no_cap, "Do not clamp epsilon to half the smallest feature size");
    auto* simp_max_opt = simp_cmd->add_option("--max-contractions", simp_max, "Stop after K contractions");
    auto* simp_samples_opt =
        simp_cmd->add_option("--samples", simp_samples, "Sample count (default: as recorded by init)");
    auto* simp_seed_opt = simp_cmd->add_option("--seed", simp_seed, "Sampling seed (default: as recorded by init)");
    simp_cmd->add_option("-o,--output", simp_out, "Output .mma file");
    simp_cmd->add_option("--report", simp_report, "JSON report file");

    // reconstruct
    auto* rec_cmd = app.add_subcommand("reconstruct", "Mesh the envelope surface by marching cubes");
    std::string rec_in, rec_out;
    int rec_res = 96;
    rec_cmd->add_option("input", rec_in, "Input .mma")->required();
    rec_cmd->add_option("--res", rec_res, "Grid cells along the longest axis")->capture_default_str();
    rec_cmd->add_option("-o,--output", rec_out, "Output .obj or .ply (2D: .obj polyline)")->required();

    // measure
    auto* meas_cmd = app.add_subcommand("measure", "Hausdorff distances between shape and envelope");
    std::string meas_shape, meas_in, meas_report;
    std::size_t meas_samples = 0, meas_env = 0;
    std::uint64_t meas_seed = 1;
    meas_cmd->add_option("shape", meas_shape, "Shape file or built-in name")->required();
    meas_cmd->add_option("input", meas_in, "Input .mma")->required();
    meas_cmd->add_option("--samples", meas_samples, "Boundary samples (default: 10 x shape vertices)");
    meas_cmd->add_option("--envelope-points", meas_env, "Envelope surface points (default: same as samples)");
    meas_cmd->add_option("--seed", meas_seed, "Sampling seed")->capture_default_str();
    meas_cmd->add_option("--report", meas_report, "JSON report file");

    // filter
    auto* filt_cmd = app.add_subcommand("filter", "Lambda or angle filtering of an initial complex");
    std::string filt_in, filt_out, filt_method, filt_shape;
    double filt_threshold = 0.0;
    std::size_t filt_samples = 2000;
    std::uint64_t filt_seed = 7;
    filt_cmd->add_option("input", filt_in, "Input .mma with tangency data")->required();
    filt_cmd->add_option("--method", filt_method, "lambda or angle")
        ->required()
        ->check(CLI::IsMember({"lambda", "angle"}));
    filt_cmd->add_option("--threshold", filt_threshold, "Circumradius (lambda) or angle in radians")->required();
    filt_cmd->add_option("--shape", filt_shape, "Shape the complex was built from")->required();
    auto* filt_samples_opt = filt_cmd->add_option("--samples", filt_samples, "Sample count used by init");
    auto* filt_seed_opt = filt_cmd->add_option("--seed", filt_seed, "Sampling seed used by init");
    filt_cmd->add_option("-o,--output", filt_out, "Output .mma file")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Vertex and primitive counts over a list of epsilons");
    std::string sweep_shape, sweep_csv, sweep_eps = "0.032,0.016,0.008,0.004,0.002,0.001";
    std::size_t sweep_samples = 2000;
    std::uint64_t sweep_seed = 7;
    bool sweep_no_cap = false;
    sweep_cmd->add_option("shape", sweep_shape, "Shape file or built-in name")->required();
    sweep_cmd->add_option("--epsilons", sweep_eps, "Comma-separated epsilons, relative to the diagonal")
        ->capture_default_str();
    sweep_cmd->add_option("--csv", sweep_csv, "Output CSV table");
    sweep_cmd->add_option("--samples", sweep_samples, "Boundary sample count")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep_seed, "Sampling seed")->capture_default_str();
    sweep_cmd->add_flag("--no-lfs-cap", sweep_no_cap, "Do not clamp epsilon to half the smallest feature size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidationExit;
    }

    try {
        if (threads == 0)
            if (const char* env = std::getenv("MEDIALMESH_THREADS")) {
                char* end = nullptr;
                const long n = std::strtol(env, &end, 10);
                if (end == env || *end != '\0' || n < 0)
                    throw Error("MEDIALMESH_THREADS must be a non-negative integer");
                threads = static_cast<unsigned>(n);
            }
        set_thread_count(threads);

        if (*init_cmd) {
            const auto shape = load_shape(init_shape);
            const auto samples = sample_boundary(shape, init_samples, init_seed);
            InitStats st;
            const auto c = initial_medial_complex(samples, shape, &st);
            const auto fs = local_feature_size(samples, c);
            print_counts("initial complex", c);
            std::printf("lfs cap: %.17g (%.6g of diagonal)\n", fs.global_cap, fs.global_cap / shape.diag);
            if (!init_out.empty())
                write_mma(init_out, c, SampleInfo{samples.size(), init_seed});
        } else if (*simp_cmd) {
            if (!(simp_eps > 0.0))
                throw Error("--epsilon must be positive");
            const auto shape = load_shape(simp_shape);
            std::optional<SampleInfo> info;
            const auto c = read_mma(simp_in, &info);
            if (c.dim() != shape.dim)
                throw Error("complex and shape dimensions differ");
            auto samples = samples_for(shape, c, info, simp_samples, simp_seed, simp_samples_opt->count() > 0,
                                       simp_seed_opt->count() > 0);
            SimplifyConfig cfg;
            cfg.epsilon = simp_relative ? simp_eps * shape.diag : simp_eps;
            cfg.enforce_lfs_cap = !simp_no_cap;
            if (simp_max_opt->count() > 0)
                cfg.max_contractions = simp_max;
            const auto r = simplify(c, samples, shape, cfg);
            const auto& rep = r.report;
            print_counts("simplified complex", r.complex);
            std::printf("contractions: %zu, ligature vetoes: %zu, stop: %s\n", rep.contractions, rep.ligature_vetoes,
                        rep.stop_reason.c_str());
            std::printf("epsilon: %.6g, lfs cap: %.6g, effective: %.6g\n", rep.epsilon, rep.lfs_cap,
                        rep.effective_epsilon);
            std::printf("measured error: %.6g (%.6g of diagonal), %.2f s\n", rep.measured_error,
                        rep.measured_error / shape.diag, rep.wall_seconds);
            if (!simp_out.empty()) {
                std::optional<SampleInfo> out_info;
                if (info && !simp_samples_opt->count() && !simp_seed_opt->count())
                    out_info = info;
                else
                    out_info = SampleInfo{samples.size(), simp_seed_opt->count() || !info ? simp_seed : info->seed};
                write_mma(simp_out, r.complex, out_info);
            }
            if (!simp_report.empty()) {
                const auto err =
                    make_report(HausdorffResult{rep.measured_error, rep.argmax_sample}, samples.size(), shape.diag);
                write_report(simp_report, &rep, &err);
            }
        } else if (*rec_cmd) {
            const auto c = read_mma(rec_in);
            if (c.dim() == 3) {
                const auto mesh = reconstruct_surface(c, rec_res);
                write_mesh(rec_out, mesh);
                std::printf("mesh: %zu vertices, %zu triangles, watertight: %s, euler characteristic: %ld\n",
                            mesh.vertices.size(), mesh.triangles.size(), is_watertight(mesh) ? "yes" : "no",
                            euler_characteristic(mesh));
            } else {
                const auto lines = reconstruct_outline(c, rec_res);
                write_polyline(rec_out, lines);
                std::printf("outline: %zu vertices, %zu segments\n", lines.vertices.size(), lines.segments.size());
            }
        } else if (*meas_cmd) {
            const auto shape = load_shape(meas_shape);
            const auto c = read_mma(meas_in);
            const std::size_t n = meas_samples > 0 ? meas_samples : 10 * shape.vertices.size();
            const auto samples = sample_boundary(shape, n, meas_seed);
            const auto h = one_sided_hausdorff(samples, c);
            const auto env = envelope_to_input_distance(c, shape, meas_env > 0 ? meas_env : n, meas_seed);
            const auto rep = make_report(h, samples.size(), shape.diag, env);
            std::printf("input to envelope: %.6g (%.6g of diagonal)\n", rep.one_sided_in_to_env,
                        rep.normalized_in_to_env);
            std::printf("envelope to input: %.6g (%.6g of diagonal)%s\n", *rep.one_sided_env_to_in,
                        *rep.normalized_env_to_in, rep.projection_flagged ? " [projection flagged]" : "");
            std::printf("symmetric: %.6g (%.6g of diagonal)\n", *rep.symmetric, *rep.normalized_symmetric);
            if (!meas_report.empty())
                write_report(meas_report, nullptr, &rep);
        } else if (*filt_cmd) {
            if (!(filt_threshold >= 0.0))
                throw Error("--threshold must be non-negative");
            const auto shape = load_shape(filt_shape);
            std::optional<SampleInfo> info;
            const auto c = read_mma(filt_in, &info);
            const auto samples = samples_for(shape, c, info, filt_samples, filt_seed, filt_samples_opt->count() > 0,
                                             filt_seed_opt->count() > 0);
            const auto f = filt_method == "lambda" ? lambda_filter(c, samples, filt_threshold)
                                                   : angle_filter(c, samples, filt_threshold);
            print_counts("filtered complex", f);
            std::printf("connected components: %zu\n", connected_components(f));
            write_mma(filt_out, f, SampleInfo{samples.size(), info && !filt_seed_opt->count() ? info->seed : filt_seed});
        } else if (*sweep_cmd) {
            const auto shape = load_shape(sweep_shape);
            const auto eps = parse_list(sweep_eps);
            const auto base = sample_boundary(shape, sweep_samples, sweep_seed);
            const auto c = initial_medial_complex(base, shape);
            print_counts("initial complex", c);
            std::ostringstream csv;
            csv << "epsilon_rel,epsilon,effective_epsilon,vertices,edges,faces,primitives,error,error_rel\n";
            for (double e : eps) {
                auto samples = base;
                SimplifyConfig cfg;
                cfg.epsilon = e * shape.diag;
                cfg.enforce_lfs_cap = !sweep_no_cap;
                const auto r = simplify(c, samples, shape, cfg);
                const auto& rep = r.report;
                csv << format_double(e) << ',' << format_double(cfg.epsilon) << ','
                    << format_double(rep.effective_epsilon) << ',' << rep.final_vertices << ',' << rep.final_edges
                    << ',' << rep.final_faces << ',' << rep.final_primitives << ','
                    << format_double(rep.measured_error) << ',' << format_double(rep.measured_error / shape.diag)
                    << '\n';
                std::printf("epsilon %-8g vertices %6zu primitives %6zu error %.4g (%.4g rel) %.2f s\n", e,
                            rep.final_vertices, rep.final_primitives, rep.measured_error,
                            rep.measured_error / shape.diag, rep.wall_seconds);
                std::fflush(stdout);
            }
            if (!sweep_csv.empty()) {
                std::ofstream out(sweep_csv, std::ios::binary);
                if (!out)
                    throw Error("cannot write " + sweep_csv);
                out << csv.str();
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
