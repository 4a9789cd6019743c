#include "medial/io.hpp"
#include "medial/shapes.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace medial;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("medial_io_" + name)).string();
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_text(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

MedialComplex capsule_mma()
{
    MedialVertex a, b;
    a.position = Vec3(-1, 0, 0);
    b.position = Vec3(1, 0, 0);
    a.radius = b.radius = 1.0;
    std::vector<EdgeVerts> e = {{0, 1}};
    return build_complex(3, {a, b}, e, {});
}

} // namespace

TEST_CASE("cube OBJ and PLY round trips")
{
    const auto cube = shapes::box(Vec3(1, 2, 3), 2);
    for (const char* ext : {"obj", "ply"}) {
        const auto path = temp_path(std::string("cube.") + ext);
        write_shape(path, cube);
        const auto back = read_shape(path);
        REQUIRE(back.vertices.size() == cube.vertices.size());
        for (std::size_t i = 0; i < cube.vertices.size(); ++i)
            CHECK(back.vertices[i] == cube.vertices[i]);
        CHECK(back.triangles == cube.triangles);
        std::remove(path.c_str());
    }
}

TEST_CASE("square CSV")
{
    std::istringstream in("# unit square\n0,0\n1,0\n1,1\n0,1\n");
    const auto sq = parse_csv(in, "square.csv");
    CHECK(sq.dim == 2);
    CHECK(sq.vertices.size() == 4);
    CHECK(sq.segments.size() == 4);

    const auto path = temp_path("square.csv");
    write_shape(path, sq);
    const auto back = read_shape(path);
    CHECK(back.vertices == sq.vertices);
    std::remove(path.c_str());

    std::istringstream bad("0,0\n1,0\n1;x\n");
    CHECK(error_text([&] { parse_csv(bad, "bad.csv"); }).find("bad.csv:3:") == 0);
}

TEST_CASE("OBJ errors")
{
    std::istringstream open_surface("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\n");
    const auto msg = error_text([&] { parse_obj(open_surface, "open.obj"); });
    CHECK(msg.find("open.obj") != std::string::npos);
    CHECK(msg.find("boundary edge") != std::string::npos);

    std::istringstream garbage("v 0 0 0\nv 1 zero 0\n");
    CHECK(error_text([&] { parse_obj(garbage, "g.obj"); }).find("g.obj:2:") == 0);

    std::istringstream range("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    CHECK(error_text([&] { parse_obj(range, "r.obj"); }).find("r.obj:4:") == 0);

    // Texture/normal indices and negative references are accepted.
    std::istringstream tet("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1/1 3/1 2/1\nf 1 2 4\nf 1 4 3\nf -3 -2 -1\n");
    CHECK(parse_obj(tet, "tet.obj").triangles.size() == 4);

    CHECK_THROWS_AS(read_shape(temp_path("missing.obj")), Error);
    CHECK_THROWS_AS(read_shape(temp_path("shape.stl")), Error);
}

TEST_CASE("PLY header handling")
{
    std::istringstream bin("ply\nformat binary_little_endian 1.0\nend_header\n");
    CHECK(error_text([&] { parse_ply(bin, "b.ply"); }).find("ASCII") != std::string::npos);
    std::istringstream tet("ply\nformat ascii 1.0\ncomment tetra\nelement vertex 4\nproperty float x\n"
                           "property float y\nproperty float z\nproperty float nx\nelement face 4\n"
                           "property list uchar int vertex_indices\nend_header\n"
                           "0 0 0 9\n1 0 0 9\n0 1 0 9\n0 0 1 9\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
    const auto s = parse_ply(tet, "t.ply");
    CHECK(s.vertices.size() == 4);
    CHECK(s.triangles.size() == 4);
}

TEST_CASE("mma round trips")
{
    const auto cap = capsule_mma();
    const std::string text = format_mma(cap);
    CHECK(text == "MMA 3\nv -1 0 0 1\nv 1 0 0 1\ne 0 1\n");
    std::istringstream in(text);
    const auto back = parse_mma(in);
    CHECK(format_mma(back) == text);

    // A real initial complex with faces, tangency data and provenance.
    auto ball = shapes::icosphere(2);
    auto samples = sample_boundary(ball, 300, 4);
    const auto c = initial_medial_complex(samples, ball);
    const SampleInfo info{300, 4};
    const auto path = temp_path("ball.mma");
    write_mma(path, c, info);
    std::optional<SampleInfo> got;
    const auto read = read_mma(path, &got);
    REQUIRE(got);
    CHECK(got->count == 300);
    CHECK(got->seed == 4);
    REQUIRE(read.num_vertices() == c.num_vertices());
    CHECK(read.num_edges() == c.num_edges());
    CHECK(read.num_faces() == c.num_faces());
    const auto cc = c.compacted();
    for (Index v = 0; v < read.num_vertices(); ++v) {
        CHECK(read.vertex(v).position == cc.vertex(v).position);
        CHECK(read.vertex(v).radius == cc.vertex(v).radius);
        CHECK(read.vertex(v).tangency_ids == cc.vertex(v).tangency_ids);
    }
    const auto path2 = temp_path("ball2.mma");
    write_mma(path2, read, got);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("mma validation")
{
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_mma(in, "m.mma");
    };
    CHECK(error_text([&] { parse("MMA 3\nv 0 0 0 -1\n"); }).find("m.mma:2: negative radius") == 0);
    CHECK(error_text([&] { parse("MMA 2\nv 0 0 1\nv 1 0 1\nv 0 1 1\nf 0 1 2\n"); }).find("m.mma:5:") == 0);
    CHECK(error_text([&] { parse("MMA 3\nv 0 0 0 1\ne 0 3\n"); }).find("m.mma:3:") == 0);
    CHECK(error_text([&] { parse("v 0 0 0 1\n"); }).find("m.mma:1:") == 0);
    CHECK(error_text([&] { parse("MMA 3\nq 1\n"); }).find("unknown record") != std::string::npos);
    // 2D files have no z coordinate; comments are ignored.
    const auto c = parse("# planar\nMMA 2\nv 0.5 0.25 0.125 # sphere\n");
    CHECK(c.dim() == 2);
    CHECK(c.vertex(0).position == Vec3(0.5, 0.25, 0.0));
    CHECK(c.vertex(0).radius == 0.125);
}

TEST_CASE("shortest round-trip numbers")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("report JSON")
{
    SimplifyReport s;
    s.initial_vertices = 100;
    s.final_vertices = 3;
    s.epsilon = 0.1;
    s.effective_epsilon = 0.05;
    s.measured_error = 0.04;
    s.argmax_sample = 12;
    s.stop_reason = "threshold";
    const auto e1 = make_report(HausdorffResult{0.04, 12}, 1000, 2.0);
    const auto e2 = make_report(HausdorffResult{0.04, 12}, 1000, 2.0, EnvelopeDistance{0.06, 100, 0, false});

    const auto a = nlohmann::json::parse(report_json(&s, nullptr));
    CHECK(a.contains("simplify"));
    CHECK(!a.contains("error"));
    CHECK(a["simplify"]["final_vertices"] == 3);
    CHECK(a["simplify"]["lfs_cap"].is_null());
    CHECK(a["simplify"]["stop_reason"] == "threshold");

    const auto b = nlohmann::json::parse(report_json(nullptr, &e1));
    CHECK(b["error"]["normalized_in_to_env"] == 0.02);
    CHECK(b["error"]["symmetric"].is_null());
    CHECK(b["error"]["argmax_sample"] == 12);

    const auto path = temp_path("report.json");
    write_report(path, &s, &e2);
    const auto c = nlohmann::json::parse(slurp(path));
    std::remove(path.c_str());
    for (const char* key : {"one_sided_in_to_env", "one_sided_env_to_in", "symmetric", "diag", "normalized_in_to_env",
                            "normalized_env_to_in", "normalized_symmetric", "n_samples", "argmax_sample",
                            "envelope_points", "projection_failures", "projection_flagged"})
        CHECK(c["error"].contains(key));
    CHECK(c["error"]["symmetric"] == 0.06);
    CHECK(c["simplify"]["measured_error"] == 0.04);
}
