#include "medial/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace medial {

namespace {

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& what)
{
    throw Error(name + ":" + std::to_string(line) + ": " + what);
}

std::string lower_extension(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos)
        return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    return out;
}

std::vector<std::string> split_tokens(const std::string& line)
{
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;)
        tok.push_back(t);
    return tok;
}

double parse_double(const std::string& tok, const std::string& name, std::size_t line)
{
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    const char* first = tok.data() + (!tok.empty() && tok[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, end, v);
    if (ec != std::errc() || ptr != end)
        fail(name, line, "expected a number, got '" + tok + "'");
    if (!std::isfinite(v))
        fail(name, line, "non-finite number '" + tok + "'");
    return v;
}

long long parse_int(const std::string& tok, const std::string& name, std::size_t line)
{
    long long v = 0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end)
        fail(name, line, "expected an integer, got '" + tok + "'");
    return v;
}

Index parse_index(const std::string& tok, const std::string& name, std::size_t line)
{
    const long long v = parse_int(tok, name, line);
    if (v < 0 || v >= static_cast<long long>(kInvalidIndex))
        fail(name, line, "index " + tok + " out of range");
    return static_cast<Index>(v);
}

std::string strip_comment(std::string line)
{
    const auto hash = line.find('#');
    if (hash != std::string::npos)
        line.erase(hash);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

BoundaryShape validated(const std::string& name, const std::function<BoundaryShape()>& build)
{
    try {
        return build();
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
}

void write_obj(std::ostream& out, const TriangleMesh& mesh)
{
    for (const Vec3& v : mesh.vertices)
        out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_ply(std::ostream& out, const TriangleMesh& mesh)
{
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (const Vec3& v : mesh.vertices)
        out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    for (const auto& t : mesh.triangles)
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc())
        throw Error("format_double: conversion failed");
    return std::string(buf, ptr);
}

BoundaryShape parse_obj(std::istream& in, const std::string& name)
{
    std::vector<Vec3> verts;
    std::vector<std::array<Index, 3>> tris;
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        const auto tok = split_tokens(strip_comment(raw));
        if (tok.empty())
            continue;
        if (tok[0] == "v") {
            if (tok.size() < 4)
                fail(name, line, "vertex needs three coordinates");
            verts.emplace_back(parse_double(tok[1], name, line), parse_double(tok[2], name, line),
                               parse_double(tok[3], name, line));
        } else if (tok[0] == "f") {
            if (tok.size() < 4)
                fail(name, line, "face needs at least three vertices");
            std::vector<Index> poly;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const long long k = parse_int(tok[i].substr(0, tok[i].find('/')), name, line);
                const long long idx = k < 0 ? static_cast<long long>(verts.size()) + k : k - 1;
                if (k == 0 || idx < 0 || idx >= static_cast<long long>(verts.size()))
                    fail(name, line, "face index " + tok[i] + " out of range");
                poly.push_back(static_cast<Index>(idx));
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                tris.push_back({poly[0], poly[i], poly[i + 1]});
        }
    }
    return validated(name, [&] { return make_shape_3d(std::move(verts), std::move(tris)); });
}

BoundaryShape parse_ply(std::istream& in, const std::string& name)
{
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<std::string> props;
        bool list = false;
    };
    std::vector<Element> elements;
    std::string raw;
    std::size_t line = 0;
    bool ascii = false, header_done = false;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        const auto tok = split_tokens(raw);
        if (line == 1) {
            if (tok.size() != 1 || tok[0] != "ply")
                fail(name, line, "missing 'ply' magic");
            continue;
        }
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info")
            continue;
        if (tok[0] == "format") {
            if (tok.size() < 2 || tok[1] != "ascii")
                fail(name, line, "only ASCII PLY is supported");
            ascii = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3)
                fail(name, line, "malformed element line");
            const long long n = parse_int(tok[2], name, line);
            if (n < 0)
                fail(name, line, "negative element count");
            elements.push_back(Element{tok[1], static_cast<std::size_t>(n), {}, false});
        } else if (tok[0] == "property") {
            if (elements.empty())
                fail(name, line, "property before any element");
            if (tok.size() >= 2 && tok[1] == "list")
                elements.back().list = true;
            elements.back().props.push_back(tok.back());
        } else if (tok[0] == "end_header") {
            header_done = true;
            break;
        } else {
            fail(name, line, "unexpected header line '" + tok[0] + "'");
        }
    }
    if (!header_done || !ascii)
        fail(name, line, "incomplete PLY header");

    std::vector<Vec3> verts;
    std::vector<std::array<Index, 3>> tris;
    for (const Element& el : elements) {
        int ix = -1, iy = -1, iz = -1;
        for (int p = 0; p < static_cast<int>(el.props.size()); ++p) {
            if (el.props[p] == "x")
                ix = p;
            if (el.props[p] == "y")
                iy = p;
            if (el.props[p] == "z")
                iz = p;
        }
        for (std::size_t r = 0; r < el.count; ++r) {
            if (!std::getline(in, raw))
                fail(name, line, "unexpected end of file in element '" + el.name + "'");
            ++line;
            const auto tok = split_tokens(raw);
            if (el.name == "vertex") {
                if (ix < 0 || iy < 0 || iz < 0)
                    fail(name, line, "vertex element lacks x, y, z");
                if (tok.size() < el.props.size())
                    fail(name, line, "vertex has too few values");
                verts.emplace_back(parse_double(tok[ix], name, line), parse_double(tok[iy], name, line),
                                   parse_double(tok[iz], name, line));
            } else if (el.name == "face") {
                if (tok.empty())
                    fail(name, line, "empty face line");
                const long long k = parse_int(tok[0], name, line);
                if (k < 3 || static_cast<std::size_t>(k) + 1 > tok.size())
                    fail(name, line, "malformed face");
                std::vector<Index> poly;
                for (long long i = 1; i <= k; ++i)
                    poly.push_back(parse_index(tok[i], name, line));
                for (std::size_t i = 1; i + 1 < poly.size(); ++i)
                    tris.push_back({poly[0], poly[i], poly[i + 1]});
            }
        }
    }
    for (const auto& t : tris)
        for (Index v : t)
            if (v >= verts.size())
                throw Error(name + ": face index " + std::to_string(v) + " out of range");
    return validated(name, [&] { return make_shape_3d(std::move(verts), std::move(tris)); });
}

BoundaryShape parse_csv(std::istream& in, const std::string& name)
{
    std::vector<Vec3> loop;
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        std::string s = strip_comment(raw);
        if (s.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::replace(s.begin(), s.end(), ',', ' ');
        const auto tok = split_tokens(s);
        if (tok.size() != 2)
            fail(name, line, "expected 'x,y'");
        loop.emplace_back(parse_double(tok[0], name, line), parse_double(tok[1], name, line), 0.0);
    }
    return validated(name, [&] { return make_shape_2d(std::move(loop)); });
}

BoundaryShape read_shape(const std::string& path)
{
    auto in = open_in(path);
    const std::string ext = lower_extension(path);
    if (ext == "obj")
        return parse_obj(in, path);
    if (ext == "ply")
        return parse_ply(in, path);
    if (ext == "csv")
        return parse_csv(in, path);
    throw Error(path + ": unsupported shape format (expected .obj, .ply or .csv)");
}

void write_mesh(const std::string& path, const TriangleMesh& mesh)
{
    const std::string ext = lower_extension(path);
    if (ext != "obj" && ext != "ply")
        throw Error(path + ": unsupported mesh format (expected .obj or .ply)");
    auto out = open_out(path);
    if (ext == "obj")
        write_obj(out, mesh);
    else
        write_ply(out, mesh);
}

void write_polyline(const std::string& path, const Polyline& lines)
{
    auto out = open_out(path);
    for (const Vec3& v : lines.vertices)
        out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    for (const auto& s : lines.segments)
        out << "l " << s[0] + 1 << ' ' << s[1] + 1 << '\n';
}

void write_shape(const std::string& path, const BoundaryShape& shape)
{
    if (shape.dim == 3) {
        write_mesh(path, TriangleMesh{shape.vertices, shape.triangles});
        return;
    }
    if (lower_extension(path) != "csv")
        throw Error(path + ": 2D shapes are written as .csv");
    // Walk the loop from vertex 0 following the segments.
    std::vector<Index> next(shape.vertices.size(), kInvalidIndex);
    for (const auto& s : shape.segments)
        next[s[0]] = s[1];
    auto out = open_out(path);
    Index v = 0;
    for (std::size_t i = 0; i < shape.vertices.size(); ++i) {
        out << format_double(shape.vertices[v].x()) << ',' << format_double(shape.vertices[v].y()) << '\n';
        v = next[v];
        if (v == 0 || v == kInvalidIndex)
            break;
    }
}

MedialComplex parse_mma(std::istream& in, const std::string& name, std::optional<SampleInfo>* info)
{
    std::string raw;
    std::size_t line = 0;
    int dim = 0;
    std::vector<MedialVertex> verts;
    std::vector<EdgeVerts> edges;
    std::vector<FaceVerts> faces;
    std::vector<std::pair<std::size_t, Index>> refs; // (line, vertex id) to range-check
    std::vector<std::pair<Index, std::vector<Index>>> tangency;
    std::vector<std::size_t> tangency_lines;
    std::optional<SampleInfo> samples;
    while (std::getline(in, raw)) {
        ++line;
        const auto tok = split_tokens(strip_comment(raw));
        if (tok.empty())
            continue;
        if (dim == 0) {
            if (tok.size() != 2 || tok[0] != "MMA")
                fail(name, line, "expected 'MMA <D>' header");
            const long long d = parse_int(tok[1], name, line);
            if (d != 2 && d != 3)
                fail(name, line, "dimension must be 2 or 3");
            dim = static_cast<int>(d);
            continue;
        }
        const std::string& kind = tok[0];
        if (kind == "v") {
            if (tok.size() != static_cast<std::size_t>(dim) + 2)
                fail(name, line, "vertex needs " + std::to_string(dim) + " coordinates and a radius");
            MedialVertex v;
            for (int a = 0; a < dim; ++a)
                v.position[a] = parse_double(tok[1 + a], name, line);
            v.radius = parse_double(tok[1 + dim], name, line);
            if (v.radius < 0.0)
                fail(name, line, "negative radius");
            verts.push_back(v);
        } else if (kind == "e") {
            if (tok.size() != 3)
                fail(name, line, "edge needs two vertex ids");
            edges.push_back({parse_index(tok[1], name, line), parse_index(tok[2], name, line)});
            for (Index v : edges.back())
                refs.emplace_back(line, v);
        } else if (kind == "f") {
            if (dim == 2)
                fail(name, line, "faces are not allowed in a 2D file");
            if (tok.size() != 4)
                fail(name, line, "face needs three vertex ids");
            faces.push_back(
                {parse_index(tok[1], name, line), parse_index(tok[2], name, line), parse_index(tok[3], name, line)});
            for (Index v : faces.back())
                refs.emplace_back(line, v);
        } else if (kind == "t") {
            if (tok.size() < 2)
                fail(name, line, "tangency record needs a vertex id");
            std::vector<Index> ids;
            for (std::size_t i = 2; i < tok.size(); ++i)
                ids.push_back(parse_index(tok[i], name, line));
            tangency.emplace_back(parse_index(tok[1], name, line), std::move(ids));
            tangency_lines.push_back(line);
            refs.emplace_back(line, tangency.back().first);
        } else if (kind == "s") {
            if (tok.size() != 3)
                fail(name, line, "sample record needs a count and a seed");
            const long long n = parse_int(tok[1], name, line);
            const long long seed = parse_int(tok[2], name, line);
            if (n < 0 || seed < 0)
                fail(name, line, "sample count and seed must be non-negative");
            samples = SampleInfo{static_cast<std::size_t>(n), static_cast<std::uint64_t>(seed)};
        } else {
            fail(name, line, "unknown record '" + kind + "'");
        }
    }
    if (dim == 0)
        throw Error(name + ": missing 'MMA <D>' header");
    for (auto [l, v] : refs)
        if (v >= verts.size())
            fail(name, l, "vertex id " + std::to_string(v) + " out of range");
    for (auto& [v, ids] : tangency)
        verts[v].tangency_ids = std::move(ids);
    if (info)
        *info = samples;
    try {
        return build_complex(dim, std::move(verts), edges, faces);
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
}

MedialComplex read_mma(const std::string& path, std::optional<SampleInfo>* info)
{
    auto in = open_in(path);
    return parse_mma(in, path, info);
}

std::string format_mma(const MedialComplex& input, const std::optional<SampleInfo>& info)
{
    const MedialComplex c = input.compacted();
    std::ostringstream out;
    out << "MMA " << c.dim() << '\n';
    if (info)
        out << "s " << info->count << ' ' << info->seed << '\n';
    for (Index v = 0; v < c.num_vertices(); ++v) {
        const auto& mv = c.vertex(v);
        out << 'v';
        for (int a = 0; a < c.dim(); ++a)
            out << ' ' << format_double(mv.position[a]);
        out << ' ' << format_double(mv.radius) << '\n';
    }
    std::vector<EdgeVerts> edges;
    for (Index e : c.live_edges()) {
        EdgeVerts ev = c.edge(e);
        std::sort(ev.begin(), ev.end());
        edges.push_back(ev);
    }
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges)
        out << "e " << e[0] << ' ' << e[1] << '\n';
    std::vector<FaceVerts> faces;
    for (Index f : c.live_faces()) {
        FaceVerts fv = c.face(f);
        std::sort(fv.begin(), fv.end());
        faces.push_back(fv);
    }
    std::sort(faces.begin(), faces.end());
    for (const auto& f : faces)
        out << "f " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    for (Index v = 0; v < c.num_vertices(); ++v) {
        const auto& ids = c.vertex(v).tangency_ids;
        if (ids.empty())
            continue;
        out << "t " << v;
        for (Index i : ids)
            out << ' ' << i;
        out << '\n';
    }
    return out.str();
}

void write_mma(const std::string& path, const MedialComplex& c, const std::optional<SampleInfo>& info)
{
    auto out = open_out(path);
    out << format_mma(c, info);
}

std::string report_json(const SimplifyReport* s, const ErrorReport* e)
{
    using nlohmann::json;
    json doc = json::object();
    // Non-finite values (an absent cap) become null.
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : json(nullptr); };
    auto idx = [](Index i) { return i == kInvalidIndex ? json(nullptr) : json(i); };
    if (s) {
        doc["simplify"] = {
            {"initial_vertices", s->initial_vertices},
            {"initial_edges", s->initial_edges},
            {"initial_faces", s->initial_faces},
            {"initial_primitives", s->initial_primitives},
            {"final_vertices", s->final_vertices},
            {"final_edges", s->final_edges},
            {"final_faces", s->final_faces},
            {"final_primitives", s->final_primitives},
            {"contractions", s->contractions},
            {"stale_pops", s->stale_pops},
            {"ligature_vetoes", s->ligature_vetoes},
            {"coverage_rejections", s->coverage_rejections},
            {"frozen_vertices", s->frozen_vertices},
            {"global_sweeps", s->global_sweeps},
            {"epsilon", num(s->epsilon)},
            {"lfs_cap", num(s->lfs_cap)},
            {"effective_epsilon", num(s->effective_epsilon)},
            {"measured_error", num(s->measured_error)},
            {"argmax_sample", idx(s->argmax_sample)},
            {"wall_seconds", num(s->wall_seconds)},
            {"stop_reason", s->stop_reason},
        };
    }
    if (e) {
        doc["error"] = {
            {"one_sided_in_to_env", num(e->one_sided_in_to_env)},
            {"one_sided_env_to_in", opt(e->one_sided_env_to_in)},
            {"symmetric", opt(e->symmetric)},
            {"diag", num(e->diag)},
            {"normalized_in_to_env", num(e->normalized_in_to_env)},
            {"normalized_env_to_in", opt(e->normalized_env_to_in)},
            {"normalized_symmetric", opt(e->normalized_symmetric)},
            {"n_samples", e->n_samples},
            {"argmax_sample", idx(e->argmax_sample)},
            {"envelope_points", e->envelope_points},
            {"projection_failures", e->projection_failures},
            {"projection_flagged", e->projection_flagged},
        };
    }
    return doc.dump(2) + "\n";
}

void write_report(const std::string& path, const SimplifyReport* simplify, const ErrorReport* error)
{
    auto out = open_out(path);
    out << report_json(simplify, error);
}

} // namespace medial
