#pragma once

#include "medial/complex.hpp"
#include "medial/metrics.hpp"
#include "medial/reconstruct.hpp"
#include "medial/shape.hpp"
#include "medial/simplify.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace medial {

/// Reads an ASCII OBJ or PLY surface, or a CSV loop of "x,y" lines, chosen by
/// extension. Parse errors carry the file name and line number; geometric
/// validation errors (open surface, bad orientation) name the edge.
BoundaryShape read_shape(const std::string& path);
BoundaryShape parse_obj(std::istream& in, const std::string& name = "<obj>");
BoundaryShape parse_ply(std::istream& in, const std::string& name = "<ply>");
BoundaryShape parse_csv(std::istream& in, const std::string& name = "<csv>");

/// ASCII OBJ or PLY by extension.
void write_mesh(const std::string& path, const TriangleMesh& mesh);
/// OBJ with "l" records.
void write_polyline(const std::string& path, const Polyline& lines);
/// 3D shapes as OBJ/PLY, 2D loops as CSV.
void write_shape(const std::string& path, const BoundaryShape& shape);

/// How the boundary samples behind a complex were drawn, so that tangency
/// ids can be matched to regenerated samples.
struct SampleInfo {
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

/// Medial mesh text format:
///   MMA <D>
///   v x y [z] r     vertices, ids implicit from 0
///   e i j
///   f i j k         only when D = 3
///   t i s0 s1 ...   tangency sample ids of vertex i (optional)
///   s n seed        sample provenance (optional)
/// '#' starts a comment. The writer emits vertices in id order, simplices
/// lexicographically and numbers in shortest round-trip form.
MedialComplex read_mma(const std::string& path, std::optional<SampleInfo>* info = nullptr);
MedialComplex parse_mma(std::istream& in, const std::string& name = "<mma>",
                        std::optional<SampleInfo>* info = nullptr);
void write_mma(const std::string& path, const MedialComplex& c, const std::optional<SampleInfo>& info = std::nullopt);
std::string format_mma(const MedialComplex& c, const std::optional<SampleInfo>& info = std::nullopt);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// JSON document with the fields of the given reports.
std::string report_json(const SimplifyReport* simplify, const ErrorReport* error);
void write_report(const std::string& path, const SimplifyReport* simplify, const ErrorReport* error);

} // namespace medial
