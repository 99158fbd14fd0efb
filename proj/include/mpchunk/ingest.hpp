#pragma once

// Input handling: the native text formats, OFF meshes, normalization into a
// bifiltered_complex, structural validation, and expansion of multi-critical
// inputs into 1-critical ones.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpchunk/core.hpp"

namespace mpchunk::ingest {

struct parse_error : std::runtime_error {
    parse_error(const std::string& msg, int line_number)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + msg),
          line(line_number) {}
    int line;
};

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One generator as it appears in the input sequence; boundary refers to
// earlier positions of the same sequence.
struct raw_generator {
    std::string x, y;  // raw decimal text
    dim_t dim = 0;
    std::vector<entry_t> boundary;  // index = input position
};

struct multicritical_generator {
    dim_t dim = 0;
    std::vector<std::array<std::string, 2>> critical_grades;  // pairwise incomparable
    std::vector<entry_t> boundary;
};

enum class violation_kind {
    boundary_square,
    grade_monotone,
    order_violation,
    dim_mismatch,
    bad_coefficient,
};

const char* violation_kind_name(violation_kind kind);

struct violation_t {
    violation_kind kind;
    index_t column;
    std::string detail;
};

struct validation_report {
    bool ok = false;
    std::vector<violation_t> violations;
};

enum class input_format { native, multicritical, off };

// Peeks at the first meaningful line to decide the format; the stream is
// rewound afterwards.
input_format detect_format(std::istream& in);

std::pair<std::vector<raw_generator>, field_t> parse_native(
    std::istream& in, std::optional<coefficient_t> field_override = std::nullopt);

std::pair<std::vector<multicritical_generator>, field_t> parse_multicritical(
    std::istream& in, std::optional<coefficient_t> field_override = std::nullopt);

// Permutes generators into the canonical order (grade lexicographic, then
// dimension, then input position), compresses coordinates to ranks, and
// remaps boundary references. Grade monotonicity violations throw.
bifiltered_complex sort_and_index(const std::vector<raw_generator>& raw, const field_t& field);

// Structural checks; violations are returned, never thrown.
validation_report validate(const bifiltered_complex& complex);

// Replaces each h-critical generator by h copies plus connecting generators;
// the result is 1-critical and has the same homology at every grade.
std::vector<raw_generator> expand_h_critical(const std::vector<multicritical_generator>& gens,
                                             const field_t& field);

struct mesh_t {
    std::vector<std::array<std::string, 2>> vertex_filtration;  // raw (x, y) per vertex
    std::vector<std::vector<index_t>> faces;                    // simplices by vertex id
};

// OFF-style input; the filtration values are the x and y vertex coordinates.
mesh_t parse_off(std::istream& in);

// Full simplex census of the mesh (implicit faces included, each exactly
// once), graded by the coordinate-wise max over vertices.
std::vector<raw_generator> mesh_bifiltration(const mesh_t& mesh, const field_t& field);

void write_native(const bifiltered_complex& complex, std::ostream& out);
std::string to_native(const bifiltered_complex& complex);

// Convenience: detect, parse, expand/triangulate as needed, sort_and_index.
bifiltered_complex load_any(std::istream& in, std::optional<coefficient_t> field_override = std::nullopt);

}  // namespace mpchunk::ingest
