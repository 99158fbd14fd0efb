#pragma once

// Core data model: prime-field scalars, compressed bigrades, lazily merged
// sparse columns, and the bifiltered boundary matrix they assemble into.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpchunk {

using index_t = std::int64_t;
using coefficient_t = std::int64_t;
using dim_t = std::int32_t;

inline constexpr index_t no_index = -1;

bool is_prime(coefficient_t n);

// Arithmetic in F_p. Scalars are kept in the canonical range [0, p).
struct field_t {
    coefficient_t p = 2;

    field_t() = default;
    explicit field_t(coefficient_t characteristic);

    coefficient_t normalize(coefficient_t a) const {
        a %= p;
        return a < 0 ? a + p : a;
    }
    coefficient_t add(coefficient_t a, coefficient_t b) const { return (a + b) % p; }
    coefficient_t sub(coefficient_t a, coefficient_t b) const { return normalize(a - b); }
    coefficient_t mul(coefficient_t a, coefficient_t b) const { return (a * b) % p; }
    coefficient_t neg(coefficient_t a) const { return a == 0 ? 0 : p - a; }
    coefficient_t inv(coefficient_t a) const;

    friend bool operator==(const field_t&, const field_t&) = default;
};

// A filtration value after coordinate compression: integer ranks that are
// order-isomorphic to the raw coordinates. The raw decimal spellings live in
// the per-axis tables of the owning complex, keyed by rank.
struct grade_t {
    std::int32_t x = 0;
    std::int32_t y = 0;

    friend bool operator==(const grade_t&, const grade_t&) = default;
};

inline bool grade_leq(grade_t p, grade_t q) { return p.x <= q.x && p.y <= q.y; }
inline bool grade_lt(grade_t p, grade_t q) { return grade_leq(p, q) && p != q; }
inline grade_t grade_lub(grade_t p, grade_t q) {
    return {p.x > q.x ? p.x : q.x, p.y > q.y ? p.y : q.y};
}
// (x, then y) — the linear extension used for the column order.
inline bool grade_lex_less(grade_t a, grade_t b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
}

struct entry_t {
    index_t index = no_index;
    coefficient_t coeff = 0;

    friend bool operator==(const entry_t&, const entry_t&) = default;
};

// Sparse boundary container. Two states:
//  - canonical: entries sorted by ascending index, unique indices, nonzero
//    coefficients — the serialized form;
//  - heap: max-heap on index with duplicate indices allowed; the coefficient
//    of an index is the sum of its entries mod p. Additions push lazily and
//    cancellation is deferred to pop/canonicalize.
class sparse_column {
public:
    sparse_column() = default;
    sparse_column(std::vector<entry_t> entries, const field_t& f);

    bool canonical() const { return canonical_; }
    const std::vector<entry_t>& entries() const;
    std::vector<entry_t>& mutable_entries();

    // Canonical-form lookup; 0 when the index is absent.
    coefficient_t coeff_at(index_t i) const;

    // c <- c + lambda * src, src canonical. Lazy: entries are pushed, not merged.
    void push_scaled(std::span<const entry_t> src, coefficient_t lambda, const field_t& f);
    void push(entry_t e, const field_t& f);

    // Extract the entry of maximal index with nonzero net coefficient.
    // Returns {no_index, 0} when the column is (effectively) empty.
    entry_t pop_max(const field_t& f);
    // Same, but the entry stays in the column.
    entry_t peek_max(const field_t& f);

    void canonicalize(const field_t& f);
    void clear() { data_.clear(); canonical_ = true; }
    std::size_t stored_entries() const { return data_.size(); }

private:
    void ensure_heap();

    std::vector<entry_t> data_;
    bool canonical_ = true;
};

struct column_t {
    grade_t grade;
    dim_t dim = 0;
    sparse_column boundary;
};

// Ordered column collection. Invariants (checked by ingest::validate):
// indices 0..n-1 in an order extending the product order on grades, equal
// grades contiguous (chunks), dimensions ascending within a chunk, entry
// indices strictly below their column, dd = 0 over the field.
struct bifiltered_complex {
    field_t field;
    std::vector<column_t> columns;
    std::vector<index_t> chunk_starts;          // first column of each chunk
    std::vector<std::string> x_values;          // x rank -> raw coordinate text
    std::vector<std::string> y_values;

    index_t size() const { return static_cast<index_t>(columns.size()); }
    dim_t max_dim() const;

    // First index of the chunk containing column i.
    index_t chunk_start_of(index_t i) const;
    void recompute_chunks();
};

enum class label_t : std::uint8_t { unlabeled, global, local_positive, local_negative };

struct labeling_t {
    std::vector<label_t> tags;
    std::vector<index_t> pair_of;  // involution on local columns, no_index elsewhere
};

struct reduction_stats {
    index_t n = 0;               // input generators
    index_t m = 0;               // chunks
    index_t ell = 0;             // max chunk size
    index_t g = 0;               // global columns
    std::uint64_t additions_phase1 = 0;
    std::uint64_t additions_phase2 = 0;
    std::uint64_t additions_to_positive = 0;  // clearing guarantees this stays 0
    std::uint64_t peak_column_entries = 0;    // largest working column seen
    double t_phase1 = 0.0;
    double t_phase2 = 0.0;
    double t_phase3 = 0.0;

    std::uint64_t column_additions() const { return additions_phase1 + additions_phase2; }
    double t_total() const { return t_phase1 + t_phase2 + t_phase3; }
};

// Sort by index, fold duplicates mod p, drop zeros.
void canonicalize_entries(std::vector<entry_t>& entries, const field_t& f);

// a + lambda * b for canonical entry vectors; canonical result.
std::vector<entry_t> merge_scaled(std::span<const entry_t> a, std::span<const entry_t> b,
                                  coefficient_t lambda, const field_t& f);

// Numeric interpretation of a raw coordinate string; rejects anything that
// is not a plain finite decimal.
double parse_coordinate(const std::string& text);

// Maximal boundary-entry index whose column has the same grade as c, if any.
std::optional<index_t> local_pivot(const column_t& c, const bifiltered_complex& complex);

// target <- target + lambda * source, canonical result. Grades and dimension
// of target are unchanged; dimensions must agree.
void add_scaled(column_t& target, const column_t& source, coefficient_t lambda,
                const field_t& f);

}  // namespace mpchunk
