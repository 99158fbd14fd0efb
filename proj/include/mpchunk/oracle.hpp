#pragma once

// Reference computations the fast path is measured against: one-parameter
// matrix reduction, Betti numbers of sublevel complexes, the delta/gamma
// counters, and whole-invariant comparison of two complexes. Everything is
// dense-order, single-threaded and deliberately unclever.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "mpchunk/core.hpp"

namespace mpchunk::oracle {

struct reduced_matrix {
    std::vector<std::vector<entry_t>> columns;  // canonical, fully reduced
    std::vector<index_t> lowest;                // max row index per column, no_index if zero
};

// Left-to-right elimination of a strictly upper triangular matrix; each
// nonzero reduced column ends with a unique lowest index.
reduced_matrix standard_reduce(std::vector<std::vector<entry_t>> columns, const field_t& f);

struct grade_grid {
    std::vector<std::int32_t> xs, ys;  // sorted distinct ranks present among columns

    bool contains(grade_t p) const;
};

grade_grid make_grid(const bifiltered_complex& complex);
// Number of ordered pairs p <= q on the product grid (p = q included).
std::size_t comparable_pair_count(const grade_grid& grid);

inline constexpr std::size_t grid_pair_guard = 10000;

struct grid_too_large : std::runtime_error {
    explicit grid_too_large(std::size_t pairs)
        : std::runtime_error("grade grid has " + std::to_string(pairs) +
                             " comparable pairs (guard: " + std::to_string(grid_pair_guard) +
                             "); pass force to override"),
          comparable_pairs(pairs) {}
    std::size_t comparable_pairs;
};

// Betti number of the sublevel complex at p.
index_t betti(const bifiltered_complex& complex, grade_t p, dim_t k);

// dim ker eta_{k-1} + dim coker eta_k for the inclusion of the strict
// down-set complex into the sublevel complex at p; p must be on the grid.
index_t delta(const bifiltered_complex& complex, grade_t p, dim_t k);

// Number of k-columns with grade exactly p.
index_t gamma(const bifiltered_complex& complex, grade_t p, dim_t k);

struct rank_invariant {
    // (x, y, k) -> Betti number at that grid point
    std::map<std::tuple<std::int32_t, std::int32_t, dim_t>, index_t> betti;
    // (px, py, qx, qy, k) -> rank of H_k(C^p) -> H_k(C^q), p < q on the grid
    std::map<std::tuple<std::int32_t, std::int32_t, std::int32_t, std::int32_t, dim_t>, index_t>
        ranks;
};

rank_invariant compute_rank_invariant(const bifiltered_complex& complex, bool force = false);

struct rank_mismatch {
    double px = 0, py = 0, qx = 0, qy = 0;  // raw coordinates; p == q for Betti entries
    dim_t k = 0;
    index_t lhs = 0, rhs = 0;
    bool is_betti = false;
};

struct equivalence_report {
    bool ok = false;
    bool skipped_large_grid = false;
    std::size_t comparable_pairs = 0;
    std::vector<rank_mismatch> mismatches;
};

// Compares Betti numbers and all inclusion-map ranks of the two complexes
// over the product grid of the union of their critical coordinate values.
equivalence_report check_equivalence(const bifiltered_complex& lhs,
                                     const bifiltered_complex& rhs, bool force = false);

struct optimality_violation {
    double x = 0, y = 0;
    dim_t k = 0;
    index_t delta_value = 0, gamma_value = 0;
};

struct optimality_report {
    bool ok = false;
    bool skipped_large_grid = false;
    std::size_t comparable_pairs = 0;
    std::vector<optimality_violation> violations;
};

// Checks gamma(reduced, p, k) == delta(original, p, k) over the union grid.
optimality_report check_optimality(const bifiltered_complex& original,
                                   const bifiltered_complex& reduced, bool force = false);

}  // namespace mpchunk::oracle
