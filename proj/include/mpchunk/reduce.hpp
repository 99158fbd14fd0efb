#pragma once

// The chunk algorithm: per-chunk local reduction with clearing, compression
// of global columns, and removal of local pairs — plus the two elementary
// homotopy-preserving operations the correctness argument decomposes into.

#include <utility>

#include "mpchunk/core.hpp"

namespace mpchunk {

// One maximal block of equal-grade columns.
struct chunk_view {
    index_t begin = 0;
    index_t end = 0;
};

std::vector<chunk_view> chunk_views(const bifiltered_complex& complex);

// Phase I. Labels every column; column additions stay within a chunk and the
// traversal runs top dimension down so that local positive columns are never
// reduced (clearing). Chunks are processed independently, `threads` at a time.
labeling_t phase1_local_reduction(bifiltered_complex& complex, reduction_stats* stats = nullptr,
                                  unsigned threads = 1);

// Phase II. Rewrites every global column so its boundary is supported on
// global columns only. Local columns are read-only after Phase I. With
// keep_local_negative_entries the variant used by modified_chunk_reduce is
// selected: local negative entries stay in place.
void phase2_compress(bifiltered_complex& complex, const labeling_t& labels,
                     reduction_stats* stats = nullptr, unsigned threads = 1,
                     bool keep_local_negative_entries = false);

// Phase III. Keeps exactly the global columns, densely reindexed.
bifiltered_complex phase3_remove(const bifiltered_complex& complex, const labeling_t& labels);

// The full pipeline. Validates the input, then Phase I-III. Output is
// byte-identical for every thread count. threads == 0 picks the hardware
// concurrency.
std::pair<bifiltered_complex, reduction_stats> chunk_reduce(bifiltered_complex complex,
                                                            unsigned threads = 0);

// Basis change c_{i2} <- c_{i2} + lambda * c_{i1} for equal-dimension columns
// with grade(i1) <= grade(i2): the boundary of i2 gains lambda * boundary(i1)
// and every higher column's entry at i2 induces the compensating change at i1.
void order_preserving_addition(bifiltered_complex& complex, index_t i1, index_t i2,
                               coefficient_t lambda);

// Removal of the pair (i1, i2): dim(i2) == dim(i1) + 1, equal grades, and i1
// carried in the boundary of i2 with a nonzero coefficient. Both columns are
// deleted and indices compacted.
void remove_local_pair(bifiltered_complex& complex, index_t i1, index_t i2);

// Same output as chunk_reduce, computed as a sequence of order-preserving
// additions followed by local-pair removals. Single-threaded reference.
bifiltered_complex modified_chunk_reduce(bifiltered_complex complex);

}  // namespace mpchunk
