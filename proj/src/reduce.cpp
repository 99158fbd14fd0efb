#include "mpchunk/reduce.hpp"

#include <atomic>
#include <cassert>
#include <chrono>
#include <mutex>
#include <thread>

#include "mpchunk/ingest.hpp"

namespace mpchunk {

namespace {

using clock_t_ = std::chrono::steady_clock;

double seconds_since(clock_t_::time_point start) {
    return std::chrono::duration<double>(clock_t_::now() - start).count();
}

unsigned resolve_threads(unsigned threads) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    return threads == 0 ? 1 : threads;
}

// Static-free work distribution over an index range; the tasks own disjoint
// data, so scheduling cannot influence the result.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void atomic_max(std::atomic<std::uint64_t>& target, std::uint64_t value) {
    std::uint64_t seen = target.load();
    while (seen < value && !target.compare_exchange_weak(seen, value)) {
    }
}

void require(bool condition, const char* message) {
    if (!condition) throw std::invalid_argument(message);
}

void add_entry(sparse_column& column, index_t index, coefficient_t coeff, const field_t& f) {
    entry_t e{index, f.normalize(coeff)};
    if (e.coeff == 0) return;
    std::vector<entry_t> single{e};
    column = sparse_column(merge_scaled(column.entries(), single, 1, f), f);
}

}  // namespace

std::vector<chunk_view> chunk_views(const bifiltered_complex& complex) {
    std::vector<chunk_view> views;
    views.reserve(complex.chunk_starts.size());
    for (std::size_t c = 0; c < complex.chunk_starts.size(); ++c) {
        index_t begin = complex.chunk_starts[c];
        index_t end = c + 1 < complex.chunk_starts.size() ? complex.chunk_starts[c + 1]
                                                          : complex.size();
        views.push_back({begin, end});
    }
    return views;
}

labeling_t phase1_local_reduction(bifiltered_complex& complex, reduction_stats* stats,
                                  unsigned threads) {
    const field_t f = complex.field;
    const index_t n = complex.size();
    labeling_t labels;
    labels.tags.assign(static_cast<std::size_t>(n), label_t::unlabeled);
    labels.pair_of.assign(static_cast<std::size_t>(n), no_index);

    std::vector<chunk_view> chunks = chunk_views(complex);
    std::atomic<std::uint64_t> additions{0};
    std::atomic<std::uint64_t> positive_targets{0};
    std::atomic<std::uint64_t> peak{0};

    parallel_for(chunks.size(), threads, [&](std::size_t ci) {
        const chunk_view chunk = chunks[ci];
        std::uint64_t local_additions = 0;
        std::uint64_t local_positive_targets = 0;
        std::uint64_t local_peak = 0;

        // dimensions ascend within the chunk; process the blocks in reverse
        std::vector<std::pair<index_t, index_t>> blocks;
        for (index_t i = chunk.begin; i < chunk.end;) {
            index_t j = i;
            while (j < chunk.end && complex.columns[static_cast<std::size_t>(j)].dim ==
                                        complex.columns[static_cast<std::size_t>(i)].dim)
                ++j;
            blocks.push_back({i, j});
            i = j;
        }

        // per-dimension local pivot table: pivot index -> claiming column
        std::vector<index_t> owner(static_cast<std::size_t>(chunk.end - chunk.begin), no_index);
        for (auto block = blocks.rbegin(); block != blocks.rend(); ++block) {
            std::fill(owner.begin(), owner.end(), no_index);
            for (index_t i = block->first; i < block->second; ++i) {
                if (labels.tags[static_cast<std::size_t>(i)] != label_t::unlabeled)
                    continue;  // clearing: local positives are never reduced
                column_t& col = complex.columns[static_cast<std::size_t>(i)];
                for (;;) {
                    entry_t pivot = col.boundary.peek_max(f);
                    if (pivot.index == no_index || pivot.index < chunk.begin) {
                        labels.tags[static_cast<std::size_t>(i)] = label_t::global;
                        break;
                    }
                    index_t claimant = owner[static_cast<std::size_t>(pivot.index - chunk.begin)];
                    if (claimant == no_index) {
                        owner[static_cast<std::size_t>(pivot.index - chunk.begin)] = i;
                        labels.tags[static_cast<std::size_t>(i)] = label_t::local_negative;
                        labels.tags[static_cast<std::size_t>(pivot.index)] = label_t::local_positive;
                        labels.pair_of[static_cast<std::size_t>(i)] = pivot.index;
                        labels.pair_of[static_cast<std::size_t>(pivot.index)] = i;
                        break;
                    }
                    const sparse_column& src =
                        complex.columns[static_cast<std::size_t>(claimant)].boundary;
                    coefficient_t lambda =
                        f.neg(f.mul(pivot.coeff, f.inv(src.entries().back().coeff)));
                    if (labels.tags[static_cast<std::size_t>(i)] == label_t::local_positive)
                        ++local_positive_targets;
                    col.boundary.push_scaled(src.entries(), lambda, f);
                    ++local_additions;
                }
                local_peak = std::max<std::uint64_t>(local_peak, col.boundary.stored_entries());
                col.boundary.canonicalize(f);
            }
        }
        additions.fetch_add(local_additions);
        positive_targets.fetch_add(local_positive_targets);
        atomic_max(peak, local_peak);
    });

    if (stats) {
        stats->additions_phase1 += additions.load();
        stats->additions_to_positive += positive_targets.load();
        stats->peak_column_entries = std::max(stats->peak_column_entries, peak.load());
    }
    return labels;
}

void phase2_compress(bifiltered_complex& complex, const labeling_t& labels,
                     reduction_stats* stats, unsigned threads,
                     bool keep_local_negative_entries) {
    const field_t f = complex.field;
    std::vector<index_t> globals;
    for (index_t i = 0; i < complex.size(); ++i)
        if (labels.tags[static_cast<std::size_t>(i)] == label_t::global) globals.push_back(i);

    std::atomic<std::uint64_t> additions{0};
    std::atomic<std::uint64_t> peak{0};

    parallel_for(globals.size(), threads, [&](std::size_t gi) {
        column_t& col = complex.columns[static_cast<std::size_t>(globals[gi])];
        std::uint64_t local_additions = 0;
        std::uint64_t local_peak = col.boundary.stored_entries();
        std::vector<entry_t> kept;  // collected in strictly descending index order
        for (;;) {
            entry_t e = col.boundary.pop_max(f);
            if (e.index == no_index) break;
            switch (labels.tags[static_cast<std::size_t>(e.index)]) {
                case label_t::global:
                    kept.push_back(e);
                    break;
                case label_t::local_negative:
                    if (keep_local_negative_entries) kept.push_back(e);
                    break;
                case label_t::local_positive: {
                    index_t partner = labels.pair_of[static_cast<std::size_t>(e.index)];
                    const auto& src =
                        complex.columns[static_cast<std::size_t>(partner)].boundary.entries();
                    // src.back() is the partner's local pivot, the entry being
                    // cancelled; it is already popped from this column.
                    if (src.empty() || src.back().index != e.index)
                        throw std::logic_error("phase2_compress: stale local pair");
                    coefficient_t lambda = f.neg(f.mul(e.coeff, f.inv(src.back().coeff)));
                    col.boundary.push_scaled({src.data(), src.size() - 1}, lambda, f);
                    ++local_additions;
                    local_peak = std::max<std::uint64_t>(
                        local_peak, col.boundary.stored_entries() + kept.size());
                    break;
                }
                case label_t::unlabeled:
                    throw std::logic_error("phase2_compress: unlabeled column in boundary");
            }
        }
        std::reverse(kept.begin(), kept.end());
        col.boundary = sparse_column(std::move(kept), f);
        additions.fetch_add(local_additions);
        atomic_max(peak, local_peak);
    });

    if (stats) {
        stats->additions_phase2 += additions.load();
        stats->peak_column_entries = std::max(stats->peak_column_entries, peak.load());
    }
}

bifiltered_complex phase3_remove(const bifiltered_complex& complex, const labeling_t& labels) {
    const field_t f = complex.field;
    std::vector<index_t> remap(static_cast<std::size_t>(complex.size()), no_index);
    index_t g = 0;
    for (index_t i = 0; i < complex.size(); ++i)
        if (labels.tags[static_cast<std::size_t>(i)] == label_t::global)
            remap[static_cast<std::size_t>(i)] = g++;

    bifiltered_complex out;
    out.field = f;
    out.x_values = complex.x_values;
    out.y_values = complex.y_values;
    out.columns.reserve(static_cast<std::size_t>(g));
    for (index_t i = 0; i < complex.size(); ++i) {
        if (remap[static_cast<std::size_t>(i)] == no_index) continue;
        const column_t& src = complex.columns[static_cast<std::size_t>(i)];
        column_t col;
        col.grade = src.grade;
        col.dim = src.dim;
        std::vector<entry_t> entries;
        entries.reserve(src.boundary.entries().size());
        for (const entry_t& e : src.boundary.entries()) {
            index_t r = remap[static_cast<std::size_t>(e.index)];
            if (r == no_index)
                throw std::logic_error("phase3_remove: global column references a local column");
            entries.push_back({r, e.coeff});
        }
        col.boundary = sparse_column(std::move(entries), f);
        out.columns.push_back(std::move(col));
    }
    out.recompute_chunks();
    return out;
}

namespace {

void validate_or_throw(const bifiltered_complex& complex) {
    ingest::validation_report report = ingest::validate(complex);
    if (report.ok) return;
    const auto& v = report.violations.front();
    throw ingest::validation_error(
        "input failed validation (" + std::to_string(report.violations.size()) +
        " violation(s)); first: " + ingest::violation_kind_name(v.kind) + " at column " +
        std::to_string(v.column) + ": " + v.detail);
}

void fill_size_stats(const bifiltered_complex& complex, reduction_stats& stats) {
    stats.n = complex.size();
    stats.m = static_cast<index_t>(complex.chunk_starts.size());
    stats.ell = 0;
    for (const chunk_view& c : chunk_views(complex))
        stats.ell = std::max(stats.ell, c.end - c.begin);
}

}  // namespace

std::pair<bifiltered_complex, reduction_stats> chunk_reduce(bifiltered_complex complex,
                                                            unsigned threads) {
    validate_or_throw(complex);
    reduction_stats stats;
    fill_size_stats(complex, stats);

    auto t0 = clock_t_::now();
    labeling_t labels = phase1_local_reduction(complex, &stats, threads);
    stats.t_phase1 = seconds_since(t0);

    auto t1 = clock_t_::now();
    phase2_compress(complex, labels, &stats, threads);
    stats.t_phase2 = seconds_since(t1);

    auto t2 = clock_t_::now();
    bifiltered_complex out = phase3_remove(complex, labels);
    stats.t_phase3 = seconds_since(t2);

    stats.g = out.size();
    return {std::move(out), stats};
}

void order_preserving_addition(bifiltered_complex& complex, index_t i1, index_t i2,
                               coefficient_t lambda) {
    const field_t f = complex.field;
    require(i1 >= 0 && i1 < complex.size() && i2 >= 0 && i2 < complex.size(),
            "order_preserving_addition: index out of range");
    require(i1 != i2, "order_preserving_addition: columns must differ");
    column_t& c1 = complex.columns[static_cast<std::size_t>(i1)];
    column_t& c2 = complex.columns[static_cast<std::size_t>(i2)];
    require(c1.dim == c2.dim, "order_preserving_addition: dimension mismatch");
    require(grade_leq(c1.grade, c2.grade),
            "order_preserving_addition: grade of the source must be <= grade of the target");
    lambda = f.normalize(lambda);
    if (lambda == 0) return;

    c2.boundary = sparse_column(merge_scaled(c2.boundary.entries(), c1.boundary.entries(), lambda, f), f);
    const dim_t up = c1.dim + 1;
    for (column_t& col : complex.columns) {
        if (col.dim != up) continue;
        coefficient_t mu = col.boundary.coeff_at(i2);
        if (mu == 0) continue;
        add_entry(col.boundary, i1, f.neg(f.mul(lambda, mu)), f);
    }
}

void remove_local_pair(bifiltered_complex& complex, index_t i1, index_t i2) {
    const field_t f = complex.field;
    require(i1 >= 0 && i1 < complex.size() && i2 >= 0 && i2 < complex.size(),
            "remove_local_pair: index out of range");
    const column_t& c1 = complex.columns[static_cast<std::size_t>(i1)];
    const column_t& c2 = complex.columns[static_cast<std::size_t>(i2)];
    require(c2.dim == c1.dim + 1, "remove_local_pair: dim(i2) must be dim(i1) + 1");
    require(c1.grade == c2.grade, "remove_local_pair: grades must be equal");
    const coefficient_t lambda = c2.boundary.coeff_at(i1);
    require(lambda != 0, "remove_local_pair: i1 must appear in the boundary of i2");

    const dim_t k = c1.dim;
    const std::vector<entry_t> pivot_boundary = c2.boundary.entries();
    const coefficient_t lambda_inv = f.inv(lambda);
    for (index_t i = 0; i < complex.size(); ++i) {
        if (i == i2) continue;
        column_t& col = complex.columns[static_cast<std::size_t>(i)];
        if (col.dim == k + 1) {
            coefficient_t mu = col.boundary.coeff_at(i1);
            if (mu == 0) continue;
            col.boundary = sparse_column(
                merge_scaled(col.boundary.entries(), pivot_boundary,
                             f.neg(f.mul(lambda_inv, mu)), f),
                f);
        } else if (col.dim == k + 2) {
            coefficient_t mu = col.boundary.coeff_at(i2);
            if (mu == 0) continue;
            add_entry(col.boundary, i2, f.neg(mu), f);
        }
    }

    std::vector<index_t> remap(static_cast<std::size_t>(complex.size()), no_index);
    index_t next = 0;
    for (index_t i = 0; i < complex.size(); ++i)
        if (i != i1 && i != i2) remap[static_cast<std::size_t>(i)] = next++;

    std::vector<column_t> columns;
    columns.reserve(static_cast<std::size_t>(next));
    for (index_t i = 0; i < complex.size(); ++i) {
        if (remap[static_cast<std::size_t>(i)] == no_index) continue;
        column_t col = std::move(complex.columns[static_cast<std::size_t>(i)]);
        std::vector<entry_t> entries;
        entries.reserve(col.boundary.entries().size());
        for (const entry_t& e : col.boundary.entries()) {
            index_t r = remap[static_cast<std::size_t>(e.index)];
            if (r == no_index)
                throw std::logic_error("remove_local_pair: dangling reference to a deleted column");
            entries.push_back({r, e.coeff});
        }
        col.boundary = sparse_column(std::move(entries), f);
        columns.push_back(std::move(col));
    }
    complex.columns = std::move(columns);
    complex.recompute_chunks();
}

bifiltered_complex modified_chunk_reduce(bifiltered_complex complex) {
    validate_or_throw(complex);
    labeling_t labels = phase1_local_reduction(complex, nullptr, 1);
    phase2_compress(complex, labels, nullptr, 1, /*keep_local_negative_entries=*/true);

    for (;;) {
        index_t negative = no_index;
        for (index_t i = 0; i < complex.size(); ++i)
            if (labels.tags[static_cast<std::size_t>(i)] == label_t::local_negative) {
                negative = i;
                break;
            }
        if (negative == no_index) break;
        index_t positive = labels.pair_of[static_cast<std::size_t>(negative)];
        remove_local_pair(complex, positive, negative);

        labels.tags.erase(labels.tags.begin() + negative);
        labels.tags.erase(labels.tags.begin() + positive);
        labels.pair_of.erase(labels.pair_of.begin() + negative);
        labels.pair_of.erase(labels.pair_of.begin() + positive);
        for (index_t& p : labels.pair_of) {
            if (p == no_index) continue;
            p -= (p > positive ? 1 : 0) + (p > negative ? 1 : 0);
        }
    }
    return complex;
}

}  // namespace mpchunk
