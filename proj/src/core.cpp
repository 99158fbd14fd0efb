#include "mpchunk/core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mpchunk {

bool is_prime(coefficient_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (coefficient_t d = 3; d <= n / d; d += 2)
        if (n % d == 0) return false;
    return true;
}

field_t::field_t(coefficient_t characteristic) : p(characteristic) {
    if (!is_prime(p)) throw std::invalid_argument("field characteristic must be prime, got " + std::to_string(p));
}

coefficient_t field_t::inv(coefficient_t a) const {
    a = normalize(a);
    if (a == 0) throw std::invalid_argument("inverse of 0");
    // extended Euclid
    coefficient_t r0 = p, r1 = a, s0 = 0, s1 = 1;
    while (r1 != 0) {
        coefficient_t q = r0 / r1;
        r0 -= q * r1;
        std::swap(r0, r1);
        s0 -= q * s1;
        std::swap(s0, s1);
    }
    assert(r0 == 1);
    return normalize(s0);
}

namespace {

struct index_less {
    bool operator()(const entry_t& a, const entry_t& b) const { return a.index < b.index; }
};

}  // namespace

sparse_column::sparse_column(std::vector<entry_t> entries, const field_t& f)
    : data_(std::move(entries)), canonical_(false) {
    for (auto& e : data_) e.coeff = f.normalize(e.coeff);
    canonicalize(f);
}

const std::vector<entry_t>& sparse_column::entries() const {
    if (!canonical_) throw std::logic_error("sparse_column::entries on non-canonical column");
    return data_;
}

std::vector<entry_t>& sparse_column::mutable_entries() {
    if (!canonical_) throw std::logic_error("sparse_column::mutable_entries on non-canonical column");
    return data_;
}

coefficient_t sparse_column::coeff_at(index_t i) const {
    const auto& es = entries();
    auto it = std::lower_bound(es.begin(), es.end(), entry_t{i, 0}, index_less{});
    return (it != es.end() && it->index == i) ? it->coeff : 0;
}

void sparse_column::ensure_heap() {
    if (canonical_) {
        std::make_heap(data_.begin(), data_.end(), index_less{});
        canonical_ = false;
    }
}

void sparse_column::push(entry_t e, const field_t& f) {
    e.coeff = f.normalize(e.coeff);
    if (e.coeff == 0) return;
    ensure_heap();
    data_.push_back(e);
    std::push_heap(data_.begin(), data_.end(), index_less{});
}

void sparse_column::push_scaled(std::span<const entry_t> src, coefficient_t lambda,
                                const field_t& f) {
    lambda = f.normalize(lambda);
    if (lambda == 0 || src.empty()) return;
    ensure_heap();
    data_.reserve(data_.size() + src.size());
    for (const entry_t& e : src) {
        coefficient_t c = f.mul(e.coeff, lambda);
        if (c == 0) continue;
        data_.push_back({e.index, c});
        std::push_heap(data_.begin(), data_.end(), index_less{});
    }
}

entry_t sparse_column::pop_max(const field_t& f) {
    if (canonical_) {
        if (data_.empty()) return {};
        entry_t e = data_.back();
        data_.pop_back();
        return e;
    }
    while (!data_.empty()) {
        std::pop_heap(data_.begin(), data_.end(), index_less{});
        entry_t e = data_.back();
        data_.pop_back();
        // fold duplicates of the same index
        while (!data_.empty() && data_.front().index == e.index) {
            std::pop_heap(data_.begin(), data_.end(), index_less{});
            e.coeff = f.add(e.coeff, data_.back().coeff);
            data_.pop_back();
        }
        if (e.coeff != 0) return e;
    }
    return {};
}

entry_t sparse_column::peek_max(const field_t& f) {
    if (canonical_) return data_.empty() ? entry_t{} : data_.back();
    entry_t e = pop_max(f);
    if (e.index != no_index) push(e, f);
    return e;
}

void sparse_column::canonicalize(const field_t& f) {
    if (canonical_) return;
    std::sort(data_.begin(), data_.end(), index_less{});
    std::size_t out = 0;
    std::size_t i = 0;
    while (i < data_.size()) {
        entry_t e = data_[i++];
        while (i < data_.size() && data_[i].index == e.index) e.coeff = f.add(e.coeff, data_[i++].coeff);
        if (e.coeff != 0) data_[out++] = e;
    }
    data_.resize(out);
    canonical_ = true;
}

dim_t bifiltered_complex::max_dim() const {
    dim_t d = 0;
    for (const auto& c : columns) d = std::max(d, c.dim);
    return d;
}

index_t bifiltered_complex::chunk_start_of(index_t i) const {
    auto it = std::upper_bound(chunk_starts.begin(), chunk_starts.end(), i);
    if (it == chunk_starts.begin()) throw std::out_of_range("chunk_start_of: index before first chunk");
    return *std::prev(it);
}

void bifiltered_complex::recompute_chunks() {
    chunk_starts.clear();
    for (index_t i = 0; i < size(); ++i)
        if (i == 0 || !(columns[i].grade == columns[i - 1].grade)) chunk_starts.push_back(i);
}

void canonicalize_entries(std::vector<entry_t>& entries, const field_t& f) {
    std::sort(entries.begin(), entries.end(),
              [](const entry_t& a, const entry_t& b) { return a.index < b.index; });
    std::size_t out = 0, i = 0;
    while (i < entries.size()) {
        entry_t e = entries[i++];
        e.coeff = f.normalize(e.coeff);
        while (i < entries.size() && entries[i].index == e.index)
            e.coeff = f.add(e.coeff, f.normalize(entries[i++].coeff));
        if (e.coeff != 0) entries[out++] = e;
    }
    entries.resize(out);
}

std::vector<entry_t> merge_scaled(std::span<const entry_t> a, std::span<const entry_t> b,
                                  coefficient_t lambda, const field_t& f) {
    std::vector<entry_t> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].index < a[i].index) {
            coefficient_t c = f.mul(b[j].coeff, lambda);
            if (c != 0) out.push_back({b[j].index, c});
            ++j;
        } else {
            coefficient_t c = f.add(a[i].coeff, f.mul(b[j].coeff, lambda));
            if (c != 0) out.push_back({a[i].index, c});
            ++i, ++j;
        }
    }
    return out;
}

double parse_coordinate(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty coordinate");
    std::size_t consumed = 0;
    double v;
    try {
        v = std::stod(text, &consumed);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad coordinate '" + text + "'");
    }
    if (consumed != text.size() || !std::isfinite(v))
        throw std::invalid_argument("bad coordinate '" + text + "'");
    return v;
}

std::optional<index_t> local_pivot(const column_t& c, const bifiltered_complex& complex) {
    const auto& es = c.boundary.entries();
    for (auto it = es.rbegin(); it != es.rend(); ++it)
        if (complex.columns[static_cast<std::size_t>(it->index)].grade == c.grade) return it->index;
    return std::nullopt;
}

void add_scaled(column_t& target, const column_t& source, coefficient_t lambda,
                const field_t& f) {
    if (target.dim != source.dim)
        throw std::invalid_argument("add_scaled: dimension mismatch");
    target.boundary.push_scaled(source.boundary.entries(), lambda, f);
    target.boundary.canonicalize(f);
}

}  // namespace mpchunk
