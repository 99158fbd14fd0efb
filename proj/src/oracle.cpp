#include "mpchunk/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace mpchunk::oracle {

namespace {

// Selection codes for the two-subcomplex reduction: 0 excluded, 1 in A,
// 2 in B \ A. Columns are laid out A first, then B \ A, each block in
// the original index order.
struct inclusion_counts {
    std::vector<index_t> ker;    // ker[k] = dim ker eta_k
    std::vector<index_t> coker;  // coker[k] = dim coker eta_k
};

inclusion_counts inclusion_kernel_cokernel(const bifiltered_complex& complex,
                                           const std::vector<std::uint8_t>& sel) {
    const index_t n = complex.size();
    std::vector<index_t> order;
    order.reserve(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i)
        if (sel[static_cast<std::size_t>(i)] == 1) order.push_back(i);
    const index_t a_count = static_cast<index_t>(order.size());
    for (index_t i = 0; i < n; ++i)
        if (sel[static_cast<std::size_t>(i)] == 2) order.push_back(i);

    std::vector<index_t> pos(static_cast<std::size_t>(n), no_index);
    for (std::size_t j = 0; j < order.size(); ++j) pos[static_cast<std::size_t>(order[j])] = static_cast<index_t>(j);

    std::vector<std::vector<entry_t>> cols(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        for (const entry_t& e : complex.columns[static_cast<std::size_t>(order[j])].boundary.entries()) {
            index_t r = pos[static_cast<std::size_t>(e.index)];
            if (r == no_index) throw std::logic_error("selection is not boundary-closed");
            cols[j].push_back({r, e.coeff});
        }
        canonicalize_entries(cols[j], complex.field);
    }

    reduced_matrix red = standard_reduce(std::move(cols), complex.field);

    std::vector<char> claimed(order.size(), 0);
    for (index_t low : red.lowest)
        if (low != no_index) claimed[static_cast<std::size_t>(low)] = 1;

    const dim_t dims = complex.max_dim();
    inclusion_counts counts;
    counts.ker.assign(static_cast<std::size_t>(dims) + 2, 0);
    counts.coker.assign(static_cast<std::size_t>(dims) + 2, 0);
    for (std::size_t j = static_cast<std::size_t>(a_count); j < order.size(); ++j) {
        dim_t d = complex.columns[static_cast<std::size_t>(order[j])].dim;
        if (red.lowest[j] != no_index) {
            if (red.lowest[j] < a_count && d >= 1) counts.ker[static_cast<std::size_t>(d) - 1] += 1;
        } else if (!claimed[j]) {
            counts.coker[static_cast<std::size_t>(d)] += 1;
        }
    }
    return counts;
}

// Rank-threshold selection: grade.x <= tx && grade.y <= ty; -1 selects nothing.
std::vector<std::uint8_t> threshold_selection(const bifiltered_complex& complex,
                                              std::int32_t ax, std::int32_t ay,
                                              std::int32_t bx, std::int32_t by) {
    std::vector<std::uint8_t> sel(static_cast<std::size_t>(complex.size()), 0);
    for (index_t i = 0; i < complex.size(); ++i) {
        grade_t g = complex.columns[static_cast<std::size_t>(i)].grade;
        if (g.x <= ax && g.y <= ay)
            sel[static_cast<std::size_t>(i)] = 1;
        else if (g.x <= bx && g.y <= by)
            sel[static_cast<std::size_t>(i)] = 2;
    }
    return sel;
}

// Betti numbers of one sublevel complex, all dimensions from one reduction:
// zero k-columns minus nonzero (k+1)-columns.
std::vector<index_t> betti_all_at(const bifiltered_complex& complex, std::int32_t tx,
                                  std::int32_t ty) {
    std::vector<index_t> order;
    for (index_t i = 0; i < complex.size(); ++i) {
        grade_t g = complex.columns[static_cast<std::size_t>(i)].grade;
        if (g.x <= tx && g.y <= ty) order.push_back(i);
    }
    std::vector<index_t> pos(static_cast<std::size_t>(complex.size()), no_index);
    for (std::size_t j = 0; j < order.size(); ++j) pos[static_cast<std::size_t>(order[j])] = static_cast<index_t>(j);

    std::vector<std::vector<entry_t>> cols(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        for (const entry_t& e : complex.columns[static_cast<std::size_t>(order[j])].boundary.entries()) {
            index_t r = pos[static_cast<std::size_t>(e.index)];
            if (r == no_index) throw std::logic_error("sublevel selection is not boundary-closed");
            cols[j].push_back({r, e.coeff});
        }
        canonicalize_entries(cols[j], complex.field);
    }
    reduced_matrix red = standard_reduce(std::move(cols), complex.field);

    const std::size_t dims = static_cast<std::size_t>(complex.max_dim()) + 2;
    std::vector<index_t> zeros(dims, 0), nonzeros(dims, 0), betti(dims, 0);
    for (std::size_t j = 0; j < order.size(); ++j) {
        dim_t d = complex.columns[static_cast<std::size_t>(order[j])].dim;
        if (red.lowest[j] == no_index)
            ++zeros[static_cast<std::size_t>(d)];
        else
            ++nonzeros[static_cast<std::size_t>(d)];
    }
    for (std::size_t k = 0; k + 1 < dims; ++k) betti[k] = zeros[k] - nonzeros[k + 1];
    return betti;
}

// Ranks of H_k(C^p) -> H_k(C^q) for all k: betti_k(C^p) - dim ker eta_k.
std::vector<index_t> rank_all_at(const bifiltered_complex& complex, std::int32_t px,
                                 std::int32_t py, std::int32_t qx, std::int32_t qy) {
    std::vector<index_t> ranks = betti_all_at(complex, px, py);
    auto sel = threshold_selection(complex, px, py, qx, qy);
    bool any_new = false;
    for (auto s : sel)
        if (s == 2) { any_new = true; break; }
    if (!any_new) return ranks;
    inclusion_counts counts = inclusion_kernel_cokernel(complex, sel);
    for (std::size_t k = 0; k < ranks.size() && k < counts.ker.size(); ++k)
        ranks[k] -= counts.ker[k];
    return ranks;
}

std::vector<double> axis_numeric(const std::vector<std::string>& table) {
    std::vector<double> out;
    out.reserve(table.size());
    for (const auto& s : table) out.push_back(parse_coordinate(s));
    return out;
}

// Largest rank whose value is <= v, or -1.
std::int32_t threshold_for(const std::vector<double>& values, double v) {
    auto it = std::upper_bound(values.begin(), values.end(), v);
    return static_cast<std::int32_t>(it - values.begin()) - 1;
}

struct joint_grid {
    std::vector<double> xs, ys;  // sorted distinct raw values present in either complex
    std::size_t comparable_pairs = 0;
};

void collect_present(const bifiltered_complex& c, std::set<double>& xs, std::set<double>& ys) {
    auto xv = axis_numeric(c.x_values);
    auto yv = axis_numeric(c.y_values);
    for (const auto& col : c.columns) {
        xs.insert(xv[static_cast<std::size_t>(col.grade.x)]);
        ys.insert(yv[static_cast<std::size_t>(col.grade.y)]);
    }
}

joint_grid make_joint_grid(const bifiltered_complex& lhs, const bifiltered_complex& rhs) {
    std::set<double> xs, ys;
    collect_present(lhs, xs, ys);
    collect_present(rhs, xs, ys);
    joint_grid g;
    g.xs.assign(xs.begin(), xs.end());
    g.ys.assign(ys.begin(), ys.end());
    std::size_t px = g.xs.size() * (g.xs.size() + 1) / 2;
    std::size_t py = g.ys.size() * (g.ys.size() + 1) / 2;
    g.comparable_pairs = px * py;
    return g;
}

}  // namespace

reduced_matrix standard_reduce(std::vector<std::vector<entry_t>> columns, const field_t& f) {
    const std::size_t n = columns.size();
    reduced_matrix red;
    red.lowest.assign(n, no_index);
    std::vector<index_t> owner(n, no_index);  // row -> column with that lowest
    for (std::size_t j = 0; j < n; ++j) {
        canonicalize_entries(columns[j], f);
        for (;;) {
            if (columns[j].empty()) break;
            index_t low = columns[j].back().index;
            if (low >= static_cast<index_t>(j))
                throw std::invalid_argument("standard_reduce: matrix not strictly upper triangular");
            index_t other = owner[static_cast<std::size_t>(low)];
            if (other == no_index) {
                owner[static_cast<std::size_t>(low)] = static_cast<index_t>(j);
                red.lowest[j] = low;
                break;
            }
            coefficient_t lambda = f.neg(
                f.mul(columns[j].back().coeff, f.inv(columns[static_cast<std::size_t>(other)].back().coeff)));
            columns[j] = merge_scaled(columns[j], columns[static_cast<std::size_t>(other)], lambda, f);
        }
    }
    red.columns = std::move(columns);
    return red;
}

bool grade_grid::contains(grade_t p) const {
    return std::binary_search(xs.begin(), xs.end(), p.x) &&
           std::binary_search(ys.begin(), ys.end(), p.y);
}

grade_grid make_grid(const bifiltered_complex& complex) {
    std::set<std::int32_t> xs, ys;
    for (const auto& c : complex.columns) {
        xs.insert(c.grade.x);
        ys.insert(c.grade.y);
    }
    grade_grid g;
    g.xs.assign(xs.begin(), xs.end());
    g.ys.assign(ys.begin(), ys.end());
    return g;
}

std::size_t comparable_pair_count(const grade_grid& grid) {
    std::size_t px = grid.xs.size() * (grid.xs.size() + 1) / 2;
    std::size_t py = grid.ys.size() * (grid.ys.size() + 1) / 2;
    return px * py;
}

index_t betti(const bifiltered_complex& complex, grade_t p, dim_t k) {
    auto all = betti_all_at(complex, p.x, p.y);
    return k >= 0 && static_cast<std::size_t>(k) < all.size() ? all[static_cast<std::size_t>(k)]
                                                              : 0;
}

index_t delta(const bifiltered_complex& complex, grade_t p, dim_t k) {
    if (!make_grid(complex).contains(p))
        throw std::invalid_argument("delta: grade is not on the complex's grid");
    std::vector<std::uint8_t> sel(static_cast<std::size_t>(complex.size()), 0);
    bool any_at_p = false;
    for (index_t i = 0; i < complex.size(); ++i) {
        grade_t g = complex.columns[static_cast<std::size_t>(i)].grade;
        if (g == p) {
            sel[static_cast<std::size_t>(i)] = 2;
            any_at_p = true;
        } else if (grade_leq(g, p)) {
            sel[static_cast<std::size_t>(i)] = 1;
        }
    }
    if (!any_at_p) return 0;  // C^p == C^{<p}
    inclusion_counts counts = inclusion_kernel_cokernel(complex, sel);
    index_t result = 0;
    if (k >= 0 && static_cast<std::size_t>(k) < counts.coker.size())
        result += counts.coker[static_cast<std::size_t>(k)];
    if (k >= 1 && static_cast<std::size_t>(k - 1) < counts.ker.size())
        result += counts.ker[static_cast<std::size_t>(k) - 1];
    return result;
}

index_t gamma(const bifiltered_complex& complex, grade_t p, dim_t k) {
    index_t count = 0;
    for (const auto& c : complex.columns)
        if (c.grade == p && c.dim == k) ++count;
    return count;
}

rank_invariant compute_rank_invariant(const bifiltered_complex& complex, bool force) {
    grade_grid grid = make_grid(complex);
    std::size_t pairs = comparable_pair_count(grid);
    if (pairs > grid_pair_guard && !force) throw grid_too_large(pairs);

    rank_invariant inv;
    const dim_t dims = complex.max_dim();
    for (std::int32_t x : grid.xs)
        for (std::int32_t y : grid.ys) {
            auto betti = betti_all_at(complex, x, y);
            for (dim_t k = 0; k <= dims; ++k)
                inv.betti[{x, y, k}] = betti[static_cast<std::size_t>(k)];
        }
    for (std::int32_t px : grid.xs)
        for (std::int32_t py : grid.ys)
            for (std::int32_t qx : grid.xs) {
                if (qx < px) continue;
                for (std::int32_t qy : grid.ys) {
                    if (qy < py || (qx == px && qy == py)) continue;
                    auto ranks = rank_all_at(complex, px, py, qx, qy);
                    for (dim_t k = 0; k <= dims; ++k)
                        inv.ranks[{px, py, qx, qy, k}] = ranks[static_cast<std::size_t>(k)];
                }
            }
    return inv;
}

equivalence_report check_equivalence(const bifiltered_complex& lhs,
                                     const bifiltered_complex& rhs, bool force) {
    if (!(lhs.field == rhs.field))
        throw std::invalid_argument("check_equivalence: complexes over different fields");
    equivalence_report report;
    joint_grid grid = make_joint_grid(lhs, rhs);
    report.comparable_pairs = grid.comparable_pairs;
    if (grid.comparable_pairs > grid_pair_guard && !force) {
        report.skipped_large_grid = true;
        return report;
    }

    auto lx = axis_numeric(lhs.x_values), ly = axis_numeric(lhs.y_values);
    auto rx = axis_numeric(rhs.x_values), ry = axis_numeric(rhs.y_values);
    const dim_t dims = std::max(lhs.max_dim(), rhs.max_dim());

    const std::size_t nx = grid.xs.size(), ny = grid.ys.size();
    std::vector<std::int32_t> ltx(nx), lty(ny), rtx(nx), rty(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        ltx[i] = threshold_for(lx, grid.xs[i]);
        rtx[i] = threshold_for(rx, grid.xs[i]);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        lty[j] = threshold_for(ly, grid.ys[j]);
        rty[j] = threshold_for(ry, grid.ys[j]);
    }

    auto value_at = [](const std::vector<index_t>& v, dim_t k) {
        return static_cast<std::size_t>(k) < v.size() ? v[static_cast<std::size_t>(k)]
                                                      : index_t{0};
    };
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            auto a = betti_all_at(lhs, ltx[i], lty[j]);
            auto b = betti_all_at(rhs, rtx[i], rty[j]);
            for (dim_t k = 0; k <= dims; ++k)
                if (value_at(a, k) != value_at(b, k))
                    report.mismatches.push_back({grid.xs[i], grid.ys[j], grid.xs[i], grid.ys[j],
                                                 k, value_at(a, k), value_at(b, k), true});
        }
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i2 = i; i2 < nx; ++i2)
                for (std::size_t j2 = j; j2 < ny; ++j2) {
                    if (i2 == i && j2 == j) continue;
                    auto a = rank_all_at(lhs, ltx[i], lty[j], ltx[i2], lty[j2]);
                    auto b = rank_all_at(rhs, rtx[i], rty[j], rtx[i2], rty[j2]);
                    for (dim_t k = 0; k <= dims; ++k)
                        if (value_at(a, k) != value_at(b, k))
                            report.mismatches.push_back({grid.xs[i], grid.ys[j], grid.xs[i2],
                                                         grid.ys[j2], k, value_at(a, k),
                                                         value_at(b, k), false});
                }
    report.ok = report.mismatches.empty();
    return report;
}

optimality_report check_optimality(const bifiltered_complex& original,
                                   const bifiltered_complex& reduced, bool force) {
    if (!(original.field == reduced.field))
        throw std::invalid_argument("check_optimality: complexes over different fields");
    optimality_report report;
    joint_grid grid = make_joint_grid(original, reduced);
    report.comparable_pairs = grid.comparable_pairs;
    if (grid.comparable_pairs > grid_pair_guard && !force) {
        report.skipped_large_grid = true;
        return report;
    }

    auto ox = axis_numeric(original.x_values), oy = axis_numeric(original.y_values);
    auto rx = axis_numeric(reduced.x_values), ry = axis_numeric(reduced.y_values);
    const dim_t dims = std::max(original.max_dim(), reduced.max_dim());

    auto exact_rank = [](const std::vector<double>& values, double v) -> std::int32_t {
        auto it = std::lower_bound(values.begin(), values.end(), v);
        if (it == values.end() || *it != v) return -1;
        return static_cast<std::int32_t>(it - values.begin());
    };

    for (double vx : grid.xs)
        for (double vy : grid.ys) {
            std::int32_t oxr = exact_rank(ox, vx), oyr = exact_rank(oy, vy);
            std::int32_t rxr = exact_rank(rx, vx), ryr = exact_rank(ry, vy);
            bool original_has = false, reduced_has = false;
            if (oxr >= 0 && oyr >= 0)
                for (const auto& c : original.columns)
                    if (c.grade == grade_t{oxr, oyr}) { original_has = true; break; }
            if (rxr >= 0 && ryr >= 0)
                for (const auto& c : reduced.columns)
                    if (c.grade == grade_t{rxr, ryr}) { reduced_has = true; break; }
            if (!original_has && !reduced_has) continue;  // delta = gamma = 0
            for (dim_t k = 0; k <= dims; ++k) {
                index_t d = original_has ? delta(original, {oxr, oyr}, k) : 0;
                index_t g = reduced_has ? gamma(reduced, {rxr, ryr}, k) : 0;
                if (d != g) report.violations.push_back({vx, vy, k, d, g});
            }
        }
    report.ok = report.violations.empty();
    return report;
}

}  // namespace mpchunk::oracle
