#include "mpchunk/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace mpchunk::ingest {

namespace {

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string t;
    while (in >> t) tokens.push_back(std::move(t));
    return tokens;
}

index_t parse_int(const std::string& t, int line, const char* what) {
    std::size_t consumed = 0;
    index_t v = 0;
    try {
        v = std::stoll(t, &consumed);
    } catch (const std::exception&) {
        throw parse_error(std::string("bad ") + what + " '" + t + "'", line);
    }
    if (consumed != t.size()) throw parse_error(std::string("bad ") + what + " '" + t + "'", line);
    return v;
}

double checked_coordinate(const std::string& t, int line) {
    try {
        return parse_coordinate(t);
    } catch (const std::invalid_argument& e) {
        throw parse_error(e.what(), line);
    }
}

// <pos> or <pos>:<coeff>, coeff in [1, p)
entry_t parse_ref(const std::string& t, index_t position, coefficient_t p, int line) {
    std::string pos_text = t, coeff_text;
    auto colon = t.find(':');
    if (colon != std::string::npos) {
        pos_text = t.substr(0, colon);
        coeff_text = t.substr(colon + 1);
    }
    index_t pos = parse_int(pos_text, line, "boundary reference");
    if (pos < 0 || pos >= position)
        throw parse_error("boundary reference " + pos_text + " does not precede generator " +
                              std::to_string(position),
                          line);
    coefficient_t coeff = 1;
    if (!coeff_text.empty()) {
        coeff = parse_int(coeff_text, line, "coefficient");
        if (coeff < 1 || coeff >= p)
            throw parse_error("coefficient " + coeff_text + " outside [1, " + std::to_string(p) + ")",
                              line);
    }
    return {pos, coeff};
}

field_t make_field(std::optional<coefficient_t> override_p, std::optional<coefficient_t> header_p,
                   int header_line) {
    coefficient_t p = override_p ? *override_p : header_p.value_or(2);
    try {
        return field_t(p);
    } catch (const std::invalid_argument& e) {
        if (!override_p && header_p) throw parse_error(e.what(), header_line);
        throw;
    }
}

// (x1,y1)(x2,y2)... with optional whitespace between groups
std::vector<std::array<std::string, 2>> parse_grade_list(const std::string& text, int line) {
    std::vector<std::array<std::string, 2>> grades;
    std::size_t i = 0;
    auto skip_space = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_space();
    while (i < text.size()) {
        if (text[i] != '(') throw parse_error("expected '(' in grade list", line);
        auto comma = text.find(',', i);
        auto close = text.find(')', i);
        if (comma == std::string::npos || close == std::string::npos || comma > close)
            throw parse_error("malformed grade group in grade list", line);
        std::string x = text.substr(i + 1, comma - i - 1);
        std::string y = text.substr(comma + 1, close - comma - 1);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        grades.push_back({trim(x), trim(y)});
        i = close + 1;
        skip_space();
    }
    if (grades.empty()) throw parse_error("empty grade list", line);
    return grades;
}

}  // namespace

const char* violation_kind_name(violation_kind kind) {
    switch (kind) {
        case violation_kind::boundary_square: return "BoundarySquare";
        case violation_kind::grade_monotone: return "GradeMonotone";
        case violation_kind::order_violation: return "OrderViolation";
        case violation_kind::dim_mismatch: return "DimMismatch";
        case violation_kind::bad_coefficient: return "BadCoefficient";
    }
    return "Unknown";
}

input_format detect_format(std::istream& in) {
    std::string line;
    input_format result = input_format::native;
    while (std::getline(in, line)) {
        auto tokens = tokenize(strip_comment(line));
        if (tokens.empty()) continue;
        if (tokens[0] == "mpchunk-mcc")
            result = input_format::multicritical;
        else if (tokens[0] == "OFF")
            result = input_format::off;
        break;
    }
    in.clear();
    in.seekg(0);
    return result;
}

std::pair<std::vector<raw_generator>, field_t> parse_native(
    std::istream& in, std::optional<coefficient_t> field_override) {
    std::vector<raw_generator> gens;
    std::optional<coefficient_t> header_field;
    int header_line = 0;
    std::optional<field_t> field;
    std::string line;
    int line_no = 0;
    bool first_meaningful = true;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = tokenize(strip_comment(line));
        if (tokens.empty()) continue;
        const std::string& head = tokens[0];
        if (head == "mpchunk-scc") {
            if (!first_meaningful) throw parse_error("misplaced format header", line_no);
            if (tokens.size() != 2 || tokens[1] != "1")
                throw parse_error("unsupported format version", line_no);
        } else if (head == "mpchunk-mcc") {
            throw parse_error("multi-critical input; use the multi-critical parser", line_no);
        } else if (head == "field") {
            if (header_field) throw parse_error("duplicate field line", line_no);
            if (!gens.empty()) throw parse_error("field line after generators", line_no);
            if (tokens.size() != 2) throw parse_error("expected 'field <p>'", line_no);
            header_field = parse_int(tokens[1], line_no, "field characteristic");
            header_line = line_no;
        } else if (head == "gen") {
            if (!field) field = make_field(field_override, header_field, header_line);
            if (tokens.size() < 5 || tokens[4] != ";")
                throw parse_error("expected 'gen <dim> <x> <y> ; ...'", line_no);
            raw_generator g;
            g.dim = static_cast<dim_t>(parse_int(tokens[1], line_no, "dimension"));
            if (g.dim < 0) throw parse_error("negative dimension", line_no);
            g.x = tokens[2];
            g.y = tokens[3];
            checked_coordinate(g.x, line_no);
            checked_coordinate(g.y, line_no);
            index_t position = static_cast<index_t>(gens.size());
            for (std::size_t i = 5; i < tokens.size(); ++i)
                g.boundary.push_back(parse_ref(tokens[i], position, field->p, line_no));
            gens.push_back(std::move(g));
        } else {
            throw parse_error("unrecognized directive '" + head + "'", line_no);
        }
        first_meaningful = false;
    }
    if (!field) field = make_field(field_override, header_field, header_line);
    return {std::move(gens), *field};
}

std::pair<std::vector<multicritical_generator>, field_t> parse_multicritical(
    std::istream& in, std::optional<coefficient_t> field_override) {
    std::vector<multicritical_generator> gens;
    std::optional<coefficient_t> header_field;
    int header_line = 0;
    std::optional<field_t> field;
    std::string line;
    int line_no = 0;
    bool saw_magic = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto stripped = strip_comment(line);
        auto tokens = tokenize(stripped);
        if (tokens.empty()) continue;
        const std::string& head = tokens[0];
        if (head == "mpchunk-mcc") {
            if (saw_magic || !gens.empty()) throw parse_error("misplaced format header", line_no);
            if (tokens.size() != 2 || tokens[1] != "1")
                throw parse_error("unsupported format version", line_no);
            saw_magic = true;
        } else if (head == "field") {
            if (header_field) throw parse_error("duplicate field line", line_no);
            if (!gens.empty()) throw parse_error("field line after generators", line_no);
            if (tokens.size() != 2) throw parse_error("expected 'field <p>'", line_no);
            header_field = parse_int(tokens[1], line_no, "field characteristic");
            header_line = line_no;
        } else if (head == "gen") {
            if (!saw_magic) throw parse_error("missing 'mpchunk-mcc 1' header", line_no);
            if (!field) field = make_field(field_override, header_field, header_line);
            // gen <dim> <gradelist> ; refs
            auto semi = stripped.find(';');
            if (semi == std::string::npos) throw parse_error("missing ';'", line_no);
            auto head_tokens = tokenize(stripped.substr(0, semi));
            if (head_tokens.size() < 3) throw parse_error("expected 'gen <dim> (<x>,<y>)... ;'", line_no);
            multicritical_generator g;
            g.dim = static_cast<dim_t>(parse_int(head_tokens[1], line_no, "dimension"));
            if (g.dim < 0) throw parse_error("negative dimension", line_no);
            std::string grade_text;
            for (std::size_t i = 2; i < head_tokens.size(); ++i) grade_text += head_tokens[i];
            g.critical_grades = parse_grade_list(grade_text, line_no);
            std::vector<std::array<double, 2>> numeric;
            for (auto& [x, y] : g.critical_grades)
                numeric.push_back({checked_coordinate(x, line_no), checked_coordinate(y, line_no)});
            for (std::size_t a = 0; a < numeric.size(); ++a)
                for (std::size_t b = a + 1; b < numeric.size(); ++b) {
                    bool ab = numeric[a][0] <= numeric[b][0] && numeric[a][1] <= numeric[b][1];
                    bool ba = numeric[b][0] <= numeric[a][0] && numeric[b][1] <= numeric[a][1];
                    if (ab || ba)
                        throw parse_error("critical grades must be pairwise incomparable", line_no);
                }
            std::vector<std::size_t> by_x(numeric.size());
            std::iota(by_x.begin(), by_x.end(), std::size_t{0});
            std::sort(by_x.begin(), by_x.end(),
                      [&](std::size_t a, std::size_t b) { return numeric[a][0] < numeric[b][0]; });
            std::vector<std::array<std::string, 2>> sorted;
            for (std::size_t i : by_x) sorted.push_back(g.critical_grades[i]);
            g.critical_grades = std::move(sorted);
            index_t position = static_cast<index_t>(gens.size());
            for (const auto& t : tokenize(stripped.substr(semi + 1)))
                g.boundary.push_back(parse_ref(t, position, field->p, line_no));
            gens.push_back(std::move(g));
        } else {
            throw parse_error("unrecognized directive '" + head + "'", line_no);
        }
    }
    if (!saw_magic) throw parse_error("missing 'mpchunk-mcc 1' header", line_no ? line_no : 1);
    if (!field) field = make_field(field_override, header_field, header_line);
    return {std::move(gens), *field};
}

bifiltered_complex sort_and_index(const std::vector<raw_generator>& raw, const field_t& field) {
    const std::size_t n = raw.size();

    // coordinate compression, first-seen spelling per numeric value
    std::map<double, std::string> xs, ys;
    std::vector<double> gx(n), gy(n);
    for (std::size_t i = 0; i < n; ++i) {
        gx[i] = parse_coordinate(raw[i].x);
        gy[i] = parse_coordinate(raw[i].y);
        xs.emplace(gx[i], raw[i].x);
        ys.emplace(gy[i], raw[i].y);
    }

    bifiltered_complex complex;
    complex.field = field;
    std::map<double, std::int32_t> x_rank, y_rank;
    for (const auto& [v, s] : xs) {
        x_rank.emplace(v, static_cast<std::int32_t>(complex.x_values.size()));
        complex.x_values.push_back(s);
    }
    for (const auto& [v, s] : ys) {
        y_rank.emplace(v, static_cast<std::int32_t>(complex.y_values.size()));
        complex.y_values.push_back(s);
    }

    std::vector<grade_t> grades(n);
    for (std::size_t i = 0; i < n; ++i) grades[i] = {x_rank[gx[i]], y_rank[gy[i]]};

    for (std::size_t i = 0; i < n; ++i)
        for (const entry_t& e : raw[i].boundary) {
            if (e.index < 0 || e.index >= static_cast<index_t>(i))
                throw validation_error("generator " + std::to_string(i) +
                                       " references position " + std::to_string(e.index) +
                                       " which does not precede it");
            if (!grade_leq(grades[static_cast<std::size_t>(e.index)], grades[i]))
                throw validation_error(
                    "grade monotonicity violation: generator " + std::to_string(i) + " at (" +
                    raw[i].x + ", " + raw[i].y + ") references generator " +
                    std::to_string(e.index) + " at (" + raw[static_cast<std::size_t>(e.index)].x +
                    ", " + raw[static_cast<std::size_t>(e.index)].y + ")");
        }

    std::vector<index_t> order(n);
    std::iota(order.begin(), order.end(), index_t{0});
    std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
        grade_t ga = grades[static_cast<std::size_t>(a)], gb = grades[static_cast<std::size_t>(b)];
        if (!(ga == gb)) return grade_lex_less(ga, gb);
        if (raw[static_cast<std::size_t>(a)].dim != raw[static_cast<std::size_t>(b)].dim)
            return raw[static_cast<std::size_t>(a)].dim < raw[static_cast<std::size_t>(b)].dim;
        return a < b;
    });
    std::vector<index_t> new_pos(n);
    for (std::size_t j = 0; j < n; ++j) new_pos[static_cast<std::size_t>(order[j])] = static_cast<index_t>(j);

    complex.columns.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const raw_generator& src = raw[static_cast<std::size_t>(order[j])];
        column_t col;
        col.grade = grades[static_cast<std::size_t>(order[j])];
        col.dim = src.dim;
        std::vector<entry_t> entries;
        entries.reserve(src.boundary.size());
        for (const entry_t& e : src.boundary)
            entries.push_back({new_pos[static_cast<std::size_t>(e.index)], e.coeff});
        canonicalize_entries(entries, field);
        col.boundary = sparse_column(std::move(entries), field);
        complex.columns.push_back(std::move(col));
    }
    complex.recompute_chunks();
    return complex;
}

validation_report validate(const bifiltered_complex& complex) {
    validation_report report;
    auto flag = [&](violation_kind kind, index_t column, std::string detail) {
        report.violations.push_back({kind, column, std::move(detail)});
    };
    const field_t& f = complex.field;
    const index_t n = complex.size();

    for (index_t i = 0; i < n; ++i) {
        const column_t& col = complex.columns[static_cast<std::size_t>(i)];
        if (col.grade.x < 0 || col.grade.x >= static_cast<std::int32_t>(complex.x_values.size()) ||
            col.grade.y < 0 || col.grade.y >= static_cast<std::int32_t>(complex.y_values.size()))
            flag(violation_kind::order_violation, i, "grade rank outside coordinate tables");
        bool entries_sane = true;
        for (const entry_t& e : col.boundary.entries()) {
            if (e.index < 0 || e.index >= i) {
                flag(violation_kind::order_violation, i,
                     "boundary entry " + std::to_string(e.index) + " not strictly below column");
                entries_sane = false;
                continue;
            }
            const column_t& ref = complex.columns[static_cast<std::size_t>(e.index)];
            if (ref.dim != col.dim - 1) {
                flag(violation_kind::dim_mismatch, i,
                     "entry " + std::to_string(e.index) + " has dimension " +
                         std::to_string(ref.dim) + ", expected " + std::to_string(col.dim - 1));
                entries_sane = false;
            }
            if (!grade_leq(ref.grade, col.grade))
                flag(violation_kind::grade_monotone, i,
                     "entry " + std::to_string(e.index) + " has grade above its column");
            if (e.coeff < 1 || e.coeff >= f.p)
                flag(violation_kind::bad_coefficient, i,
                     "coefficient " + std::to_string(e.coeff) + " outside [1, " +
                         std::to_string(f.p) + ")");
        }
        if (entries_sane) {
            std::vector<entry_t> dd;
            for (const entry_t& e : col.boundary.entries())
                dd = merge_scaled(dd, complex.columns[static_cast<std::size_t>(e.index)].boundary.entries(),
                                  e.coeff, f);
            if (!dd.empty())
                flag(violation_kind::boundary_square, i,
                     "boundary of boundary has " + std::to_string(dd.size()) + " nonzero entries");
        }
    }

    // The index order must extend the product order: no column may be
    // strictly dominated by an earlier one. Staircase of Pareto-maximal
    // grades seen so far; x ascending, y strictly descending.
    std::map<std::int32_t, std::int32_t> staircase;
    for (index_t i = 0; i < n; ++i) {
        grade_t g = complex.columns[static_cast<std::size_t>(i)].grade;
        auto it = staircase.lower_bound(g.x);
        if (it != staircase.end() && it->second >= g.y &&
            !(it->first == g.x && it->second == g.y))
            flag(violation_kind::order_violation, i,
                 "grade is strictly below that of an earlier column");
        if (it != staircase.end() && it->second >= g.y) continue;  // dominated or equal: no insert
        while (it != staircase.begin()) {
            auto prev = std::prev(it);
            if (prev->second > g.y) break;
            it = staircase.erase(prev);
        }
        staircase[g.x] = g.y;
    }

    // chunks: equal grades contiguous, chunk_starts exact, dims ascending
    std::vector<index_t> runs;
    for (index_t i = 0; i < n; ++i)
        if (i == 0 || !(complex.columns[static_cast<std::size_t>(i)].grade ==
                        complex.columns[static_cast<std::size_t>(i - 1)].grade))
            runs.push_back(i);
    if (runs != complex.chunk_starts)
        flag(violation_kind::order_violation, runs.empty() ? 0 : runs[0],
             "chunk_starts do not match the maximal equal-grade runs");
    std::set<std::pair<std::int32_t, std::int32_t>> seen_grades;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        grade_t g = complex.columns[static_cast<std::size_t>(runs[r])].grade;
        if (!seen_grades.insert({g.x, g.y}).second)
            flag(violation_kind::order_violation, runs[r], "equal grades are not contiguous");
        index_t end = r + 1 < runs.size() ? runs[r + 1] : n;
        for (index_t i = runs[r] + 1; i < end; ++i)
            if (complex.columns[static_cast<std::size_t>(i)].dim <
                complex.columns[static_cast<std::size_t>(i - 1)].dim)
                flag(violation_kind::order_violation, i, "dimensions not ascending within chunk");
    }

    report.ok = report.violations.empty();
    return report;
}

namespace {

// Working state of the h-critical expansion. Boundaries are canonical entry
// vectors over output positions; grades are kept numerically for the
// subcomplex selections of the completion solver.
struct expansion_state {
    const field_t& f;
    std::vector<raw_generator> out;
    std::vector<std::vector<entry_t>> bnd;
    std::vector<double> gx, gy;
    std::vector<dim_t> dims;

    explicit expansion_state(const field_t& field) : f(field) {}

    index_t emit(raw_generator g, double x, double y, std::vector<entry_t> boundary) {
        g.boundary = boundary;
        index_t pos = static_cast<index_t>(out.size());
        dims.push_back(g.dim);
        out.push_back(std::move(g));
        bnd.push_back(std::move(boundary));
        gx.push_back(x);
        gy.push_back(y);
        return pos;
    }

    std::vector<entry_t> boundary_of_chain(const std::vector<entry_t>& chain) const {
        std::vector<entry_t> w;
        for (const entry_t& e : chain)
            w = merge_scaled(w, bnd[static_cast<std::size_t>(e.index)], e.coeff, f);
        return w;
    }

    // Solve dz = w with z supported on emitted d-columns of grade <= (qx, qy).
    std::vector<entry_t> solve(const std::vector<entry_t>& w, dim_t d, double qx, double qy) const {
        std::vector<index_t> cand;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (dims[i] == d && gx[i] <= qx && gy[i] <= qy) cand.push_back(static_cast<index_t>(i));
        std::vector<std::vector<entry_t>> cols(cand.size()), combos(cand.size());
        std::map<index_t, std::size_t> owner;  // row -> candidate slot
        for (std::size_t j = 0; j < cand.size(); ++j) {
            cols[j] = bnd[static_cast<std::size_t>(cand[j])];
            combos[j] = {{cand[j], 1}};
            while (!cols[j].empty()) {
                index_t low = cols[j].back().index;
                auto it = owner.find(low);
                if (it == owner.end()) {
                    owner.emplace(low, j);
                    break;
                }
                std::size_t o = it->second;
                coefficient_t lambda =
                    f.neg(f.mul(cols[j].back().coeff, f.inv(cols[o].back().coeff)));
                cols[j] = merge_scaled(cols[j], cols[o], lambda, f);
                combos[j] = merge_scaled(combos[j], combos[o], lambda, f);
            }
        }
        std::vector<entry_t> residue = w, z;
        while (!residue.empty()) {
            index_t low = residue.back().index;
            auto it = owner.find(low);
            if (it == owner.end())
                throw std::logic_error("h-critical expansion: completion has no solution");
            std::size_t o = it->second;
            coefficient_t lambda = f.neg(f.mul(residue.back().coeff, f.inv(cols[o].back().coeff)));
            residue = merge_scaled(residue, cols[o], lambda, f);
            z = merge_scaled(z, combos[o], lambda, f);
        }
        // z was accumulated with the sign that cancels w when added; flip so
        // that dz = w and the emitted boundary is beta - z.
        for (auto& e : z) e.coeff = f.neg(e.coeff);
        return z;
    }
};

}  // namespace

std::vector<raw_generator> expand_h_critical(const std::vector<multicritical_generator>& gens,
                                             const field_t& field) {
    expansion_state state(field);
    // per input position: copy output positions with their numeric grades,
    // sorted by ascending x (descending y)
    struct copy_set {
        std::vector<index_t> pos;
        std::vector<double> x, y;
    };
    std::vector<copy_set> copies(gens.size());

    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const multicritical_generator& g = gens[gi];
        if (g.critical_grades.empty())
            throw validation_error("generator " + std::to_string(gi) + " has no critical grades");
        std::vector<double> px, py;
        std::vector<std::array<std::string, 2>> raw_grades = g.critical_grades;
        std::sort(raw_grades.begin(), raw_grades.end(),
                  [](const std::array<std::string, 2>& a, const std::array<std::string, 2>& b) {
                      return parse_coordinate(a[0]) < parse_coordinate(b[0]);
                  });
        for (const auto& [xs, ys] : raw_grades) {
            px.push_back(parse_coordinate(xs));
            py.push_back(parse_coordinate(ys));
        }
        for (std::size_t a = 0; a < px.size(); ++a)
            for (std::size_t b = a + 1; b < px.size(); ++b)
                if ((px[a] <= px[b] && py[a] <= py[b]) || (px[b] <= px[a] && py[b] <= py[a]))
                    throw validation_error("generator " + std::to_string(gi) +
                                           ": critical grades are not an antichain");
        for (const entry_t& e : g.boundary)
            if (e.index < 0 || e.index >= static_cast<index_t>(gi))
                throw validation_error("generator " + std::to_string(gi) +
                                       " references position " + std::to_string(e.index) +
                                       " which does not precede it");

        const std::size_t h = px.size();
        copy_set& cs = copies[gi];
        for (std::size_t j = 0; j < h; ++j) {
            // resolve each reference to the copy of maximal x at or below p_j
            std::vector<entry_t> beta;
            for (const entry_t& e : g.boundary) {
                const copy_set& ref = copies[static_cast<std::size_t>(e.index)];
                index_t chosen = no_index;
                for (std::size_t c = 0; c < ref.pos.size(); ++c)
                    if (ref.x[c] <= px[j] && ref.y[c] <= py[j]) chosen = ref.pos[c];
                if (chosen == no_index)
                    throw validation_error(
                        "generator " + std::to_string(gi) + ": no copy of generator " +
                        std::to_string(e.index) + " exists at or below one of its grades");
                beta.push_back({chosen, e.coeff});
            }
            canonicalize_entries(beta, field);
            std::vector<entry_t> w = state.boundary_of_chain(beta);
            if (!w.empty())
                beta = merge_scaled(beta, state.solve(w, g.dim - 1, px[j], py[j]),
                                    field.neg(1), field);
            raw_generator copy;
            copy.dim = g.dim;
            copy.x = raw_grades[j][0];
            copy.y = raw_grades[j][1];
            index_t pos = state.emit(std::move(copy), px[j], py[j], std::move(beta));
            cs.pos.push_back(pos);
            cs.x.push_back(px[j]);
            cs.y.push_back(py[j]);
        }
        for (std::size_t j = 0; j + 1 < h; ++j) {
            // connector at the least upper bound of consecutive copies
            std::vector<entry_t> beta = {{cs.pos[j], 1}, {cs.pos[j + 1], field.neg(1)}};
            canonicalize_entries(beta, field);
            double qx = cs.x[j + 1], qy = cs.y[j];
            std::vector<entry_t> w = state.boundary_of_chain(beta);
            if (!w.empty())
                beta = merge_scaled(beta, state.solve(w, g.dim, qx, qy), field.neg(1), field);
            raw_generator conn;
            conn.dim = g.dim + 1;
            conn.x = raw_grades[j + 1][0];
            conn.y = raw_grades[j][1];
            state.emit(std::move(conn), qx, qy, std::move(beta));
        }
    }
    return std::move(state.out);
}

mesh_t parse_off(std::istream& in) {
    mesh_t mesh;
    std::string line;
    int line_no = 0;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> row_lines;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = tokenize(strip_comment(line));
        if (tokens.empty()) continue;
        rows.push_back(std::move(tokens));
        row_lines.push_back(line_no);
    }
    if (rows.empty()) throw parse_error("empty OFF input", 1);
    std::size_t r = 0;
    std::vector<std::string> counts;
    if (rows[0][0] == "OFF") {
        counts.assign(rows[0].begin() + 1, rows[0].end());
        ++r;
    }
    if (counts.empty()) {
        if (r >= rows.size()) throw parse_error("missing OFF counts", row_lines.back());
        counts = rows[r++];
    }
    if (counts.size() < 2) throw parse_error("expected 'nv nf [ne]'", row_lines[r - 1]);
    index_t nv = parse_int(counts[0], row_lines[r - 1], "vertex count");
    index_t nf = parse_int(counts[1], row_lines[r - 1], "face count");
    if (nv < 0 || nf < 0) throw parse_error("negative count", row_lines[r - 1]);

    for (index_t v = 0; v < nv; ++v, ++r) {
        if (r >= rows.size()) throw parse_error("missing vertex rows", row_lines.back());
        if (rows[r].size() < 2) throw parse_error("vertex needs at least x and y", row_lines[r]);
        checked_coordinate(rows[r][0], row_lines[r]);
        checked_coordinate(rows[r][1], row_lines[r]);
        mesh.vertex_filtration.push_back({rows[r][0], rows[r][1]});
    }
    for (index_t fc = 0; fc < nf; ++fc, ++r) {
        if (r >= rows.size()) throw parse_error("missing face rows", row_lines.back());
        index_t k = parse_int(rows[r][0], row_lines[r], "face size");
        if (k < 1 || static_cast<std::size_t>(k) + 1 > rows[r].size())
            throw parse_error("face size does not match row", row_lines[r]);
        std::vector<index_t> face;
        for (index_t i = 0; i < k; ++i) {
            index_t v = parse_int(rows[r][static_cast<std::size_t>(i) + 1], row_lines[r], "vertex id");
            if (v < 0 || v >= nv) throw parse_error("vertex id out of range", row_lines[r]);
            face.push_back(v);
        }
        mesh.faces.push_back(std::move(face));
    }
    return mesh;
}

std::vector<raw_generator> mesh_bifiltration(const mesh_t& mesh, const field_t& field) {
    const index_t nv = static_cast<index_t>(mesh.vertex_filtration.size());
    std::vector<double> vx(static_cast<std::size_t>(nv)), vy(static_cast<std::size_t>(nv));
    for (index_t v = 0; v < nv; ++v) {
        vx[static_cast<std::size_t>(v)] = parse_coordinate(mesh.vertex_filtration[static_cast<std::size_t>(v)][0]);
        vy[static_cast<std::size_t>(v)] = parse_coordinate(mesh.vertex_filtration[static_cast<std::size_t>(v)][1]);
    }

    std::set<std::vector<index_t>> census;
    std::set<std::vector<index_t>> explicit_faces;
    for (const auto& face : mesh.faces) {
        std::vector<index_t> sorted = face;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw validation_error("mesh face repeats a vertex");
        if (sorted.size() > 12) throw validation_error("mesh face too large to be a simplex");
        if (!explicit_faces.insert(sorted).second)
            throw validation_error("duplicate simplex in mesh face list");
        const std::size_t s = sorted.size();
        for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
            std::vector<index_t> sub;
            for (std::size_t b = 0; b < s; ++b)
                if (mask & (1u << b)) sub.push_back(sorted[b]);
            census.insert(std::move(sub));
        }
    }
    for (index_t v = 0; v < nv; ++v) census.insert({v});

    std::vector<std::vector<index_t>> simplices(census.begin(), census.end());
    std::sort(simplices.begin(), simplices.end(),
              [](const std::vector<index_t>& a, const std::vector<index_t>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    std::map<std::vector<index_t>, index_t> position;
    for (std::size_t i = 0; i < simplices.size(); ++i)
        position.emplace(simplices[i], static_cast<index_t>(i));

    std::vector<raw_generator> out;
    out.reserve(simplices.size());
    for (const auto& simplex : simplices) {
        raw_generator g;
        g.dim = static_cast<dim_t>(simplex.size()) - 1;
        index_t best_x = simplex[0], best_y = simplex[0];
        for (index_t v : simplex) {
            if (vx[static_cast<std::size_t>(v)] > vx[static_cast<std::size_t>(best_x)]) best_x = v;
            if (vy[static_cast<std::size_t>(v)] > vy[static_cast<std::size_t>(best_y)]) best_y = v;
        }
        g.x = mesh.vertex_filtration[static_cast<std::size_t>(best_x)][0];
        g.y = mesh.vertex_filtration[static_cast<std::size_t>(best_y)][1];
        if (simplex.size() > 1) {
            for (std::size_t j = 0; j < simplex.size(); ++j) {
                std::vector<index_t> facet;
                for (std::size_t l = 0; l < simplex.size(); ++l)
                    if (l != j) facet.push_back(simplex[l]);
                coefficient_t coeff = (j % 2 == 0) ? 1 : field.neg(1);
                g.boundary.push_back({position.at(facet), coeff});
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

void write_native(const bifiltered_complex& complex, std::ostream& out) {
    out << "mpchunk-scc 1\n";
    out << "field " << complex.field.p << "\n";
    for (const column_t& col : complex.columns) {
        out << "gen " << col.dim << ' ' << complex.x_values[static_cast<std::size_t>(col.grade.x)]
            << ' ' << complex.y_values[static_cast<std::size_t>(col.grade.y)] << " ;";
        for (const entry_t& e : col.boundary.entries()) {
            out << ' ' << e.index;
            if (e.coeff != 1) out << ':' << e.coeff;
        }
        out << '\n';
    }
}

std::string to_native(const bifiltered_complex& complex) {
    std::ostringstream out;
    write_native(complex, out);
    return out.str();
}

bifiltered_complex load_any(std::istream& in, std::optional<coefficient_t> field_override) {
    switch (detect_format(in)) {
        case input_format::multicritical: {
            auto [gens, field] = parse_multicritical(in, field_override);
            return sort_and_index(expand_h_critical(gens, field), field);
        }
        case input_format::off: {
            field_t field(field_override.value_or(2));
            return sort_and_index(mesh_bifiltration(parse_off(in), field), field);
        }
        case input_format::native:
        default: {
            auto [gens, field] = parse_native(in, field_override);
            return sort_and_index(gens, field);
        }
    }
}

}  // namespace mpchunk::ingest
