#pragma once

// Deterministic builders for test inputs: hand fixtures, random bifiltered
// simplicial complexes, random multi-critical inputs, and triangulated grid
// meshes. Everything is driven by a caller-seeded engine so runs reproduce.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mpchunk/core.hpp"
#include "mpchunk/ingest.hpp"
#include "mpchunk/oracle.hpp"
#include "mpchunk/reduce.hpp"

namespace mpchunk::testgen {

struct gen_spec {
    int x;
    int y;
    dim_t dim;
    std::vector<entry_t> boundary;  // positions in this list
};

inline bifiltered_complex make_complex(const std::vector<gen_spec>& specs, coefficient_t p = 2) {
    std::vector<ingest::raw_generator> raw;
    raw.reserve(specs.size());
    for (const gen_spec& s : specs) {
        ingest::raw_generator g;
        g.x = std::to_string(s.x);
        g.y = std::to_string(s.y);
        g.dim = s.dim;
        g.boundary = s.boundary;
        raw.push_back(std::move(g));
    }
    return ingest::sort_and_index(raw, field_t(p));
}

// two vertices merged by an edge that enters with the second vertex
inline bifiltered_complex vertex_pair_with_edge(coefficient_t p = 2) {
    return make_complex({{0, 0, 0, {}}, {1, 0, 0, {}}, {1, 0, 1, {{0, 1}, {1, p - 1}}}}, p);
}

// two incomparable vertices joined by an edge at their least upper bound
inline bifiltered_complex incomparable_vertices_with_edge(coefficient_t p = 2) {
    return make_complex({{1, 0, 0, {}}, {0, 1, 0, {}}, {1, 1, 1, {{0, 1}, {1, p - 1}}}}, p);
}

// full triangle, all seven simplices at one grade
inline bifiltered_complex filled_triangle_one_chunk(coefficient_t p = 2) {
    const coefficient_t m = p - 1;
    return make_complex({{0, 0, 0, {}},
                         {0, 0, 0, {}},
                         {0, 0, 0, {}},
                         {0, 0, 1, {{1, 1}, {0, m}}},   // e01
                         {0, 0, 1, {{2, 1}, {0, m}}},   // e02
                         {0, 0, 1, {{2, 1}, {1, m}}},   // e12
                         {0, 0, 2, {{5, 1}, {4, m}, {3, 1}}}},
                        p);
}

// hollow triangle: vertices at one grade, edges at a strictly larger one
inline bifiltered_complex hollow_triangle_two_grades(coefficient_t p = 2) {
    const coefficient_t m = p - 1;
    return make_complex({{0, 0, 0, {}},
                         {0, 0, 0, {}},
                         {0, 0, 0, {}},
                         {1, 1, 1, {{1, 1}, {0, m}}},
                         {1, 1, 1, {{2, 1}, {0, m}}},
                         {1, 1, 1, {{2, 1}, {1, m}}}},
                        p);
}

struct random_options {
    int grid = 4;  // grades drawn from [0, grid) x [0, grid)
    int min_vertices = 3;
    int max_vertices = 9;
    double edge_prob = 0.45;
    double tri_prob = 0.5;
    double tet_prob = 0.5;
    double grade_bump_prob = 0.35;  // chance to push a simplex above its faces
    std::size_t max_generators = 60;
    coefficient_t p = 2;
    int scramble_additions = 0;  // random order-preserving additions afterwards
};

namespace detail {

struct simplex_pool {
    std::vector<std::vector<int>> simplices;  // dim-major, each sorted ascending
    std::map<std::vector<int>, std::size_t> position;
};

inline simplex_pool random_skeleton(std::mt19937& rng, const random_options& opts) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int nv = opts.min_vertices +
             static_cast<int>(rng() % static_cast<unsigned>(opts.max_vertices - opts.min_vertices + 1));
    std::set<std::vector<int>> have;
    std::vector<std::vector<int>> verts, edges, tris, tets;
    for (int v = 0; v < nv; ++v) verts.push_back({v});
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b)
            if (coin(rng) < opts.edge_prob) {
                edges.push_back({a, b});
                have.insert(edges.back());
            }
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b)
            for (int c = b + 1; c < nv; ++c)
                if (have.count({a, b}) && have.count({a, c}) && have.count({b, c}) &&
                    coin(rng) < opts.tri_prob) {
                    tris.push_back({a, b, c});
                    have.insert(tris.back());
                }
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b)
            for (int c = b + 1; c < nv; ++c)
                for (int d = c + 1; d < nv; ++d)
                    if (have.count({a, b, c}) && have.count({a, b, d}) && have.count({a, c, d}) &&
                        have.count({b, c, d}) && coin(rng) < opts.tet_prob)
                        tets.push_back({a, b, c, d});
    while (verts.size() + edges.size() + tris.size() + tets.size() > opts.max_generators) {
        if (!tets.empty())
            tets.pop_back();
        else if (!tris.empty())
            tris.pop_back();
        else if (!edges.empty())
            edges.pop_back();
        else
            break;
    }
    // dropping triangles may orphan tetrahedra; drop those too
    std::set<std::vector<int>> kept_tris(tris.begin(), tris.end());
    std::erase_if(tets, [&](const std::vector<int>& t) {
        for (std::size_t j = 0; j < 4; ++j) {
            std::vector<int> face;
            for (std::size_t l = 0; l < 4; ++l)
                if (l != j) face.push_back(t[l]);
            if (!kept_tris.count(face)) return true;
        }
        return false;
    });

    simplex_pool pool;
    for (auto* group : {&verts, &edges, &tris, &tets})
        for (auto& s : *group) {
            pool.position.emplace(s, pool.simplices.size());
            pool.simplices.push_back(s);
        }
    return pool;
}

}  // namespace detail

inline bifiltered_complex random_complex(std::mt19937& rng, const random_options& opts) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    detail::simplex_pool pool = detail::random_skeleton(rng, opts);
    auto rand_coord = [&] { return static_cast<int>(rng() % static_cast<unsigned>(opts.grid)); };

    std::vector<std::pair<int, int>> grades(pool.simplices.size());
    std::vector<ingest::raw_generator> raw(pool.simplices.size());
    for (std::size_t i = 0; i < pool.simplices.size(); ++i) {
        const auto& s = pool.simplices[i];
        int gx = 0, gy = 0;
        if (s.size() == 1) {
            gx = rand_coord();
            gy = rand_coord();
        } else {
            for (std::size_t j = 0; j < s.size(); ++j) {
                std::vector<int> facet;
                for (std::size_t l = 0; l < s.size(); ++l)
                    if (l != j) facet.push_back(s[l]);
                auto [fx, fy] = grades[pool.position.at(facet)];
                gx = std::max(gx, fx);
                gy = std::max(gy, fy);
            }
            if (coin(rng) < opts.grade_bump_prob) {
                gx = std::max(gx, rand_coord());
                gy = std::max(gy, rand_coord());
            }
        }
        grades[i] = {gx, gy};
        raw[i].x = std::to_string(gx);
        raw[i].y = std::to_string(gy);
        raw[i].dim = static_cast<dim_t>(s.size()) - 1;
        if (s.size() > 1)
            for (std::size_t j = 0; j < s.size(); ++j) {
                std::vector<int> facet;
                for (std::size_t l = 0; l < s.size(); ++l)
                    if (l != j) facet.push_back(s[l]);
                coefficient_t coeff = (j % 2 == 0) ? 1 : opts.p - 1;
                raw[i].boundary.push_back({static_cast<index_t>(pool.position.at(facet)), coeff});
            }
    }
    bifiltered_complex complex = ingest::sort_and_index(raw, field_t(opts.p));

    for (int done = 0, attempts = 0;
         done < opts.scramble_additions && attempts < 20 * opts.scramble_additions; ++attempts) {
        if (complex.size() < 2) break;
        index_t i1 = static_cast<index_t>(rng() % static_cast<unsigned>(complex.size()));
        index_t i2 = static_cast<index_t>(rng() % static_cast<unsigned>(complex.size()));
        if (i1 == i2) continue;
        const column_t& a = complex.columns[static_cast<std::size_t>(i1)];
        const column_t& b = complex.columns[static_cast<std::size_t>(i2)];
        if (a.dim != b.dim || !grade_leq(a.grade, b.grade)) continue;
        coefficient_t lambda = 1 + static_cast<coefficient_t>(rng() % static_cast<unsigned>(opts.p - 1));
        order_preserving_addition(complex, i1, i2, lambda);
        ++done;
    }
    return complex;
}

// A valid h-critical bifiltration over the grid: every critical grade of a
// simplex dominates at least one critical grade of each of its faces.
inline std::vector<ingest::multicritical_generator> random_multicritical(
    std::mt19937& rng, int grid, int h_max, coefficient_t p) {
    random_options opts;
    opts.grid = grid;
    opts.min_vertices = 3;
    opts.max_vertices = 6;
    opts.tet_prob = 0.3;
    opts.max_generators = 30;
    opts.p = p;
    detail::simplex_pool pool = detail::random_skeleton(rng, opts);

    auto pareto_min = [](std::vector<std::pair<int, int>> pts) {
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        std::vector<std::pair<int, int>> keep;
        for (const auto& q : pts) {
            bool dominated = false;
            for (const auto& r : pts)
                if (r != q && r.first <= q.first && r.second <= q.second) {
                    dominated = true;
                    break;
                }
            if (!dominated) keep.push_back(q);
        }
        return keep;
    };

    std::vector<std::vector<std::pair<int, int>>> crit(pool.simplices.size());
    std::vector<ingest::multicritical_generator> out(pool.simplices.size());
    auto rand_coord = [&] { return static_cast<int>(rng() % static_cast<unsigned>(grid)); };
    for (std::size_t i = 0; i < pool.simplices.size(); ++i) {
        const auto& s = pool.simplices[i];
        std::vector<std::pair<int, int>> candidates;
        int samples = 1 + static_cast<int>(rng() % static_cast<unsigned>(h_max));
        for (int t = 0; t < samples; ++t) {
            int gx = 0, gy = 0;
            if (s.size() == 1) {
                gx = rand_coord();
                gy = rand_coord();
            } else {
                for (std::size_t j = 0; j < s.size(); ++j) {
                    std::vector<int> facet;
                    for (std::size_t l = 0; l < s.size(); ++l)
                        if (l != j) facet.push_back(s[l]);
                    const auto& fc = crit[pool.position.at(facet)];
                    const auto& pick = fc[rng() % fc.size()];
                    gx = std::max(gx, pick.first);
                    gy = std::max(gy, pick.second);
                }
                if (rng() % 3 == 0) {
                    gx = std::max(gx, rand_coord());
                    gy = std::max(gy, rand_coord());
                }
            }
            candidates.push_back({gx, gy});
        }
        crit[i] = pareto_min(std::move(candidates));
        if (crit[i].size() > static_cast<std::size_t>(h_max)) crit[i].resize(static_cast<std::size_t>(h_max));

        out[i].dim = static_cast<dim_t>(s.size()) - 1;
        for (const auto& [gx, gy] : crit[i])
            out[i].critical_grades.push_back({std::to_string(gx), std::to_string(gy)});
        if (s.size() > 1)
            for (std::size_t j = 0; j < s.size(); ++j) {
                std::vector<int> facet;
                for (std::size_t l = 0; l < s.size(); ++l)
                    if (l != j) facet.push_back(s[l]);
                coefficient_t coeff = (j % 2 == 0) ? 1 : p - 1;
                out[i].boundary.push_back({static_cast<index_t>(pool.position.at(facet)), coeff});
            }
    }
    return out;
}

// Betti number of the multi-critical sublevel complex at numeric (vx, vy):
// a generator is present as a single symbol when one of its critical grades
// is <= (vx, vy). Independent of the 1-critical expansion path.
inline index_t multicritical_betti(const std::vector<ingest::multicritical_generator>& gens,
                                   const field_t& f, double vx, double vy, dim_t k) {
    std::vector<index_t> keep;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        bool present = false;
        for (const auto& [gx, gy] : gens[i].critical_grades)
            if (parse_coordinate(gx) <= vx && parse_coordinate(gy) <= vy) {
                present = true;
                break;
            }
        if (present) keep.push_back(static_cast<index_t>(i));
    }
    std::vector<index_t> pos(gens.size(), no_index);
    for (std::size_t j = 0; j < keep.size(); ++j)
        pos[static_cast<std::size_t>(keep[j])] = static_cast<index_t>(j);
    std::vector<std::vector<entry_t>> cols(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j)
        for (const entry_t& e : gens[static_cast<std::size_t>(keep[j])].boundary) {
            index_t r = pos[static_cast<std::size_t>(e.index)];
            if (r == no_index) throw std::logic_error("multicritical sublevel is not closed");
            cols[j].push_back({r, e.coeff});
        }
    auto red = oracle::standard_reduce(std::move(cols), f);
    index_t zeros_k = 0, killers = 0;
    for (std::size_t j = 0; j < keep.size(); ++j) {
        dim_t d = gens[static_cast<std::size_t>(keep[j])].dim;
        if (d == k && red.lowest[j] == no_index) ++zeros_k;
        if (d == k + 1 && red.lowest[j] != no_index) ++killers;
    }
    return zeros_k - killers;
}

// All distinct critical coordinate values of a multi-critical input.
inline std::pair<std::vector<double>, std::vector<double>> multicritical_grid(
    const std::vector<ingest::multicritical_generator>& gens) {
    std::set<double> xs, ys;
    for (const auto& g : gens)
        for (const auto& [gx, gy] : g.critical_grades) {
            xs.insert(parse_coordinate(gx));
            ys.insert(parse_coordinate(gy));
        }
    return {{xs.begin(), xs.end()}, {ys.begin(), ys.end()}};
}

// Triangulated nx x ny grid; vertex (i, j) filters at (i, j), optionally
// perturbed by a deterministic sub-cell jitter so coordinates are in
// (near-)general position.
inline ingest::mesh_t grid_mesh(int nx, int ny, bool jitter = false) {
    ingest::mesh_t mesh;
    auto id = [nx](int i, int j) { return static_cast<index_t>(j) * nx + i; };
    auto coord = [&](int base, int salt) {
        if (!jitter) return std::to_string(base);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%d.%02d", base, salt);
        return std::string(buf);
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.vertex_filtration.push_back(
                {coord(i, (i * 73 + j * 37) % 11), coord(j, (i * 41 + j * 97) % 13)});
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            mesh.faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
            mesh.faces.push_back({id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)});
        }
    return mesh;
}

}  // namespace mpchunk::testgen
