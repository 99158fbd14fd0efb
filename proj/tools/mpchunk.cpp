// mpchunk: reduce bifiltered chain complexes to their minimal
// quasi-isomorphic form, with an oracle-backed verify mode.
//
// Exit codes: 0 success, 1 validation failure, 2 verification mismatch,
// 3 I/O or syntax error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "mpchunk/ingest.hpp"
#include "mpchunk/oracle.hpp"
#include "mpchunk/reduce.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_verification = 2;
constexpr int exit_io = 3;

unsigned default_threads() {
    if (const char* env = std::getenv("MPCHUNK_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        std::fprintf(stderr, "warning: ignoring invalid MPCHUNK_THREADS='%s'\n", env);
    }
    return 0;  // auto
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
    return in;
}

mpchunk::bifiltered_complex load_file(const std::string& path,
                                      std::optional<mpchunk::coefficient_t> field) {
    auto in = open_input(path);
    return mpchunk::ingest::load_any(in, field);
}

void write_file(const mpchunk::bifiltered_complex& complex, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    mpchunk::ingest::write_native(complex, out);
    if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

int report_validation(const mpchunk::ingest::validation_report& report) {
    for (const auto& v : report.violations)
        std::fprintf(stderr, "validation: %s at column %lld: %s\n",
                     mpchunk::ingest::violation_kind_name(v.kind),
                     static_cast<long long>(v.column), v.detail.c_str());
    return exit_validation;
}

int run_reduce(const std::string& input, const std::string& output,
               std::optional<mpchunk::coefficient_t> field, unsigned threads) {
    auto t0 = std::chrono::steady_clock::now();
    auto complex = load_file(input, field);
    double t_prep = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto [reduced, stats] = mpchunk::chunk_reduce(std::move(complex), threads);
    write_file(reduced, output);
    std::printf("n=%lld m=%lld ell=%lld g=%lld additions=%llu t_prep=%.3f t_reduce=%.3f\n",
                static_cast<long long>(stats.n), static_cast<long long>(stats.m),
                static_cast<long long>(stats.ell), static_cast<long long>(stats.g),
                static_cast<unsigned long long>(stats.column_additions()), t_prep,
                stats.t_total());
    return exit_ok;
}

int run_verify(const std::string& original_path, const std::string& reduced_path,
               std::optional<mpchunk::coefficient_t> field, bool force) {
    auto original = load_file(original_path, field);
    auto reduced = load_file(reduced_path, field);

    auto equivalence = mpchunk::oracle::check_equivalence(original, reduced, force);
    if (equivalence.skipped_large_grid) {
        std::printf("verify: skipped, grade grid has %zu comparable pairs (guard %zu); "
                    "rerun with --force-large-grid\n",
                    equivalence.comparable_pairs, mpchunk::oracle::grid_pair_guard);
        return exit_ok;
    }
    for (const auto& m : equivalence.mismatches) {
        if (m.is_betti)
            std::printf("mismatch: betti_%d at (%g, %g): %lld vs %lld\n", m.k, m.px, m.py,
                        static_cast<long long>(m.lhs), static_cast<long long>(m.rhs));
        else
            std::printf("mismatch: rank_%d (%g, %g) -> (%g, %g): %lld vs %lld\n", m.k, m.px,
                        m.py, m.qx, m.qy, static_cast<long long>(m.lhs),
                        static_cast<long long>(m.rhs));
    }

    auto optimality = mpchunk::oracle::check_optimality(original, reduced, force);
    for (const auto& v : optimality.violations)
        std::printf("optimality: at (%g, %g) dim %d: delta=%lld gamma=%lld\n", v.x, v.y, v.k,
                    static_cast<long long>(v.delta_value),
                    static_cast<long long>(v.gamma_value));

    bool ok = equivalence.ok && optimality.ok;
    std::printf("equivalence=%s optimality=%s\n", equivalence.ok ? "ok" : "mismatch",
                optimality.ok ? "ok" : "mismatch");
    return ok ? exit_ok : exit_verification;
}

int run_stats(const std::string& input, std::optional<mpchunk::coefficient_t> field) {
    auto complex = load_file(input, field);
    auto report = mpchunk::ingest::validate(complex);
    if (!report.ok) return report_validation(report);

    std::map<mpchunk::dim_t, mpchunk::index_t> per_dim;
    for (const auto& col : complex.columns) ++per_dim[col.dim];
    std::map<mpchunk::index_t, mpchunk::index_t> histogram;
    mpchunk::index_t ell = 0;
    for (const auto& chunk : mpchunk::chunk_views(complex)) {
        ++histogram[chunk.end - chunk.begin];
        ell = std::max(ell, chunk.end - chunk.begin);
    }

    std::printf("n=%lld m=%lld ell=%lld field=%lld\n", static_cast<long long>(complex.size()),
                static_cast<long long>(complex.chunk_starts.size()),
                static_cast<long long>(ell), static_cast<long long>(complex.field.p));
    std::printf("generators per dimension:\n");
    for (const auto& [dim, count] : per_dim)
        std::printf("  dim %d: %lld\n", dim, static_cast<long long>(count));
    std::printf("chunk size histogram:\n");
    for (const auto& [size, count] : histogram)
        std::printf("  size %lld: %lld\n", static_cast<long long>(size),
                    static_cast<long long>(count));
    return exit_ok;
}

int run_convert(const std::string& input, const std::string& output,
                std::optional<mpchunk::coefficient_t> field) {
    write_file(load_file(input, field), output);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chunk reduction of bifiltered chain complexes"};
    app.require_subcommand(1);

    std::string input, second_input, output, filters = "xy";
    std::optional<mpchunk::coefficient_t> field;
    unsigned threads = default_threads();
    bool force = false;

    auto add_field = [&](CLI::App* cmd) {
        cmd->add_option("--field", field, "prime field characteristic (default: file header or 2)");
    };

    auto* reduce = app.add_subcommand("reduce", "reduce a complex to its minimal form");
    reduce->add_option("input", input, "input file (.scc, .mcc, or OFF)")->required();
    reduce->add_option("-o,--output", output, "output file")->required();
    reduce->add_option("--threads", threads, "worker threads (default: all cores)");
    reduce->add_option("--filters", filters, "mesh filtration to use (only 'xy')")
        ->check(CLI::IsMember({"xy"}));
    add_field(reduce);

    auto* verify = app.add_subcommand("verify", "oracle-check a reduction result");
    verify->add_option("original", input, "original complex")->required();
    verify->add_option("reduced", second_input, "reduced complex")->required();
    verify->add_flag("--force-large-grid", force, "run the oracle even on large grade grids");
    add_field(verify);

    auto* stats = app.add_subcommand("stats", "validate and summarize a complex");
    stats->add_option("input", input, "input file")->required();
    add_field(stats);

    auto* convert = app.add_subcommand("convert", "convert OFF or multi-critical input to native form");
    convert->add_option("input", input, "input file")->required();
    convert->add_option("-o,--output", output, "output file")->required();
    convert->add_option("--filters", filters, "mesh filtration to use (only 'xy')")
        ->check(CLI::IsMember({"xy"}));
    add_field(convert);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_io;
    }

    try {
        if (reduce->parsed()) return run_reduce(input, output, field, threads);
        if (verify->parsed()) return run_verify(input, second_input, field, force);
        if (stats->parsed()) return run_stats(input, field);
        if (convert->parsed()) return run_convert(input, output, field);
    } catch (const mpchunk::ingest::parse_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io;
    } catch (const mpchunk::ingest::validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io;
    }
    return exit_io;
}
