#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tale/csv.hpp"
#include "tale/oracle.hpp"
#include "tale/report.hpp"
#include "tale/search.hpp"

namespace tale::cli {

// Exit codes: 0 success, 1 ingestion/IO failure, 2 usage error,
// 3 engine divergence in bench mode.
enum ExitCode : int {
    kOk = 0,
    kIngestionError = 1,
    kUsageError = 2,
    kDivergence = 3,
};

namespace detail {

struct DatasetOpts {
    std::string file;
    std::string delimiter = ",";
    std::string null_token;
    bool no_header = false;
};

struct SearchOpts {
    int k = 20;
    int max_lhs = 5;
    bool disable_ub_pruning = false;
    bool disable_fd_pruning = false;
};

inline void add_dataset_options(CLI::App* cmd, DatasetOpts& opts) {
    cmd->add_option("file", opts.file, "input CSV file")->required();
    cmd->add_option("--delimiter", opts.delimiter, "field delimiter (single character, or \\t)");
    cmd->add_option("--null-token", opts.null_token,
                    "cells equal to this token (and empty cells) are NULL");
    cmd->add_flag("--no-header", opts.no_header,
                  "first row is data; attribute names become col0..colN");
}

inline void add_search_options(CLI::App* cmd, SearchOpts& opts) {
    cmd->add_option("--k", opts.k, "number of dependencies to return")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-lhs", opts.max_lhs, "maximum LHS size L")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--disable-ub-pruning", opts.disable_ub_pruning,
                  "turn off upper-bound pruning (strict guarantees under NULLs)");
    cmd->add_flag("--disable-fd-pruning", opts.disable_fd_pruning,
                  "turn off exact-FD pruning");
}

inline char parse_delimiter(const std::string& d) {
    if (d == "\\t")
        return '\t';
    if (d.size() != 1)
        throw CLI::ValidationError("--delimiter", "must be a single character or \\t");
    return d[0];
}

inline Relation load_dataset(const DatasetOpts& opts) {
    CsvOptions csv;
    csv.delimiter = parse_delimiter(opts.delimiter);
    csv.has_header = !opts.no_header;
    csv.null_token = opts.null_token;
    return load_csv_file(opts.file, csv);
}

inline SearchConfig to_config(const SearchOpts& opts) {
    SearchConfig cfg;
    cfg.k = opts.k;
    cfg.max_lhs_size = opts.max_lhs;
    cfg.ub_pruning_enabled = !opts.disable_ub_pruning;
    cfg.exact_fd_pruning_enabled = !opts.disable_fd_pruning;
    return cfg;
}

inline void render(std::ostream& out, const std::string& format, const RunReport& report) {
    if (format == "json")
        render_json(out, report);
    else if (format == "tsv")
        render_tsv(out, report);
    else
        render_table(out, report);
}

inline RunReport make_report(const DatasetOpts& data, const Relation& rel,
                             const SearchConfig& cfg, const std::string& algorithm,
                             const SearchResult& result) {
    RunReport report;
    report.dataset = std::filesystem::path(data.file).filename().string();
    report.rows = rel.row_count();
    report.attributes = rel.attribute_count();
    report.k = cfg.k;
    report.max_lhs = cfg.max_lhs_size;
    report.algorithm = algorithm;
    report.results = resolve_names(rel, result.ranked);
    report.stats = result.stats;
    return report;
}

/// Element-wise comparison of two ranked lists; scores must agree to 1e-12.
inline bool results_identical(const std::vector<ScoredAfd>& a, const std::vector<ScoredAfd>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].lhs != b[i].lhs || a[i].rhs != b[i].rhs)
            return false;
        if (std::fabs(a[i].score - b[i].score) > 1e-12)
            return false;
    }
    return true;
}

} // namespace detail

inline int cmd_discover(const detail::DatasetOpts& data, const detail::SearchOpts& search,
                        const std::string& algo, const std::string& format, std::ostream& out,
                        std::ostream& err) {
    Relation rel;
    try {
        rel = detail::load_dataset(data);
    } catch (const CsvError& e) {
        err << "error: " << e.what() << "\n";
        return kIngestionError;
    }
    const SearchConfig cfg = detail::to_config(search);
    const SearchResult result = algo == "base" ? run_base(rel, cfg) : run_opt(rel, cfg);
    detail::render(out, format, detail::make_report(data, rel, cfg, algo, result));
    return kOk;
}

inline int cmd_bench(const detail::DatasetOpts& data, const detail::SearchOpts& search,
                     const std::string& format, std::ostream& out, std::ostream& err) {
    Relation rel;
    try {
        rel = detail::load_dataset(data);
    } catch (const CsvError& e) {
        err << "error: " << e.what() << "\n";
        return kIngestionError;
    }
    const SearchConfig cfg = detail::to_config(search);
    const SearchResult base = run_base(rel, cfg);
    const SearchResult opt = run_opt(rel, cfg);

    BenchInfo bench;
    bench.base_stats = base.stats;
    bench.opt_stats = opt.stats;
    bench.pratio = base.stats.evaluated_candidates > 0
                       ? 1.0 - static_cast<double>(opt.stats.evaluated_candidates) /
                                   static_cast<double>(base.stats.evaluated_candidates)
                       : 0.0;
    bench.speedup = opt.stats.elapsed_seconds > 0.0
                        ? base.stats.elapsed_seconds / opt.stats.elapsed_seconds
                        : 0.0;
    bench.identical = detail::results_identical(base.ranked, opt.ranked);

    RunReport report = detail::make_report(data, rel, cfg, "bench", base);
    report.bench = bench;
    detail::render(out, format, report);

    if (!bench.identical) {
        err << "WARNING: base and opt engines returned different top-k lists; "
               "this is a correctness alarm. Re-run with --disable-ub-pruning for "
               "strict guarantees on NULL-bearing data.\n";
        return kDivergence;
    }
    return kOk;
}

struct SynthOpts {
    std::string out_file;
    std::int64_t rows = 1000;
    int cols = 6;
    std::vector<std::uint32_t> cardinalities = {8};
    double null_prob = 0.0;
    std::uint64_t seed = 1;
    std::vector<int> planted_lhs;
    int planted_rhs = -1;
    double noise_rate = 0.0;
};

inline int cmd_synth(const SynthOpts& opts, std::ostream& /*out*/, std::ostream& err) {
    oracle::SynthSpec spec;
    spec.row_count = opts.rows;
    spec.attribute_count = opts.cols;
    spec.cardinalities = opts.cardinalities;
    spec.null_probability = opts.null_prob;
    spec.rng_seed = opts.seed;
    if (!opts.planted_lhs.empty()) {
        if (opts.planted_rhs < 0) {
            err << "error: --planted-lhs requires --planted-rhs\n";
            return kUsageError;
        }
        spec.planted = oracle::SynthSpec::Planted{opts.planted_lhs, opts.planted_rhs,
                                                  opts.noise_rate};
    }

    Relation rel;
    try {
        rel = oracle::generate(spec);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    std::ofstream file(opts.out_file, std::ios::binary);
    if (!file) {
        err << "error: cannot write file: " << opts.out_file << "\n";
        return kIngestionError;
    }
    write_csv(file, rel);
    if (!file.good()) {
        err << "error: write failed: " << opts.out_file << "\n";
        return kIngestionError;
    }
    return kOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Global top-k approximate functional dependency discovery under mu+"};
    app.require_subcommand(1);

    detail::DatasetOpts discover_data;
    detail::SearchOpts discover_search;
    std::string discover_algo = "opt";
    std::string discover_format = "table";
    auto* discover = app.add_subcommand(
        "discover", "rank the top-k approximate functional dependencies of a dataset");
    detail::add_dataset_options(discover, discover_data);
    detail::add_search_options(discover, discover_search);
    discover->add_option("--algo", discover_algo, "search engine")
        ->check(CLI::IsMember({"base", "opt"}));
    discover->add_option("--format", discover_format, "output format")
        ->check(CLI::IsMember({"table", "json", "tsv"}));

    detail::DatasetOpts bench_data;
    detail::SearchOpts bench_search;
    std::string bench_format = "table";
    auto* bench = app.add_subcommand(
        "bench", "run both engines, verify identical results, report PRatio and speedup");
    detail::add_dataset_options(bench, bench_data);
    detail::add_search_options(bench, bench_search);
    bench->add_option("--format", bench_format, "output format")
        ->check(CLI::IsMember({"table", "json", "tsv"}));

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand("synth", "generate a synthetic CSV dataset");
    synth->add_option("file", synth_opts.out_file, "output CSV file")->required();
    synth->add_option("--rows", synth_opts.rows, "row count")->check(CLI::NonNegativeNumber);
    synth->add_option("--cols", synth_opts.cols, "attribute count")
        ->check(CLI::PositiveNumber);
    synth->add_option("--cardinality", synth_opts.cardinalities,
                      "distinct values per attribute (one value broadcasts)")
        ->delimiter(',');
    synth->add_option("--null-prob", synth_opts.null_prob, "per-cell NULL probability")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--seed", synth_opts.seed, "RNG seed (fully determines the output)");
    synth->add_option("--planted-lhs", synth_opts.planted_lhs,
                      "attribute indices of a planted dependency LHS")
        ->delimiter(',');
    synth->add_option("--planted-rhs", synth_opts.planted_rhs,
                      "attribute index of the planted dependency RHS");
    synth->add_option("--noise-rate", synth_opts.noise_rate,
                      "fraction of rows violating the planted dependency")
        ->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (discover->parsed())
            return cmd_discover(discover_data, discover_search, discover_algo, discover_format,
                                out, err);
        if (bench->parsed())
            return cmd_bench(bench_data, bench_search, bench_format, out, err);
        if (synth->parsed())
            return cmd_synth(synth_opts, out, err);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIngestionError;
    }
    return kUsageError;
}

} // namespace tale::cli
