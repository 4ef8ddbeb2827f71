#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tale/relation.hpp"
#include "tale/search.hpp"

namespace tale {

/// One ranked dependency with attribute names resolved.
struct RankedRow {
    std::vector<std::string> lhs;
    std::string rhs;
    double mu_plus = 0.0;
    MeasureResult diag;
};

struct BenchInfo {
    SearchStats base_stats;
    SearchStats opt_stats;
    double pratio = 0.0;  // 1 - #ECN_opt / #ECN_base
    double speedup = 0.0; // time_base / time_opt
    bool identical = true;
};

struct RunReport {
    std::string dataset;
    std::int64_t rows = 0;
    int attributes = 0;
    int k = 0;
    int max_lhs = 0;
    std::string algorithm; // "base", "opt" or "bench"
    std::vector<RankedRow> results;
    SearchStats stats; // the reported engine's stats (opt's in bench mode)
    std::optional<BenchInfo> bench;
};

inline std::vector<RankedRow> resolve_names(const Relation& rel,
                                            const std::vector<ScoredAfd>& ranked) {
    std::vector<RankedRow> rows;
    rows.reserve(ranked.size());
    for (const auto& afd : ranked) {
        RankedRow row;
        for (int a : afd.lhs)
            row.lhs.push_back(rel.schema().attribute_names[static_cast<std::size_t>(a)]);
        row.rhs = rel.schema().attribute_names[static_cast<std::size_t>(afd.rhs)];
        row.mu_plus = afd.score;
        row.diag = afd.diagnostics;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

/// The double whose shortest round-trip representation is the 6-decimal
/// rounding of v; keeps JSON numbers byte-stable at 6 decimals.
inline double round6(double v) {
    return std::stod(fixed6(v));
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0)
            out += sep;
        out += parts[i];
    }
    return out;
}

inline nlohmann::json stats_json(const SearchStats& s) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : s.per_level)
        levels.push_back({{"level", l.level},
                          {"candidates", l.candidates},
                          {"evaluated", l.evaluated},
                          {"elapsed_seconds", round6(l.elapsed_seconds)}});
    return {{"evaluated_candidates", s.evaluated_candidates},
            {"exact_fds", s.exact_fd_count},
            {"pruned_exact_fd", s.pruned_by_exact_fd},
            {"pruned_upper_bound", s.pruned_by_upper_bound},
            {"skipped_degenerate", s.skipped_degenerate},
            {"elapsed_seconds", round6(s.elapsed_seconds)},
            {"levels", std::move(levels)}};
}

} // namespace detail

inline void render_table(std::ostream& out, const RunReport& report) {
    out << "dataset: " << report.dataset << "  (" << report.rows << " rows, "
        << report.attributes << " attributes)\n";
    out << "algorithm: " << report.algorithm << "  k=" << report.k
        << "  max-lhs=" << report.max_lhs << "\n\n";

    if (report.results.empty()) {
        out << "no approximate dependencies found\n";
    } else {
        out << "rank  mu+       d_X       valid     dependency\n";
        int rank = 1;
        for (const auto& row : report.results) {
            char line[64];
            std::snprintf(line, sizeof(line), "%-5d %-9s %-9lld %-9lld ", rank++,
                          detail::fixed6(row.mu_plus).c_str(),
                          static_cast<long long>(row.diag.distinct_lhs),
                          static_cast<long long>(row.diag.valid_count));
            out << line << "(" << detail::join(row.lhs, ", ") << ") -> " << row.rhs << "\n";
        }
    }

    const auto& s = report.stats;
    out << "\nevaluated " << s.evaluated_candidates << " candidates ("
        << s.exact_fd_count << " exact FDs excluded, " << s.skipped_degenerate
        << " degenerate skipped) in " << detail::fixed6(s.elapsed_seconds) << "s\n";
    if (s.pruned_by_exact_fd || s.pruned_by_upper_bound)
        out << "pruned RHS bits: " << s.pruned_by_exact_fd << " by exact-FD rule, "
            << s.pruned_by_upper_bound << " by upper-bound rule\n";

    if (report.bench) {
        const auto& b = *report.bench;
        out << "\nbenchmark: base #ECN=" << b.base_stats.evaluated_candidates
            << " time=" << detail::fixed6(b.base_stats.elapsed_seconds) << "s | opt #ECN="
            << b.opt_stats.evaluated_candidates
            << " time=" << detail::fixed6(b.opt_stats.elapsed_seconds) << "s\n";
        char line[128];
        std::snprintf(line, sizeof(line), "PRatio = %.2f%%  speedup = %.2fx  results %s\n",
                      b.pratio * 100.0, b.speedup, b.identical ? "identical" : "DIVERGENT");
        out << line;
    }
}

inline void render_json(std::ostream& out, const RunReport& report) {
    nlohmann::json results = nlohmann::json::array();
    int rank = 1;
    for (const auto& row : report.results) {
        results.push_back({{"rank", rank++},
                           {"lhs", row.lhs},
                           {"rhs", row.rhs},
                           {"mu_plus", detail::round6(row.mu_plus)},
                           {"pdep_cond", detail::round6(row.diag.pdep_cond)},
                           {"pdep_marg", detail::round6(row.diag.pdep_marg)},
                           {"rho", detail::round6(row.diag.rho)},
                           {"distinct_lhs", row.diag.distinct_lhs},
                           {"valid_rows", row.diag.valid_count}});
    }
    nlohmann::json doc = {{"dataset", report.dataset},
                          {"rows", report.rows},
                          {"attributes", report.attributes},
                          {"k", report.k},
                          {"max_lhs", report.max_lhs},
                          {"algorithm", report.algorithm},
                          {"results", std::move(results)},
                          {"stats", detail::stats_json(report.stats)}};
    if (report.bench) {
        const auto& b = *report.bench;
        doc["bench"] = {{"base_stats", detail::stats_json(b.base_stats)},
                        {"opt_stats", detail::stats_json(b.opt_stats)},
                        {"pratio", detail::round6(b.pratio)},
                        {"speedup", detail::round6(b.speedup)},
                        {"identical", b.identical}};
    }
    out << doc.dump(2) << "\n";
}

inline void render_tsv(std::ostream& out, const RunReport& report) {
    out << "rank\tlhs\trhs\tmu_plus\tdistinct_lhs\tvalid_rows\n";
    int rank = 1;
    for (const auto& row : report.results) {
        out << rank++ << "\t" << detail::join(row.lhs, ",") << "\t" << row.rhs << "\t"
            << detail::fixed6(row.mu_plus) << "\t" << row.diag.distinct_lhs << "\t"
            << row.diag.valid_count << "\n";
    }
    const auto& s = report.stats;
    out << "# evaluated_candidates=" << s.evaluated_candidates
        << " exact_fds=" << s.exact_fd_count << " skipped_degenerate=" << s.skipped_degenerate
        << " elapsed_seconds=" << detail::fixed6(s.elapsed_seconds) << "\n";
    if (report.bench) {
        const auto& b = *report.bench;
        out << "# bench base_ecn=" << b.base_stats.evaluated_candidates
            << " opt_ecn=" << b.opt_stats.evaluated_candidates << " pratio="
            << detail::fixed6(b.pratio) << " speedup=" << detail::fixed6(b.speedup)
            << " identical=" << (b.identical ? "true" : "false") << "\n";
    }
}

} // namespace tale
