#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "tale/relation.hpp"

namespace tale {

/// Canonical score representation: mu+ quantized to 1e-12. Candidates whose
/// scores are equal in rational arithmetic can differ by a few ulp when
/// computed through different float paths; quantizing makes them compare
/// equal, so ranking ties resolve by the deterministic tie-break instead of
/// rounding noise.
inline double quantize_score(double mu) {
    return std::round(mu * 1e12) / 1e12;
}

/// Full evaluation of one candidate X -> A over its valid tuples.
struct MeasureResult {
    double mu_plus = 0.0;       // max(0, 1 - rho); 1 for exact FDs
    double rho = 0.0;           // normalized remaining disagreement after conditioning
    double pdep_cond = 0.0;     // pdep(X -> A)
    double pdep_marg = 0.0;     // pdep(A)
    std::int64_t distinct_lhs = 0; // d_X over the valid tuples
    std::int64_t valid_count = 0;  // |r'|
    bool is_exact = false;
};

/// Frequency statistics feeding the measure. Exactness information travels as
/// structural facts (integer counts, homogeneity flag), never as a
/// floating-point comparison against 1.
struct MeasureInputs {
    std::int64_t valid_count = 0;
    std::int64_t distinct_lhs = 0;
    std::int64_t distinct_rhs = 0;
    double pdep_cond = 0.0;
    double pdep_marg = 0.0;
    bool groups_homogeneous = false; // every LHS group holds a single RHS value
};

/// pdep(X -> A): probability that two tuples drawn uniformly at random with
/// the same X-value also agree on A. Sum over groups of (|g|/n) * sum_a
/// (f_{g,a}/|g|)^2, with the per-group squared-frequency sums accumulated as
/// exact integers before any division.
inline double pdep_conditional(const GroupedFrequencies& table, std::int64_t n) {
    if (n <= 0)
        throw std::domain_error("pdep_conditional: undefined for zero valid tuples");
    double acc = 0.0;
    for (const auto& group : table.groups) {
        std::int64_t sum_sq = 0;
        for (const auto& [code, count] : group.rhs_counts)
            sum_sq += count * count;
        acc += static_cast<double>(sum_sq) / static_cast<double>(group.size);
    }
    return acc / static_cast<double>(n);
}

/// pdep(A): probability that two tuples drawn at random agree on A.
inline double pdep_marginal(const std::map<std::uint32_t, std::int64_t>& counts, std::int64_t n) {
    if (n <= 0)
        throw std::domain_error("pdep_marginal: undefined for zero valid tuples");
    std::int64_t sum_sq = 0;
    for (const auto& [code, count] : counts)
        sum_sq += count * count;
    return static_cast<double>(sum_sq) / static_cast<double>(n) / static_cast<double>(n);
}

/// mu+ score of one candidate:
///
///   rho = ((1 - pdep(X->A)) / (1 - pdep(A))) * ((n - 1) / (n - d_X))
///   mu+ = max(0, 1 - rho)
///
/// Exact FDs (every group homogeneous, which subsumes d_X = n and constant A)
/// score 1 and are flagged; the detection is structural so downstream pruning
/// never depends on rounding.
inline MeasureResult mu_plus(const MeasureInputs& in) {
    if (in.valid_count <= 1)
        throw std::domain_error("mu_plus: undefined for fewer than two valid tuples");
    if (in.distinct_lhs < 1 || in.distinct_lhs > in.valid_count)
        throw std::invalid_argument("mu_plus: d_X out of range");

    MeasureResult r;
    r.pdep_cond = in.pdep_cond;
    r.pdep_marg = in.pdep_marg;
    r.distinct_lhs = in.distinct_lhs;
    r.valid_count = in.valid_count;

    if (in.groups_homogeneous || in.distinct_lhs == in.valid_count || in.distinct_rhs == 1) {
        r.is_exact = true;
        r.mu_plus = 1.0;
        r.rho = 0.0;
        return r;
    }

    // Non-exact: some group carries two RHS values, so d_X < n and
    // pdep(A) < 1; both denominators are nonzero.
    const auto n = static_cast<double>(in.valid_count);
    const auto d_x = static_cast<double>(in.distinct_lhs);
    r.rho = ((1.0 - in.pdep_cond) / (1.0 - in.pdep_marg)) * ((n - 1.0) / (n - d_x));
    r.mu_plus = quantize_score(std::max(0.0, 1.0 - r.rho));
    r.is_exact = false;
    return r;
}

/// Optimistic upper bound on mu+ of any non-exact superset-LHS dependency with
/// the same RHS:
///
///   mu+_opt = 1 - (n - 1) / (n * (1 - pdep(A)) * (n - d_X))
///
/// Monotonically decreasing in d_X. May be negative; callers compare it
/// against the heap threshold unclamped.
inline double mu_plus_opt(double pdep_marg, std::int64_t n, std::int64_t d_x) {
    if (d_x >= n || pdep_marg >= 1.0)
        throw std::domain_error("mu_plus_opt: degenerate bound (d_X = n or pdep(A) = 1)");
    const auto nd = static_cast<double>(n);
    return 1.0 - (nd - 1.0) / (nd * (1.0 - pdep_marg) * (nd - static_cast<double>(d_x)));
}

/// Derives MeasureInputs from a grouped frequency table (the API-level path;
/// the search engines compute the same statistics in a fused scan).
inline MeasureInputs measure_inputs_from(const GroupedFrequencies& table) {
    MeasureInputs in;
    in.valid_count = table.valid_count;
    in.distinct_lhs = static_cast<std::int64_t>(table.groups.size());
    in.distinct_rhs = static_cast<std::int64_t>(table.marginal.size());
    in.groups_homogeneous = true;
    for (const auto& group : table.groups)
        if (group.rhs_counts.size() > 1)
            in.groups_homogeneous = false;
    if (table.valid_count > 0) {
        in.pdep_cond = pdep_conditional(table, table.valid_count);
        in.pdep_marg = pdep_marginal(table.marginal, table.valid_count);
    }
    return in;
}

} // namespace tale
