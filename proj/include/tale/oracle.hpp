#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tale/relation.hpp"
#include "tale/topk.hpp"

// Brute-force reference implementations and synthetic-relation generators,
// used by the test suites. Everything here recomputes from first principles
// with explicit pair enumeration; none of the grouped-sum arithmetic of
// tale/measure.hpp is shared, so the two paths check each other.

namespace tale::oracle {

namespace detail {

/// Valid tuple indices: non-NULL across lhs and rhs.
inline std::vector<std::int64_t> valid_tuples(const Relation& rel, std::span<const int> lhs,
                                              int rhs) {
    std::vector<std::int64_t> rows;
    const std::int64_t n = rel.row_count();
    for (std::int64_t i = 0; i < n; ++i) {
        bool ok = rel.code(i, rhs) != Relation::kNullCode;
        for (int a : lhs)
            ok = ok && rel.code(i, a) != Relation::kNullCode;
        if (ok)
            rows.push_back(i);
    }
    return rows;
}

inline bool equal_on(const Relation& rel, std::span<const int> attrs, std::int64_t r1,
                     std::int64_t r2) {
    for (int a : attrs)
        if (rel.code(r1, a) != rel.code(r2, a))
            return false;
    return true;
}

/// Leader clustering by pairwise comparison: groups[i] lists the rows whose
/// lhs projection equals that of the group's first member.
inline std::vector<std::vector<std::int64_t>> group_rows(const Relation& rel,
                                                         std::span<const int> lhs,
                                                         std::span<const std::int64_t> rows) {
    std::vector<std::vector<std::int64_t>> groups;
    for (std::int64_t row : rows) {
        bool placed = false;
        for (auto& group : groups) {
            if (equal_on(rel, lhs, group.front(), row)) {
                group.push_back(row);
                placed = true;
                break;
            }
        }
        if (!placed)
            groups.push_back({row});
    }
    return groups;
}

} // namespace detail

/// pdep(X -> A) by the pair interpretation: the probability that two tuples
/// drawn uniformly (with replacement) from the same X-group agree on A,
/// counted by explicit iteration over tuple pairs.
inline double oracle_pdep(const Relation& rel, std::span<const int> lhs, int rhs) {
    const auto rows = detail::valid_tuples(rel, lhs, rhs);
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n == 0)
        throw std::domain_error("oracle_pdep: zero valid tuples");
    const auto groups = detail::group_rows(rel, lhs, rows);

    double acc = 0.0;
    for (const auto& group : groups) {
        std::int64_t agree = 0;
        for (std::int64_t r1 : group)
            for (std::int64_t r2 : group)
                if (rel.code(r1, rhs) == rel.code(r2, rhs))
                    ++agree;
        // (|g|/n) * agree/|g|^2
        acc += static_cast<double>(agree) /
               (static_cast<double>(n) * static_cast<double>(group.size()));
    }
    return acc;
}

/// pdep(A) over the tuples valid for X -> A, by pair enumeration.
inline double oracle_pdep_marginal(const Relation& rel, std::span<const int> lhs, int rhs) {
    const auto rows = detail::valid_tuples(rel, lhs, rhs);
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n == 0)
        throw std::domain_error("oracle_pdep_marginal: zero valid tuples");
    std::int64_t agree = 0;
    for (std::int64_t r1 : rows)
        for (std::int64_t r2 : rows)
            if (rel.code(r1, rhs) == rel.code(r2, rhs))
                ++agree;
    return static_cast<double>(agree) / (static_cast<double>(n) * static_cast<double>(n));
}

/// Literal transcription of the mu+ definition on top of the pair-counting
/// pdep. Exactness is a pair scan for violations. Returns nullopt when fewer
/// than two tuples are valid.
inline std::optional<MeasureResult> oracle_mu_plus(const Relation& rel, std::span<const int> lhs,
                                                   int rhs) {
    const auto rows = detail::valid_tuples(rel, lhs, rhs);
    const auto n = static_cast<std::int64_t>(rows.size());
    if (n <= 1)
        return std::nullopt;

    const auto groups = detail::group_rows(rel, lhs, rows);
    bool violated = false;
    for (const auto& group : groups)
        for (std::int64_t r1 : group)
            for (std::int64_t r2 : group)
                if (rel.code(r1, rhs) != rel.code(r2, rhs))
                    violated = true;

    MeasureResult r;
    r.valid_count = n;
    r.distinct_lhs = static_cast<std::int64_t>(groups.size());
    r.pdep_cond = oracle_pdep(rel, lhs, rhs);
    r.pdep_marg = oracle_pdep_marginal(rel, lhs, rhs);

    if (!violated) {
        r.is_exact = true;
        r.mu_plus = 1.0;
        r.rho = 0.0;
        return r;
    }
    r.is_exact = false;
    r.rho = ((1.0 - r.pdep_cond) / (1.0 - r.pdep_marg)) *
            ((static_cast<double>(n) - 1.0) / (static_cast<double>(n) - static_cast<double>(r.distinct_lhs)));
    // same canonical score quantization as the measure path
    r.mu_plus = quantize_score(std::max(0.0, 1.0 - r.rho));
    return r;
}

namespace detail {

template <typename F>
void combinations(int m, int l, std::vector<int>& prefix, int next, F&& f) {
    if (static_cast<int>(prefix.size()) == l) {
        f(std::span<const int>{prefix});
        return;
    }
    for (int a = next; a < m; ++a) {
        prefix.push_back(a);
        combinations(m, l, prefix, a + 1, f);
        prefix.pop_back();
    }
}

} // namespace detail

/// Scores every candidate with |X| <= L, filters exact FDs, full-sorts under
/// the official tie-break order and truncates to min(k, |F|).
inline std::vector<ScoredAfd> oracle_topk(const Relation& rel, int k, int max_lhs_size) {
    std::vector<ScoredAfd> all;
    const int m = rel.attribute_count();
    const int limit = std::min(max_lhs_size, m - 1);
    std::vector<int> prefix;
    for (int l = 1; l <= limit; ++l) {
        detail::combinations(m, l, prefix, 0, [&](std::span<const int> lhs) {
            for (int a = 0; a < m; ++a) {
                if (std::find(lhs.begin(), lhs.end(), a) != lhs.end())
                    continue;
                auto mr = oracle_mu_plus(rel, lhs, a);
                if (!mr || mr->is_exact)
                    continue;
                all.push_back(ScoredAfd{{lhs.begin(), lhs.end()}, a, mr->mu_plus, *mr});
            }
        });
    }
    std::sort(all.begin(), all.end(), ranks_before);
    if (static_cast<int>(all.size()) > k)
        all.resize(static_cast<std::size_t>(k));
    return all;
}

/// Deterministic synthetic relation: the seed fully determines the output.
struct SynthSpec {
    std::int64_t row_count = 0;
    int attribute_count = 0;
    /// One entry broadcasts to every attribute; otherwise one per attribute.
    std::vector<std::uint32_t> cardinalities = {4};
    double null_probability = 0.0;
    std::uint64_t rng_seed = 1;

    struct Planted {
        std::vector<int> lhs;
        int rhs = 0;
        double noise_rate = 0.0;
    };
    std::optional<Planted> planted;
};

namespace detail {

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t mix_codes(std::span<const std::uint32_t> codes) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint32_t c : codes) {
        h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
    }
    return h;
}

} // namespace detail

inline Relation generate(const SynthSpec& spec) {
    if (spec.attribute_count < 1)
        throw std::invalid_argument("generate: attribute_count must be positive");
    if (spec.cardinalities.empty())
        throw std::invalid_argument("generate: cardinalities must be non-empty");
    if (spec.null_probability < 0.0 || spec.null_probability > 1.0)
        throw std::invalid_argument("generate: null_probability out of [0,1]");
    if (spec.planted) {
        if (spec.planted->noise_rate < 0.0 || spec.planted->noise_rate > 1.0)
            throw std::invalid_argument("generate: noise_rate out of [0,1]");
        for (int a : spec.planted->lhs)
            if (a < 0 || a >= spec.attribute_count || a == spec.planted->rhs)
                throw std::invalid_argument("generate: invalid planted dependency");
        if (spec.planted->rhs < 0 || spec.planted->rhs >= spec.attribute_count)
            throw std::invalid_argument("generate: invalid planted rhs");
    }

    const int m = spec.attribute_count;
    auto card_of = [&](int a) -> std::uint32_t {
        if (spec.cardinalities.size() == 1)
            return std::max<std::uint32_t>(1, spec.cardinalities[0]);
        return std::max<std::uint32_t>(1, spec.cardinalities.at(static_cast<std::size_t>(a)));
    };

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a)
        names.push_back("col" + std::to_string(a));

    std::mt19937_64 rng(spec.rng_seed);
    RelationBuilder builder(std::move(names));

    std::vector<std::uint32_t> codes(static_cast<std::size_t>(m));
    std::vector<bool> is_null(static_cast<std::size_t>(m));
    std::vector<std::uint32_t> lhs_codes;

    for (std::int64_t row = 0; row < spec.row_count; ++row) {
        for (int a = 0; a < m; ++a) {
            is_null[static_cast<std::size_t>(a)] =
                detail::unit_double(rng) < spec.null_probability;
            codes[static_cast<std::size_t>(a)] =
                static_cast<std::uint32_t>(rng() % card_of(a));
        }
        if (spec.planted) {
            const auto& p = *spec.planted;
            bool lhs_valid = true;
            lhs_codes.clear();
            for (int a : p.lhs) {
                lhs_valid = lhs_valid && !is_null[static_cast<std::size_t>(a)];
                lhs_codes.push_back(codes[static_cast<std::size_t>(a)]);
            }
            const bool noisy = detail::unit_double(rng) < p.noise_rate;
            if (lhs_valid && !noisy)
                codes[static_cast<std::size_t>(p.rhs)] = static_cast<std::uint32_t>(
                    detail::mix_codes(lhs_codes) % card_of(p.rhs));
        }
        for (int a = 0; a < m; ++a) {
            if (is_null[static_cast<std::size_t>(a)])
                builder.add_cell(a, std::nullopt);
            else
                builder.add_cell(a, "v" + std::to_string(codes[static_cast<std::size_t>(a)]));
        }
        builder.end_row();
    }
    return builder.finish();
}

/// A constructed relation showing that LHS-minimality, global top-k ranking
/// and exact-k output cannot hold together: it carries a minimal f1 = {x} -> a,
/// a strictly stronger non-minimal superset f2 = {x,b} -> a, and an independent
/// f3 = {y} -> z with 0 < score(f3) < score(f1), so the global top-2 at L = 2
/// is exactly [f2, f1] and necessarily contains a non-minimal dependency,
/// while any minimality-respecting pair scores strictly worse. Candidate
/// relations are generated and validated against the brute-force ranking until
/// one passes.
struct TriangleFixture {
    Relation relation;
    ScoredAfd f1, f2, f3;
};

inline TriangleFixture build_triangle_fixture() {
    constexpr std::int64_t kRows = 96;

    for (std::uint64_t seed = 1; seed <= 64; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<std::vector<std::optional<std::string>>> rows;
        rows.reserve(kRows);
        for (std::int64_t i = 0; i < kRows; ++i) {
            const std::uint32_t x = static_cast<std::uint32_t>(i) % 4;
            const bool noisy = detail::unit_double(rng) < 0.16;
            const std::uint32_t e = noisy ? 1 + static_cast<std::uint32_t>(rng() % 2) : 0;
            const std::uint32_t e2 = detail::unit_double(rng) < 0.03 ? 1 : 0;
            const std::uint32_t a = (3 * x + e + e2) % 9;
            const std::uint32_t b = e * 2 + static_cast<std::uint32_t>(rng() % 2);
            const std::uint32_t y = static_cast<std::uint32_t>(rng() % 5);
            const std::uint32_t z =
                (2 * y + (detail::unit_double(rng) < 0.35
                              ? 1 + static_cast<std::uint32_t>(rng() % 3)
                              : 0)) %
                7;
            rows.push_back({"x" + std::to_string(x), "a" + std::to_string(a),
                            "b" + std::to_string(b), "y" + std::to_string(y),
                            "z" + std::to_string(z)});
        }
        Relation rel = Relation::from_rows({"x", "a", "b", "y", "z"}, rows);

        // Full brute-force ranking at L = 2 validates the construction.
        const auto ranking = oracle_topk(rel, 1 << 20, 2);
        auto find = [&](const std::vector<int>& lhs, int rhs) -> const ScoredAfd* {
            for (const auto& f : ranking)
                if (f.lhs == lhs && f.rhs == rhs)
                    return &f;
            return nullptr;
        };
        const ScoredAfd* f1 = find({0}, 1);
        const ScoredAfd* f2 = find({0, 2}, 1);
        const ScoredAfd* f3 = find({3}, 4);
        if (!f1 || !f2 || !f3)
            continue;
        if (!(f2->score > f1->score && f1->score > f3->score && f3->score > 0.0))
            continue;
        if (ranking.size() < 2)
            continue;
        const bool top2_ok = ranking[0].lhs == f2->lhs && ranking[0].rhs == f2->rhs &&
                             ranking[1].lhs == f1->lhs && ranking[1].rhs == f1->rhs;
        if (!top2_ok)
            continue;
        return TriangleFixture{std::move(rel), *f1, *f2, *f3};
    }
    throw std::runtime_error("build_triangle_fixture: no seed produced a valid construction");
}

} // namespace tale::oracle
