#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tale/oracle.hpp"
#include "tale/relation.hpp"

namespace testutil {

/// Relation from rows of plain strings; "" marks NULL, names are col0..colN.
inline tale::Relation make_relation(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::vector<std::optional<std::string>>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::optional<std::string>> out;
        for (const auto& cell : row) {
            if (cell.empty())
                out.push_back(std::nullopt);
            else
                out.push_back(cell);
        }
        cells.push_back(std::move(out));
    }
    std::vector<std::string> names;
    if (!rows.empty())
        for (std::size_t i = 0; i < rows.front().size(); ++i)
            names.push_back("col" + std::to_string(i));
    return tale::Relation::from_rows(std::move(names), cells);
}

/// The 6-tuple fixture used throughout: X codes [a,a,a,b,b,b], A codes
/// [1,1,2,3,3,3]. pdep(X->A) = 7/9, pdep(A) = 7/18, mu+ = 6/11.
inline tale::Relation six_tuple_fixture() {
    return make_relation({{"a", "1"}, {"a", "1"}, {"a", "2"}, {"b", "3"}, {"b", "3"}, {"b", "3"}});
}

/// Deterministic corpus member: dimensions and contents derived from the seed.
inline tale::Relation random_relation(std::uint64_t seed, std::int64_t max_n, int max_m,
                                      double null_probability) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    tale::oracle::SynthSpec spec;
    spec.rng_seed = rng();
    spec.row_count = 2 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_n - 1));
    spec.attribute_count = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_m - 1));
    spec.cardinalities = {2 + static_cast<std::uint32_t>(rng() % 5)};
    spec.null_probability = null_probability;
    if (rng() % 2 == 0 && spec.attribute_count >= 3) {
        tale::oracle::SynthSpec::Planted planted;
        planted.lhs = {0};
        if (rng() % 2 == 0 && spec.attribute_count >= 4)
            planted.lhs.push_back(1);
        planted.rhs = spec.attribute_count - 1;
        planted.noise_rate = 0.05 * static_cast<double>(rng() % 5);
        spec.planted = planted;
    }
    return tale::oracle::generate(spec);
}

/// Scores one candidate through the public API path: validity mask, dense
/// group ids, grouped frequencies, measure. Returns nullopt for degenerate
/// candidates (fewer than two valid tuples).
inline std::optional<tale::MeasureResult> api_mu_plus(const tale::Relation& rel,
                                                      std::span<const int> lhs, int rhs) {
    std::vector<int> all(lhs.begin(), lhs.end());
    all.push_back(rhs);
    const auto mask = tale::validity_mask(rel, all);
    const auto keys = tale::dense_group_ids(rel, lhs, mask);
    const auto table = tale::group_frequencies(rel, keys.ids, rhs, mask);
    if (table.valid_count <= 1)
        return std::nullopt;
    return tale::mu_plus(tale::measure_inputs_from(table));
}

} // namespace testutil
