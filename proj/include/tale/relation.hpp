#pragma once

#include <cassert>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tale {

/// Attribute names in file order. Indices 0..m-1 are the canonical order used
/// for prefix joins, bit positions and output everywhere else.
struct Schema {
    std::vector<std::string> attribute_names;

    int attribute_count() const { return static_cast<int>(attribute_names.size()); }
};

/// Per-tuple validity bits for some attribute set: bit i is true iff tuple i
/// is non-NULL on every attribute of the set.
class ValidityMask {
  public:
    ValidityMask() = default;
    explicit ValidityMask(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}

    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    std::size_t size() const { return bits_.size(); }

    std::int64_t count_valid() const {
        std::int64_t c = 0;
        for (auto b : bits_)
            c += b;
        return c;
    }

  private:
    std::vector<std::uint8_t> bits_;
};

/// Dictionary-encoded columnar relation. Every cell is a value code; codes are
/// assigned per column in first-occurrence order, and two cells carry equal
/// codes iff their source strings are byte-equal. NULLs carry kNullCode.
/// Immutable after construction and safe to share across threads.
class Relation {
  public:
    static constexpr std::uint32_t kNullCode = 0xFFFFFFFFu;

    const Schema& schema() const { return schema_; }
    int attribute_count() const { return schema_.attribute_count(); }
    std::int64_t row_count() const { return row_count_; }

    std::span<const std::uint32_t> column(int attr) const {
        return columns_[static_cast<std::size_t>(attr)];
    }

    std::uint32_t code(std::int64_t row, int attr) const {
        return columns_[static_cast<std::size_t>(attr)][static_cast<std::size_t>(row)];
    }

    /// Number of distinct non-NULL values in the column's dictionary.
    std::uint32_t cardinality(int attr) const {
        return static_cast<std::uint32_t>(dictionaries_[static_cast<std::size_t>(attr)].size());
    }

    std::uint32_t max_cardinality() const {
        std::uint32_t mx = 0;
        for (const auto& d : dictionaries_)
            mx = std::max(mx, static_cast<std::uint32_t>(d.size()));
        return mx;
    }

    const std::string& decode(int attr, std::uint32_t code) const {
        return dictionaries_[static_cast<std::size_t>(attr)][code];
    }

    std::optional<int> find_attribute(const std::string& name) const {
        for (int i = 0; i < attribute_count(); ++i)
            if (schema_.attribute_names[static_cast<std::size_t>(i)] == name)
                return i;
        return std::nullopt;
    }

    /// Builds a relation directly from rows of optional cells (nullopt = NULL).
    /// Used by the synthetic generators and test fixtures; the CSV loader goes
    /// through the same encoding path.
    static Relation from_rows(std::vector<std::string> names,
                              const std::vector<std::vector<std::optional<std::string>>>& rows);

  private:
    friend class RelationBuilder;

    Schema schema_;
    std::int64_t row_count_ = 0;
    std::vector<std::vector<std::uint32_t>> columns_;
    std::vector<std::vector<std::string>> dictionaries_;
};

/// Incremental construction with per-column first-occurrence dictionaries.
/// Duplicate attribute names get a positional suffix so the schema invariant
/// (unique names) holds on arbitrary files.
class RelationBuilder {
  public:
    explicit RelationBuilder(std::vector<std::string> names) {
        rel_.schema_.attribute_names = normalize_names(std::move(names));
        const std::size_t m = rel_.schema_.attribute_names.size();
        rel_.columns_.resize(m);
        rel_.dictionaries_.resize(m);
        encoders_.resize(m);
    }

    int attribute_count() const { return rel_.attribute_count(); }

    void add_cell(int attr, const std::optional<std::string>& cell) {
        auto a = static_cast<std::size_t>(attr);
        if (!cell.has_value()) {
            rel_.columns_[a].push_back(Relation::kNullCode);
            return;
        }
        auto& enc = encoders_[a];
        auto [it, inserted] = enc.try_emplace(*cell, static_cast<std::uint32_t>(enc.size()));
        if (inserted)
            rel_.dictionaries_[a].push_back(*cell);
        rel_.columns_[a].push_back(it->second);
    }

    void end_row() { ++rel_.row_count_; }

    Relation finish() { return std::move(rel_); }

  private:
    static std::vector<std::string> normalize_names(std::vector<std::string> names) {
        std::unordered_map<std::string, int> seen;
        for (std::size_t i = 0; i < names.size(); ++i) {
            std::string& name = names[i];
            if (seen.contains(name)) {
                std::string candidate = name + "_" + std::to_string(i + 1);
                while (seen.contains(candidate))
                    candidate += "_";
                name = candidate;
            }
            seen.emplace(name, static_cast<int>(i));
        }
        return names;
    }

    Relation rel_;
    std::vector<std::unordered_map<std::string, std::uint32_t>> encoders_;
};

inline Relation Relation::from_rows(std::vector<std::string> names,
                                    const std::vector<std::vector<std::optional<std::string>>>& rows) {
    RelationBuilder builder(std::move(names));
    const int m = builder.attribute_count();
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m)
            throw std::invalid_argument("from_rows: row width does not match schema");
        for (int a = 0; a < m; ++a)
            builder.add_cell(a, row[static_cast<std::size_t>(a)]);
        builder.end_row();
    }
    return builder.finish();
}

/// Mask of tuples that are non-NULL on every attribute in `attrs`.
inline ValidityMask validity_mask(const Relation& rel, std::span<const int> attrs) {
    if (attrs.empty())
        throw std::invalid_argument("validity_mask: empty attribute set");
    for (int a : attrs)
        if (a < 0 || a >= rel.attribute_count())
            throw std::invalid_argument("validity_mask: attribute index out of range");

    const auto n = static_cast<std::size_t>(rel.row_count());
    ValidityMask mask(n, true);
    for (int a : attrs) {
        auto col = rel.column(a);
        for (std::size_t i = 0; i < n; ++i)
            if (col[i] == Relation::kNullCode)
                mask.set(i, false);
    }
    return mask;
}

/// Dense group ids over the masked-in tuples: equal ids iff the code tuples on
/// `attrs` are equal. Grouping uses a hash table with full-key equality against
/// a representative tuple, so hash collisions can never merge distinct keys.
struct GroupIds {
    std::vector<std::uint32_t> ids; // meaningful only where the mask is true
    std::uint32_t group_count = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Open-addressing group table keyed on a tuple's codes over a fixed attribute
/// list. Slots store a representative row; equality compares codes column-wise.
/// reset() bumps an epoch instead of clearing the slot array, so reuse across
/// many candidates costs nothing.
class GroupTable {
  public:
    void reset(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < expected * 2)
            cap <<= 1;
        if (cap != slots_.size()) {
            slots_.assign(cap, Slot{});
            mask_ = cap - 1;
            epoch_ = 1;
        } else {
            ++epoch_;
        }
        count_ = 0;
    }

    template <typename EqualFn>
    std::uint32_t insert(std::uint64_t hash, std::int64_t row, EqualFn&& equal_rows) {
        std::size_t pos = hash & mask_;
        while (true) {
            Slot& s = slots_[pos];
            if (s.epoch != epoch_) {
                s.epoch = epoch_;
                s.repr = row;
                s.gid = count_;
                s.hash_low = static_cast<std::uint32_t>(hash);
                return count_++;
            }
            // comparing the stored hash first skips most column walks
            if (s.hash_low == static_cast<std::uint32_t>(hash) && equal_rows(s.repr, row))
                return s.gid;
            pos = (pos + 1) & mask_;
        }
    }

    std::uint32_t count() const { return count_; }

  private:
    struct Slot {
        std::int64_t repr = 0;
        std::uint64_t epoch = 0;
        std::uint32_t gid = 0;
        std::uint32_t hash_low = 0;
    };

    std::vector<Slot> slots_;
    std::size_t mask_ = 0;
    std::uint64_t epoch_ = 0;
    std::uint32_t count_ = 0;
};

} // namespace detail

inline GroupIds dense_group_ids(const Relation& rel, std::span<const int> attrs,
                                const ValidityMask& mask) {
    const auto n = static_cast<std::size_t>(rel.row_count());
    GroupIds out;
    out.ids.assign(n, 0);

    std::vector<std::span<const std::uint32_t>> cols;
    cols.reserve(attrs.size());
    for (int a : attrs)
        cols.push_back(rel.column(a));

    detail::GroupTable table;
    table.reset(n);
    auto equal_rows = [&](std::int64_t r1, std::int64_t r2) {
        for (const auto& col : cols)
            if (col[static_cast<std::size_t>(r1)] != col[static_cast<std::size_t>(r2)])
                return false;
        return true;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i])
            continue;
        std::uint64_t h = 0x2545f4914f6cdd1dull;
        for (const auto& col : cols)
            h = detail::mix64(h ^ col[i]);
        out.ids[i] = table.insert(h, static_cast<std::int64_t>(i), equal_rows);
    }
    out.group_count = table.count();
    return out;
}

/// Grouped frequency table for one (LHS grouping, RHS attribute) pair:
/// per-group sizes, per-group RHS value counts, and the marginal RHS counts,
/// all over the masked-in tuples. Group and value keys iterate in sorted order.
struct GroupedFrequencies {
    struct Group {
        std::int64_t size = 0;
        std::map<std::uint32_t, std::int64_t> rhs_counts;
    };

    std::vector<Group> groups; // nonempty groups only
    std::map<std::uint32_t, std::int64_t> marginal;
    std::int64_t valid_count = 0;
};

inline GroupedFrequencies group_frequencies(const Relation& rel,
                                            std::span<const std::uint32_t> lhs_keys, int rhs,
                                            const ValidityMask& mask) {
    const auto n = static_cast<std::size_t>(rel.row_count());
    if (lhs_keys.size() != n || mask.size() != n)
        throw std::invalid_argument("group_frequencies: key/mask length mismatch");
    auto rhs_col = rel.column(rhs);

    std::map<std::uint32_t, GroupedFrequencies::Group> by_key;
    GroupedFrequencies table;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i])
            continue;
        const std::uint32_t a = rhs_col[i];
        if (a == Relation::kNullCode)
            throw std::invalid_argument("group_frequencies: NULL rhs value inside mask");
        auto& group = by_key[lhs_keys[i]];
        group.size += 1;
        group.rhs_counts[a] += 1;
        table.marginal[a] += 1;
        table.valid_count += 1;
    }
    table.groups.reserve(by_key.size());
    for (auto& [key, group] : by_key)
        table.groups.push_back(std::move(group));
    return table;
}

} // namespace tale
