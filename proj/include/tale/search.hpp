#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tale/attr_set.hpp"
#include "tale/measure.hpp"
#include "tale/relation.hpp"
#include "tale/topk.hpp"

namespace tale {

struct SearchConfig {
    int k = 20;
    int max_lhs_size = 5; // clamped to m - 1
    bool ub_pruning_enabled = true;
    bool exact_fd_pruning_enabled = true;
};

struct LevelStats {
    int level = 0;
    std::int64_t candidates = 0; // (X, A) pairs present at this level
    std::int64_t evaluated = 0;  // pairs actually scored
    double elapsed_seconds = 0.0;
};

struct SearchStats {
    std::int64_t evaluated_candidates = 0; // #ECN: pairs scored (degenerates excluded)
    std::int64_t exact_fd_count = 0;
    std::int64_t pruned_by_exact_fd = 0;    // RHS bits cleared by the exact-FD rule
    std::int64_t pruned_by_upper_bound = 0; // RHS bits cleared by the bound rule
    std::int64_t skipped_degenerate = 0;    // pairs with fewer than two valid tuples
    std::vector<LevelStats> per_level;
    double elapsed_seconds = 0.0;
};

/// An LHS candidate in the level-wise lattice: its sorted attribute list and
/// the bit-vector S(X) of RHS attributes still worth evaluating for X and its
/// descendants.
struct LhsNode {
    std::vector<int> attrs;
    AttrSet rhs_candidates;
};

struct SearchResult {
    std::vector<ScoredAfd> ranked;
    SearchStats stats;
};

/// Total number of candidates with |X| <= L over m attributes:
/// sum over l of C(m,l) * (m-l). Throws std::overflow_error if the count does
/// not fit 64 bits.
inline std::uint64_t theoretical_candidate_count(int m, int max_lhs_size) {
    if (m < 2 || max_lhs_size < 1)
        return 0;
    const int limit = std::min(max_lhs_size, m - 1);
    std::uint64_t total = 0;
    std::uint64_t binom = 1; // C(m, l), updated incrementally
    for (int l = 1; l <= limit; ++l) {
        // binom = C(m, l-1) * (m - l + 1) / l, exact at every step
        if (__builtin_mul_overflow(binom, static_cast<std::uint64_t>(m - l + 1), &binom))
            throw std::overflow_error("theoretical_candidate_count: overflow");
        binom /= static_cast<std::uint64_t>(l);
        std::uint64_t term;
        if (__builtin_mul_overflow(binom, static_cast<std::uint64_t>(m - l), &term))
            throw std::overflow_error("theoretical_candidate_count: overflow");
        if (__builtin_add_overflow(total, term, &total))
            throw std::overflow_error("theoretical_candidate_count: overflow");
    }
    return total;
}

/// Reusable per-candidate scanner. prepare_lhs groups the tuples that are
/// non-NULL across the LHS and orders them by group; evaluate_rhs then scores
/// one RHS attribute in a single pass over that order. The split is what lets
/// the optimized engine reuse the LHS work across all RHS evaluations, while
/// the baseline simply calls prepare_lhs once per candidate.
class CandidateEvaluator {
  public:
    explicit CandidateEvaluator(const Relation& rel)
        : rel_(rel), n_(static_cast<std::size_t>(rel.row_count())) {
        lhs_valid_.resize(n_);
        hash_acc_.resize(n_);
        group_ids_.resize(n_);
        tuple_order_.resize(n_);
        const std::size_t card = rel.max_cardinality();
        rhs_count_.assign(card, 0);
        rhs_stamp_.assign(card, 0);
        marginal_count_.assign(card, 0);
        marginal_stamp_.assign(card, 0);
    }

    const Relation& relation() const { return rel_; }

    void prepare_lhs(std::span<const int> attrs) {
        lhs_cols_.clear();
        for (int a : attrs)
            lhs_cols_.push_back(rel_.column(a));

        std::fill(lhs_valid_.begin(), lhs_valid_.end(), std::uint8_t{1});
        std::fill(hash_acc_.begin(), hash_acc_.end(), std::uint64_t{0x2545f4914f6cdd1dull});
        for (const auto& col : lhs_cols_) {
            for (std::size_t i = 0; i < n_; ++i) {
                const std::uint32_t c = col[i];
                if (c == Relation::kNullCode)
                    lhs_valid_[i] = 0;
                else
                    hash_acc_[i] = detail::mix64(hash_acc_[i] ^ c);
            }
        }

        table_.reset(n_ == 0 ? 1 : n_);
        auto equal_rows = [&](std::int64_t r1, std::int64_t r2) {
            for (const auto& col : lhs_cols_)
                if (col[static_cast<std::size_t>(r1)] != col[static_cast<std::size_t>(r2)])
                    return false;
            return true;
        };
        for (std::size_t i = 0; i < n_; ++i) {
            if (!lhs_valid_[i])
                continue;
            group_ids_[i] = table_.insert(hash_acc_[i], static_cast<std::int64_t>(i), equal_rows);
        }
        group_count_ = table_.count();

        // Counting sort of the LHS-valid tuples by group id.
        group_start_.assign(group_count_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i)
            if (lhs_valid_[i])
                ++group_start_[group_ids_[i] + 1];
        for (std::size_t g = 1; g < group_start_.size(); ++g)
            group_start_[g] += group_start_[g - 1];
        group_cursor_ = group_start_;
        for (std::size_t i = 0; i < n_; ++i)
            if (lhs_valid_[i])
                tuple_order_[group_cursor_[group_ids_[i]]++] = static_cast<std::uint32_t>(i);
    }

    std::uint32_t group_count() const { return group_count_; }
    std::span<const std::uint8_t> lhs_valid() const { return lhs_valid_; }
    std::span<const std::uint32_t> group_ids() const { return group_ids_; }

    /// Scores X -> rhs over the tuples valid on X with a non-NULL rhs value.
    /// Returns nullopt when fewer than two such tuples exist.
    std::optional<MeasureResult> evaluate_rhs(int rhs) {
        auto col = rel_.column(rhs);

        ++marginal_epoch_;
        marginal_touched_.clear();

        std::int64_t valid_count = 0;
        std::int64_t distinct_lhs = 0;
        bool homogeneous = true;
        double cond_acc = 0.0;

        for (std::uint32_t g = 0; g < group_count_; ++g) {
            ++group_epoch_;
            group_touched_.clear();
            std::int64_t group_valid = 0;
            for (std::size_t idx = group_start_[g]; idx < group_start_[g + 1]; ++idx) {
                const std::uint32_t a = col[tuple_order_[idx]];
                if (a == Relation::kNullCode)
                    continue;
                if (rhs_stamp_[a] != group_epoch_) {
                    rhs_stamp_[a] = group_epoch_;
                    rhs_count_[a] = 0;
                    group_touched_.push_back(a);
                }
                ++rhs_count_[a];
                if (marginal_stamp_[a] != marginal_epoch_) {
                    marginal_stamp_[a] = marginal_epoch_;
                    marginal_count_[a] = 0;
                    marginal_touched_.push_back(a);
                }
                ++marginal_count_[a];
                ++group_valid;
            }
            if (group_valid == 0)
                continue;
            ++distinct_lhs;
            valid_count += group_valid;
            if (group_touched_.size() > 1)
                homogeneous = false;
            std::int64_t sum_sq = 0;
            for (std::uint32_t a : group_touched_)
                sum_sq += rhs_count_[a] * rhs_count_[a];
            cond_acc += static_cast<double>(sum_sq) / static_cast<double>(group_valid);
        }

        if (valid_count <= 1)
            return std::nullopt;

        std::int64_t marg_sq = 0;
        for (std::uint32_t a : marginal_touched_)
            marg_sq += marginal_count_[a] * marginal_count_[a];

        MeasureInputs in;
        in.valid_count = valid_count;
        in.distinct_lhs = distinct_lhs;
        in.distinct_rhs = static_cast<std::int64_t>(marginal_touched_.size());
        in.pdep_cond = cond_acc / static_cast<double>(valid_count);
        in.pdep_marg = static_cast<double>(marg_sq) / static_cast<double>(valid_count) /
                       static_cast<double>(valid_count);
        in.groups_homogeneous = homogeneous;
        return mu_plus(in);
    }

  private:
    const Relation& rel_;
    std::size_t n_;

    // per-LHS state
    std::vector<std::span<const std::uint32_t>> lhs_cols_;
    std::vector<std::uint8_t> lhs_valid_;
    std::vector<std::uint64_t> hash_acc_;
    std::vector<std::uint32_t> group_ids_;
    std::vector<std::size_t> group_start_;
    std::vector<std::size_t> group_cursor_;
    std::vector<std::uint32_t> tuple_order_;
    std::uint32_t group_count_ = 0;
    detail::GroupTable table_;

    // per-RHS scratch, epoch-stamped so clears are O(touched)
    std::vector<std::int64_t> rhs_count_;
    std::vector<std::uint64_t> rhs_stamp_;
    std::vector<std::int64_t> marginal_count_;
    std::vector<std::uint64_t> marginal_stamp_;
    std::vector<std::uint32_t> group_touched_;
    std::vector<std::uint32_t> marginal_touched_;
    std::uint64_t group_epoch_ = 0;
    std::uint64_t marginal_epoch_ = 0;
};

/// Level-1 lattice nodes: one per attribute, with S(X) = R \ X.
inline std::vector<LhsNode> level1_nodes(const Relation& rel) {
    const int m = rel.attribute_count();
    std::vector<LhsNode> nodes;
    if (m < 2)
        return nodes;
    nodes.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        LhsNode node;
        node.attrs = {i};
        node.rhs_candidates = AttrSet::all(m);
        node.rhs_candidates.reset(i);
        nodes.push_back(std::move(node));
    }
    return nodes;
}

/// Apriori prefix join: nodes sharing their first l-1 attributes pair up to
/// form level l+1, with S(X') = S(X1) ∩ S(X2). Empty intersections are
/// discarded. Input and output are in lexicographic LHS order.
inline std::vector<LhsNode> apriori_join(std::span<const LhsNode> level) {
    std::vector<LhsNode> next;
    if (level.empty())
        return next;
    const std::size_t l = level.front().attrs.size();

    std::size_t run_begin = 0;
    while (run_begin < level.size()) {
        std::size_t run_end = run_begin + 1;
        auto same_prefix = [&](const LhsNode& a, const LhsNode& b) {
            for (std::size_t i = 0; i + 1 < l; ++i)
                if (a.attrs[i] != b.attrs[i])
                    return false;
            return true;
        };
        while (run_end < level.size() && same_prefix(level[run_begin], level[run_end]))
            ++run_end;

        for (std::size_t i = run_begin; i < run_end; ++i) {
            for (std::size_t j = i + 1; j < run_end; ++j) {
                AttrSet s = level[i].rhs_candidates & level[j].rhs_candidates;
                if (s.empty())
                    continue;
                LhsNode node;
                node.attrs = level[i].attrs;
                node.attrs.push_back(level[j].attrs.back());
                node.rhs_candidates = std::move(s);
                next.push_back(std::move(node));
            }
        }
        run_begin = run_end;
    }
    return next;
}

/// Evaluates every RHS candidate of one LHS node, offering non-exact scores to
/// the heap and clearing S(X) bits per the two pruning rules. The LHS arrays
/// are computed once and shared across all RHS evaluations.
///
/// The upper-bound rule fires only while the heap is full: before that, any
/// non-exact candidate still enters the heap regardless of its score, so a
/// bound at or below the provisional threshold of 0 proves nothing about
/// whether descendants belong in the result.
inline void evaluate_lhs(CandidateEvaluator& eval, LhsNode& node, TopKHeap& heap,
                         const SearchConfig& cfg, SearchStats& stats,
                         LevelStats* level_stats = nullptr) {
    eval.prepare_lhs(node.attrs);

    std::vector<int> rhs_list;
    node.rhs_candidates.for_each([&](int a) { rhs_list.push_back(a); });

    for (int a : rhs_list) {
        if (level_stats)
            ++level_stats->candidates;
        auto mr = eval.evaluate_rhs(a);
        if (!mr) {
            ++stats.skipped_degenerate;
            continue;
        }
        ++stats.evaluated_candidates;
        if (level_stats)
            ++level_stats->evaluated;

        if (mr->is_exact) {
            ++stats.exact_fd_count;
            if (cfg.exact_fd_pruning_enabled) {
                node.rhs_candidates.reset(a);
                ++stats.pruned_by_exact_fd;
            }
            continue;
        }

        heap.offer(ScoredAfd{node.attrs, a, mr->mu_plus, *mr});
        if (cfg.ub_pruning_enabled && heap.full()) {
            const double bound = mu_plus_opt(mr->pdep_marg, mr->valid_count, mr->distinct_lhs);
            // The margin absorbs rounding in the bound and in descendant
            // scores: the inequality behind the rule holds in exact
            // arithmetic, and a descendant score can exceed its float bound
            // by a few ulp when both sit on a rational tie.
            if (bound <= heap.threshold() - 1e-12) {
                node.rhs_candidates.reset(a);
                ++stats.pruned_by_upper_bound;
            }
        }
    }
}

namespace detail {

/// Visits all size-l subsets of {0..m-1} in lexicographic order.
template <typename F>
void for_each_combination(int m, int l, F&& f) {
    std::vector<int> idx(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        f(std::span<const int>{idx});
        int pos = l - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - l + pos)
            --pos;
        if (pos < 0)
            return;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < l; ++i)
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

/// Exhaustive level-wise search: every (X, A) with |X| <= L is scored
/// independently, each candidate paying the full scan including the LHS-side
/// work. Exact FDs are scored (they count toward #ECN) but never offered.
inline SearchResult run_base(const Relation& rel, const SearchConfig& cfg) {
    if (cfg.k < 1)
        throw std::invalid_argument("run_base: k must be positive");
    SearchResult res;
    const int m = rel.attribute_count();
    TopKHeap heap(cfg.k);
    const auto total_start = std::chrono::steady_clock::now();

    if (m >= 2) {
        const int max_l = std::min(cfg.max_lhs_size, m - 1);
        CandidateEvaluator eval(rel);
        std::vector<int> attrs;
        for (int l = 1; l <= max_l; ++l) {
            LevelStats ls;
            ls.level = l;
            const auto level_start = std::chrono::steady_clock::now();
            detail::for_each_combination(m, l, [&](std::span<const int> combo) {
                attrs.assign(combo.begin(), combo.end());
                for (int a = 0; a < m; ++a) {
                    if (std::find(attrs.begin(), attrs.end(), a) != attrs.end())
                        continue;
                    ++ls.candidates;
                    eval.prepare_lhs(attrs);
                    auto mr = eval.evaluate_rhs(a);
                    if (!mr) {
                        ++res.stats.skipped_degenerate;
                        continue;
                    }
                    ++res.stats.evaluated_candidates;
                    ++ls.evaluated;
                    if (mr->is_exact) {
                        ++res.stats.exact_fd_count;
                        continue;
                    }
                    heap.offer(ScoredAfd{attrs, a, mr->mu_plus, *mr});
                }
            });
            ls.elapsed_seconds = detail::seconds_since(level_start);
            res.stats.per_level.push_back(ls);
        }
    }

    res.stats.elapsed_seconds = detail::seconds_since(total_start);
    res.ranked = heap.into_sorted();
    return res;
}

/// Pruned level-wise search: Apriori candidate generation with S(X)
/// propagation, LHS computation reuse, exact-FD pruning and optimistic
/// upper-bound pruning. Returns results identical to run_base whenever the
/// relation has no NULLs or upper-bound pruning is disabled.
inline SearchResult run_opt(const Relation& rel, const SearchConfig& cfg) {
    if (cfg.k < 1)
        throw std::invalid_argument("run_opt: k must be positive");
    SearchResult res;
    const int m = rel.attribute_count();
    TopKHeap heap(cfg.k);
    const auto total_start = std::chrono::steady_clock::now();

    if (m >= 2) {
        const int max_l = std::min(cfg.max_lhs_size, m - 1);
        CandidateEvaluator eval(rel);
        std::vector<LhsNode> level = level1_nodes(rel);
        for (int l = 1; l <= max_l; ++l) {
            LevelStats ls;
            ls.level = l;
            const auto level_start = std::chrono::steady_clock::now();
            for (LhsNode& node : level) {
                if (node.rhs_candidates.empty())
                    continue;
                evaluate_lhs(eval, node, heap, cfg, res.stats, &ls);
            }
            if (l < max_l)
                level = apriori_join(level);
            ls.elapsed_seconds = detail::seconds_since(level_start);
            res.stats.per_level.push_back(ls);
        }
    }

    res.stats.elapsed_seconds = detail::seconds_since(total_start);
    res.ranked = heap.into_sorted();
    return res;
}

} // namespace tale
