#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tale/measure.hpp"

namespace tale {

/// A scored non-exact dependency lhs -> rhs. lhs indices are strictly sorted
/// and never contain rhs.
struct ScoredAfd {
    std::vector<int> lhs;
    int rhs = 0;
    double score = 0.0;
    MeasureResult diagnostics;
};

/// Deterministic result order: score descending, then |lhs| ascending, then
/// lhs lexicographic, then rhs ascending. Ties at the heap boundary and the
/// final ranking both follow it, so runs are reproducible.
inline bool ranks_before(const ScoredAfd& a, const ScoredAfd& b) {
    if (a.score != b.score)
        return a.score > b.score;
    if (a.lhs.size() != b.lhs.size())
        return a.lhs.size() < b.lhs.size();
    if (a.lhs != b.lhs)
        return a.lhs < b.lhs;
    return a.rhs < b.rhs;
}

/// Capacity-k min-heap keyed on the score. The root holds the current worst
/// retained entry; its score is the dynamic threshold tau once the heap is
/// full (0 before that). While the heap has room every candidate is accepted;
/// once full a candidate must beat tau strictly.
class TopKHeap {
  public:
    explicit TopKHeap(int k) : capacity_(k) {
        if (k < 1)
            throw std::invalid_argument("TopKHeap: capacity must be positive");
        entries_.reserve(static_cast<std::size_t>(k) + 1);
    }

    int capacity() const { return capacity_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool full() const { return size() == capacity_; }

    double threshold() const { return full() ? entries_.front().score : 0.0; }

    bool offer(ScoredAfd candidate) {
        if (!full()) {
            entries_.push_back(std::move(candidate));
            std::push_heap(entries_.begin(), entries_.end(), worse_at_top);
            return true;
        }
        if (candidate.score <= threshold())
            return false;
        std::pop_heap(entries_.begin(), entries_.end(), worse_at_top);
        entries_.back() = std::move(candidate);
        std::push_heap(entries_.begin(), entries_.end(), worse_at_top);
        return true;
    }

    /// Entries in final ranked order (best first).
    std::vector<ScoredAfd> into_sorted() const {
        std::vector<ScoredAfd> out = entries_;
        std::sort(out.begin(), out.end(), ranks_before);
        return out;
    }

  private:
    // Heap comparator: the entry that ranks last sits at the root, so among
    // equal scores the eviction victim is the tie-break-worst entry.
    static bool worse_at_top(const ScoredAfd& a, const ScoredAfd& b) {
        return ranks_before(a, b);
    }

    int capacity_;
    std::vector<ScoredAfd> entries_;
};

} // namespace tale
