#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace tale {

/// Fixed-universe set of attribute indices, stored as packed 64-bit words.
/// Used for the per-LHS RHS candidate sets; intersection and emptiness are
/// O(ceil(m/64)).
class AttrSet {
  public:
    AttrSet() = default;

    explicit AttrSet(int universe)
        : universe_(universe), words_((universe + 63) / 64, 0) {}

    static AttrSet all(int universe) {
        AttrSet s(universe);
        for (int i = 0; i < universe; ++i)
            s.set(i);
        return s;
    }

    int universe() const { return universe_; }

    void set(int i) {
        assert(i >= 0 && i < universe_);
        words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }

    void reset(int i) {
        assert(i >= 0 && i < universe_);
        words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }

    bool test(int i) const {
        assert(i >= 0 && i < universe_);
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    int count() const {
        int c = 0;
        for (auto w : words_)
            c += std::popcount(w);
        return c;
    }

    bool empty() const {
        for (auto w : words_)
            if (w != 0)
                return false;
        return true;
    }

    AttrSet& operator&=(const AttrSet& other) {
        assert(universe_ == other.universe_);
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] &= other.words_[i];
        return *this;
    }

    friend AttrSet operator&(AttrSet a, const AttrSet& b) { return a &= b; }

    bool operator==(const AttrSet& other) const = default;

    /// Visits set bits in ascending index order.
    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w != 0) {
                int bit = std::countr_zero(w);
                f(static_cast<int>(wi * 64 + bit));
                w &= w - 1;
            }
        }
    }

  private:
    int universe_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace tale
