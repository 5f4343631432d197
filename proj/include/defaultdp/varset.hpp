#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace defaultdp {

// Set of small non-negative ids (variable indices). Capacity 126; bit 126
// is reserved for the model-only marker carried by counter-witness
// assignments, so a marked and an unmarked copy of the same assignment
// compare as distinct sets.
struct VarSet {
    static constexpr int kCapacity = 126;
    static constexpr int kModelOnlyBit = 126;

    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    constexpr bool operator==(const VarSet& o) const { return lo == o.lo && hi == o.hi; }
    constexpr bool operator!=(const VarSet& o) const { return !(*this == o); }

    constexpr bool empty() const { return lo == 0 && hi == 0; }
    constexpr bool test(int bit) const {
        return bit < 64 ? ((lo >> bit) & 1u) != 0 : ((hi >> (bit - 64)) & 1u) != 0;
    }
    void set(int bit) {
        if (bit < 64)
            lo |= std::uint64_t{1} << bit;
        else
            hi |= std::uint64_t{1} << (bit - 64);
    }
    void reset(int bit) {
        if (bit < 64)
            lo &= ~(std::uint64_t{1} << bit);
        else
            hi &= ~(std::uint64_t{1} << (bit - 64));
    }

    VarSet with(int bit) const {
        VarSet r = *this;
        r.set(bit);
        return r;
    }
    VarSet without(int bit) const {
        VarSet r = *this;
        r.reset(bit);
        return r;
    }

    constexpr bool marked() const { return test(kModelOnlyBit); }
    VarSet markedCopy() const { return with(kModelOnlyBit); }
    VarSet unmarkedCopy() const { return without(kModelOnlyBit); }

    constexpr VarSet operator|(const VarSet& o) const { return {lo | o.lo, hi | o.hi}; }
    constexpr VarSet operator&(const VarSet& o) const { return {lo & o.lo, hi & o.hi}; }
    constexpr bool subsetOf(const VarSet& o) const {
        return (lo & ~o.lo) == 0 && (hi & ~o.hi) == 0;
    }

    int count() const { return __builtin_popcountll(lo) + __builtin_popcountll(hi); }

    // Lowest set bit, or -1 when empty.
    int lowest() const {
        if (lo != 0) return __builtin_ctzll(lo);
        if (hi != 0) return 64 + __builtin_ctzll(hi);
        return -1;
    }

    template <class Fn>
    void forEach(Fn&& fn) const {
        for (std::uint64_t w = lo; w != 0; w &= w - 1) fn(__builtin_ctzll(w));
        for (std::uint64_t w = hi; w != 0; w &= w - 1) fn(64 + __builtin_ctzll(w));
    }

    std::vector<int> bits() const {
        std::vector<int> out;
        forEach([&](int b) { out.push_back(b); });
        return out;
    }
};

// Order on sets as ascending id sequences compared lexicographically; this
// is the canonical element order used by table serialization.
inline bool lexLess(const VarSet& a, const VarSet& b) {
    VarSet x = a, y = b;
    while (true) {
        int ia = x.lowest();
        int ib = y.lowest();
        if (ia == -1) return ib != -1;
        if (ib == -1) return false;
        if (ia != ib) return ia < ib;
        x.reset(ia);
        y.reset(ib);
    }
}

struct VarSetLess {
    bool operator()(const VarSet& a, const VarSet& b) const { return lexLess(a, b); }
};

}  // namespace defaultdp
