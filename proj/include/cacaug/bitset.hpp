#pragma once

#include <cstdint>
#include <cassert>
#include <vector>

namespace cacaug {

/// Dynamic bitset over a fixed universe size. Used for vertex sets of 2-cuts
/// and per-link coverage rows.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int n) : nbits_(n), w_((n + 63) / 64, 0) {}

    int size() const { return nbits_; }

    void set(int i) { w_[i >> 6] |= (uint64_t{1} << (i & 63)); }
    void reset(int i) { w_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
    bool test(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

    int count() const {
        int c = 0;
        for (uint64_t x : w_) c += __builtin_popcountll(x);
        return c;
    }

    bool any() const {
        for (uint64_t x : w_)
            if (x) return true;
        return false;
    }
    bool none() const { return !any(); }

    bool intersects(const Bitset& o) const {
        assert(nbits_ == o.nbits_);
        for (size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & o.w_[i]) return true;
        return false;
    }

    bool is_subset_of(const Bitset& o) const {
        assert(nbits_ == o.nbits_);
        for (size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    Bitset operator&(const Bitset& o) const {
        Bitset r(nbits_);
        for (size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] & o.w_[i];
        return r;
    }
    Bitset operator|(const Bitset& o) const {
        Bitset r(nbits_);
        for (size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] | o.w_[i];
        return r;
    }
    Bitset and_not(const Bitset& o) const {
        Bitset r(nbits_);
        for (size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] & ~o.w_[i];
        return r;
    }
    Bitset complement() const {
        Bitset r(nbits_);
        for (size_t i = 0; i < w_.size(); ++i) r.w_[i] = ~w_[i];
        r.trim();
        return r;
    }

    bool operator==(const Bitset& o) const { return nbits_ == o.nbits_ && w_ == o.w_; }
    bool operator!=(const Bitset& o) const { return !(*this == o); }
    bool operator<(const Bitset& o) const { return w_ < o.w_; }

    /// Members in increasing order.
    std::vector<int> to_vector() const {
        std::vector<int> out;
        for (int b = 0; b < (int)w_.size(); ++b) {
            uint64_t x = w_[b];
            while (x) {
                int t = __builtin_ctzll(x);
                out.push_back((b << 6) + t);
                x &= x - 1;
            }
        }
        return out;
    }

private:
    void trim() {
        int r = nbits_ & 63;
        if (r && !w_.empty()) w_.back() &= (uint64_t{1} << r) - 1;
    }

    int nbits_ = 0;
    std::vector<uint64_t> w_;
};

}  // namespace cacaug
