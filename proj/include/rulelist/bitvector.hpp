#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

#include "rulelist/errors.hpp"

namespace rulelist {

// Fixed-length bit vector over 64-bit words. One bit per observation.
// Bits past size()-1 in the last word are kept zero so that popcounts
// and whole-word comparisons need no special casing.
class BitVector {
public:
    BitVector() = default;

    explicit BitVector(std::size_t nbits)
        : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    static BitVector ones(std::size_t nbits) {
        BitVector v(nbits);
        for (auto& w : v.words_) w = ~std::uint64_t{0};
        v.mask_tail();
        return v;
    }

    std::size_t size() const { return nbits_; }
    std::size_t word_count() const { return words_.size(); }

    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    bool test(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    void clear() {
        for (auto& w : words_) w = 0;
    }

    void fill_ones() {
        for (auto& w : words_) w = ~std::uint64_t{0};
        mask_tail();
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool none() const {
        for (auto w : words_) {
            if (w != 0) return false;
        }
        return true;
    }

    // this = a & b (adopts a's length)
    void assign_and(const BitVector& a, const BitVector& b) {
        adopt_size(a);
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] = a.words_[i] & b.words_[i];
    }

    // this = a & ~b
    void assign_andnot(const BitVector& a, const BitVector& b) {
        adopt_size(a);
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] = a.words_[i] & ~b.words_[i];
    }

    // this = a | b
    void assign_or(const BitVector& a, const BitVector& b) {
        adopt_size(a);
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] = a.words_[i] | b.words_[i];
    }

    // this = ~a, masked to size()
    void assign_not(const BitVector& a) {
        adopt_size(a);
        for (std::size_t i = 0; i < words_.size(); ++i)
            words_[i] = ~a.words_[i];
        mask_tail();
    }

    void and_with(const BitVector& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    }

    void or_with(const BitVector& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    }

    void andnot_with(const BitVector& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    }

    // popcount(this & o) without materializing the AND
    std::size_t and_popcount(const BitVector& o) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
        return c;
    }

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.nbits_ == b.nbits_ && a.words_ == b.words_;
    }

private:
    void adopt_size(const BitVector& a) {
        if (nbits_ != a.nbits_) {
            nbits_ = a.nbits_;
            words_.resize(a.words_.size());
        }
    }

    void mask_tail() {
        const std::size_t rem = nbits_ & 63;
        if (rem != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << rem) - 1;
    }

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace rulelist
