#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rulelist/antecedent.hpp"
#include "rulelist/bitvector.hpp"
#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"

namespace rulelist {

struct LabelCounts {
    std::int64_t n0 = 0;
    std::int64_t n1 = 0;
    std::int64_t total() const { return n0 + n1; }
    friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

// Which rule captures which observation, maintained incrementally while the
// rule list mutates. Positions are 1-based; position 0 names the default
// rule. Invariants after every operation:
//   - captures[1] | ... | captures[m] | default = all ones, pairwise disjoint
//   - captures[j] = init(a_j) & ~(init(a_1) | ... | init(a_{j-1}))
//   - counts match popcounts against the label vector
class CaptureState {
public:
    static CaptureState build(const RulePool& pool, const BinaryDataset& data,
                              std::span<const std::int32_t> ids) {
        CaptureState st(pool, data);
        for (auto id : ids) st.insert_rule(static_cast<int>(st.size()) + 1, id);
        return st;
    }

    CaptureState(const RulePool& pool, const BinaryDataset& data)
        : pool_(&pool),
          data_(&data),
          default_captures_(BitVector::ones(data.n)),
          scratch_(data.n),
          accum_(data.n) {
        default_counts_ = {static_cast<std::int64_t>(data.n_neg),
                           static_cast<std::int64_t>(data.n_pos)};
    }

    std::size_t size() const { return ids_.size(); }
    std::size_t n() const { return data_->n; }
    const RulePool& pool() const { return *pool_; }
    const BinaryDataset& data() const { return *data_; }

    std::span<const std::int32_t> ids() const { return ids_; }
    std::int32_t id_at(int pos) const { return ids_[static_cast<std::size_t>(pos - 1)]; }
    std::int32_t card_at(int pos) const { return (*pool_)[id_at(pos)].cardinality; }

    const BitVector& captures(int pos) const {
        return captures_[static_cast<std::size_t>(pos - 1)];
    }
    const BitVector& default_captures() const { return default_captures_; }

    // counts(0) is the default rule.
    const LabelCounts& counts(int pos) const {
        return pos == 0 ? default_counts_ : counts_[static_cast<std::size_t>(pos - 1)];
    }

    bool contains(std::int32_t id) const {
        for (auto x : ids_)
            if (x == id) return true;
        return false;
    }

    // Removes the rule at position k. Observations it captured fall through
    // to later rules in order, then to the default. Returns the first
    // position whose counts may have changed (k, or 0 when the list empties).
    int remove_rule(int k) {
        const int m = static_cast<int>(size());
        if (k < 1 || k > m) throw config_error("remove_rule: position out of range");

        BitVector remaining = std::move(captures_[static_cast<std::size_t>(k - 1)]);
        LabelCounts freed = counts_[static_cast<std::size_t>(k - 1)];
        for (int j = k + 1; j <= m; ++j) {
            const auto& init = (*pool_)[ids_[static_cast<std::size_t>(j - 1)]].init_bits;
            scratch_.assign_and(init, remaining);  // what rule j picks up
            LabelCounts gained = count_bits(scratch_);
            captures_[static_cast<std::size_t>(j - 2)] =
                std::move(captures_[static_cast<std::size_t>(j - 1)]);
            captures_[static_cast<std::size_t>(j - 2)].or_with(scratch_);
            counts_[static_cast<std::size_t>(j - 2)] = {
                counts_[static_cast<std::size_t>(j - 1)].n0 + gained.n0,
                counts_[static_cast<std::size_t>(j - 1)].n1 + gained.n1};
            remaining.andnot_with(scratch_);
            freed.n0 -= gained.n0;
            freed.n1 -= gained.n1;
        }
        default_captures_.or_with(remaining);
        default_counts_.n0 += freed.n0;
        default_counts_.n1 += freed.n1;

        captures_.pop_back();  // the tail slot was moved down (or out, when k == m)
        spare_ = std::move(remaining);
        counts_.pop_back();
        ids_.erase(ids_.begin() + (k - 1));
        return k;
    }

    // Inserts antecedent `id` at position k (1..m+1). Captures for k..m+1
    // are re-derived behind the accumulated prefix; the default becomes the
    // complement. Returns k.
    int insert_rule(int k, std::int32_t id) {
        const int m = static_cast<int>(size());
        if (k < 1 || k > m + 1) throw config_error("insert_rule: position out of range");
        if (id < 0 || static_cast<std::size_t>(id) >= pool_->size())
            throw config_error("insert_rule: unknown antecedent id " + std::to_string(id));
        if (contains(id)) throw config_error("insert_rule: antecedent already in list");

        if (spare_.size() != data_->n) spare_ = BitVector(data_->n);
        captures_.insert(captures_.begin() + (k - 1), std::move(spare_));
        spare_ = BitVector();
        counts_.insert(counts_.begin() + (k - 1), LabelCounts{});
        ids_.insert(ids_.begin() + (k - 1), id);

        accum_.clear();
        for (int j = 1; j < k; ++j) accum_.or_with(captures_[static_cast<std::size_t>(j - 1)]);
        for (int j = k; j <= m + 1; ++j) {
            auto& cap = captures_[static_cast<std::size_t>(j - 1)];
            cap.assign_andnot((*pool_)[ids_[static_cast<std::size_t>(j - 1)]].init_bits,
                              accum_);
            counts_[static_cast<std::size_t>(j - 1)] = count_bits(cap);
            accum_.or_with(cap);
        }
        default_captures_.assign_not(accum_);
        default_counts_ = count_bits(default_captures_);
        return k;
    }

    // Exchanges the rules at positions j < k and re-derives captures for the
    // span j..k; observations captured before j or after k cannot move.
    // Returns j.
    int swap_rules(int j, int k) {
        const int m = static_cast<int>(size());
        if (j < 1 || k > m || j >= k) throw config_error("swap_rules: need 1 <= j < k <= m");

        accum_.clear();
        for (int t = j; t <= k; ++t) accum_.or_with(captures_[static_cast<std::size_t>(t - 1)]);
        std::swap(ids_[static_cast<std::size_t>(j - 1)], ids_[static_cast<std::size_t>(k - 1)]);
        for (int t = j; t <= k; ++t) {
            auto& cap = captures_[static_cast<std::size_t>(t - 1)];
            cap.assign_and(accum_, (*pool_)[ids_[static_cast<std::size_t>(t - 1)]].init_bits);
            counts_[static_cast<std::size_t>(t - 1)] = count_bits(cap);
            accum_.andnot_with(cap);
        }
#ifndef NDEBUG
        if (!accum_.none())
            throw state_error("swap_rules: observations escaped the swapped span");
#endif
        return j;
    }

    // Full invariant sweep against the first-match formula; used by tests
    // and the periodic consistency check. Subsumes the disjoint-cover and
    // subset invariants.
    void check_consistency() const {
        BitVector prefix(data_->n);
        BitVector expected(data_->n);
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            const auto& init = (*pool_)[ids_[i]].init_bits;
            expected.assign_andnot(init, prefix);
            if (!(expected == captures_[i]))
                throw state_error("first-match violated at position " + std::to_string(i + 1));
            if (count_bits(captures_[i]) != counts_[i])
                throw state_error("counts mismatch at position " + std::to_string(i + 1));
            prefix.or_with(init);
        }
        expected.assign_not(prefix);
        if (!(expected == default_captures_))
            throw state_error("default captures are not the uncaptured complement");
        if (count_bits(default_captures_) != default_counts_)
            throw state_error("default counts mismatch");
    }

private:
    LabelCounts count_bits(const BitVector& v) const {
        const auto n1 = static_cast<std::int64_t>(v.and_popcount(data_->labels_pos));
        return {static_cast<std::int64_t>(v.popcount()) - n1, n1};
    }

    const RulePool* pool_;
    const BinaryDataset* data_;
    std::vector<std::int32_t> ids_;
    std::vector<BitVector> captures_;
    std::vector<LabelCounts> counts_;
    BitVector default_captures_;
    LabelCounts default_counts_;
    BitVector scratch_;
    BitVector accum_;
    BitVector spare_;  // recycled buffer between remove/insert
};

}  // namespace rulelist
