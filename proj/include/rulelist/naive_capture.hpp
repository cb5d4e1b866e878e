#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rulelist/antecedent.hpp"
#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"

namespace rulelist {

// Antecedent truth sets spelled out as ordered integer sets, the way a
// straightforward implementation would keep them.
struct NaivePool {
    std::vector<std::set<std::int32_t>> init_sets;
    std::vector<std::int32_t> cardinalities;
    std::vector<std::uint8_t> labels;
    std::int64_t n = 0;
    std::int64_t n_pos = 0;

    static NaivePool from(const RulePool& pool, const BinaryDataset& data) {
        NaivePool np;
        np.n = static_cast<std::int64_t>(data.n);
        np.labels.resize(data.n);
        for (std::size_t i = 0; i < data.n; ++i)
            np.labels[i] = data.labels_pos.test(i) ? 1 : 0;
        np.n_pos = static_cast<std::int64_t>(data.n_pos);
        np.init_sets.reserve(pool.size());
        np.cardinalities.reserve(pool.size());
        for (const auto& a : pool.antecedents) {
            std::set<std::int32_t> s;
            for (std::size_t i = 0; i < data.n; ++i)
                if (a.init_bits.test(i)) s.insert(static_cast<std::int32_t>(i));
            np.init_sets.push_back(std::move(s));
            np.cardinalities.push_back(a.cardinality);
        }
        return np;
    }
};

// Set-semantics twin of CaptureState: same operations and observable
// behavior, with per-element set arithmetic instead of word-level logic.
// Serves as the correctness oracle in the tests and as the slow backend
// the bench subcommand measures against.
class NaiveCaptureState {
public:
    static NaiveCaptureState build(const NaivePool& pool,
                                   std::span<const std::int32_t> ids) {
        NaiveCaptureState st(pool);
        for (auto id : ids) st.insert_rule(static_cast<int>(st.size()) + 1, id);
        return st;
    }

    explicit NaiveCaptureState(const NaivePool& pool) : pool_(&pool) {
        for (std::int32_t i = 0; i < pool.n; ++i) default_captures_.insert(i);
        default_counts_ = count_set(default_captures_);
    }

    std::size_t size() const { return ids_.size(); }
    std::span<const std::int32_t> ids() const { return ids_; }
    std::int32_t id_at(int pos) const { return ids_[static_cast<std::size_t>(pos - 1)]; }
    std::int32_t card_at(int pos) const {
        return pool_->cardinalities[static_cast<std::size_t>(id_at(pos))];
    }
    const LabelCounts& counts(int pos) const {
        return pos == 0 ? default_counts_ : counts_[static_cast<std::size_t>(pos - 1)];
    }
    const std::set<std::int32_t>& captures(int pos) const {
        return captures_[static_cast<std::size_t>(pos - 1)];
    }

    bool contains(std::int32_t id) const {
        for (auto x : ids_)
            if (x == id) return true;
        return false;
    }

    int remove_rule(int k) {
        const int m = static_cast<int>(size());
        if (k < 1 || k > m) throw config_error("remove_rule: position out of range");
        std::set<std::int32_t> remaining = std::move(captures_[static_cast<std::size_t>(k - 1)]);
        for (int j = k + 1; j <= m; ++j) {
            const auto& init = pool_->init_sets[static_cast<std::size_t>(
                ids_[static_cast<std::size_t>(j - 1)])];
            std::set<std::int32_t> tmp;
            for (auto i : remaining)
                if (init.count(i)) tmp.insert(i);
            auto& dest = captures_[static_cast<std::size_t>(j - 2)];
            dest = captures_[static_cast<std::size_t>(j - 1)];
            for (auto i : tmp) {
                dest.insert(i);
                remaining.erase(i);
            }
            counts_[static_cast<std::size_t>(j - 2)] = count_set(dest);
        }
        for (auto i : remaining) default_captures_.insert(i);
        default_counts_ = count_set(default_captures_);
        captures_.pop_back();
        counts_.pop_back();
        ids_.erase(ids_.begin() + (k - 1));
        return k;
    }

    int insert_rule(int k, std::int32_t id) {
        const int m = static_cast<int>(size());
        if (k < 1 || k > m + 1) throw config_error("insert_rule: position out of range");
        if (id < 0 || static_cast<std::size_t>(id) >= pool_->init_sets.size())
            throw config_error("insert_rule: unknown antecedent id " + std::to_string(id));
        if (contains(id)) throw config_error("insert_rule: antecedent already in list");

        captures_.insert(captures_.begin() + (k - 1), {});
        counts_.insert(counts_.begin() + (k - 1), LabelCounts{});
        ids_.insert(ids_.begin() + (k - 1), id);

        std::set<std::int32_t> captured;
        for (int j = 1; j < k; ++j)
            for (auto i : captures_[static_cast<std::size_t>(j - 1)]) captured.insert(i);
        for (int j = k; j <= m + 1; ++j) {
            const auto& init = pool_->init_sets[static_cast<std::size_t>(
                ids_[static_cast<std::size_t>(j - 1)])];
            auto& cap = captures_[static_cast<std::size_t>(j - 1)];
            cap.clear();
            for (auto i : init)
                if (!captured.count(i)) cap.insert(i);
            for (auto i : cap) captured.insert(i);
            counts_[static_cast<std::size_t>(j - 1)] = count_set(cap);
        }
        default_captures_.clear();
        for (std::int32_t i = 0; i < pool_->n; ++i)
            if (!captured.count(i)) default_captures_.insert(i);
        default_counts_ = count_set(default_captures_);
        return k;
    }

    int swap_rules(int j, int k) {
        const int m = static_cast<int>(size());
        if (j < 1 || k > m || j >= k) throw config_error("swap_rules: need 1 <= j < k <= m");
        std::set<std::int32_t> captured;
        for (int t = j; t <= k; ++t)
            for (auto i : captures_[static_cast<std::size_t>(t - 1)]) captured.insert(i);
        std::swap(ids_[static_cast<std::size_t>(j - 1)], ids_[static_cast<std::size_t>(k - 1)]);
        for (int t = j; t <= k; ++t) {
            const auto& init = pool_->init_sets[static_cast<std::size_t>(
                ids_[static_cast<std::size_t>(t - 1)])];
            auto& cap = captures_[static_cast<std::size_t>(t - 1)];
            cap.clear();
            for (auto i : captured)
                if (init.count(i)) cap.insert(i);
            for (auto i : cap) captured.erase(i);
            counts_[static_cast<std::size_t>(t - 1)] = count_set(cap);
        }
        return j;
    }

private:
    LabelCounts count_set(const std::set<std::int32_t>& s) const {
        LabelCounts c;
        for (auto i : s)
            pool_->labels[static_cast<std::size_t>(i)] ? ++c.n1 : ++c.n0;
        return c;
    }

    const NaivePool* pool_;
    std::vector<std::int32_t> ids_;
    std::vector<std::set<std::int32_t>> captures_;
    std::vector<LabelCounts> counts_;
    std::set<std::int32_t> default_captures_;
    LabelCounts default_counts_;
};

}  // namespace rulelist
