#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rulelist/bitvector.hpp"
#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"

namespace rulelist {

// A mined conjunction of feature literals with its truth bit vector.
struct Antecedent {
    std::int32_t id = -1;
    std::vector<std::int32_t> literals;  // strictly increasing feature indices
    std::int32_t cardinality = 0;
    BitVector init_bits;
    std::int64_t support = 0;
};

struct RulePool {
    std::vector<Antecedent> antecedents;
    std::vector<std::vector<std::int32_t>> by_cardinality;  // index = cardinality
    std::vector<std::int64_t> cardinality_counts;           // |by_cardinality[c]|
    int min_cardinality = 1;
    int max_cardinality = 1;

    std::size_t size() const { return antecedents.size(); }
    const Antecedent& operator[](std::int32_t id) const {
        return antecedents[static_cast<std::size_t>(id)];
    }

    std::string render(std::int32_t id, const BinaryDataset& data,
                       const char* sep = " & ") const {
        const auto& a = antecedents[static_cast<std::size_t>(id)];
        std::string s;
        for (std::size_t i = 0; i < a.literals.size(); ++i) {
            if (i) s += sep;
            s += data.features[static_cast<std::size_t>(a.literals[i])].name;
        }
        return s;
    }
};

struct MineOptions {
    double min_support_frac = 0.0;  // 0 with target_rules > 0 means auto-tune
    int min_card = 1;
    int max_card = 2;
    int target_rules = 0;
};

namespace detail {

struct Candidate {
    std::vector<std::int32_t> literals;
    BitVector bits;
    std::int64_t support;
};

// Level-wise enumeration with anti-monotone pruning. One literal per source
// column; a conjunction is extended only while it stays frequent.
inline std::vector<Candidate> enumerate_frequent(const BinaryDataset& data,
                                                 std::int64_t threshold, int max_card) {
    std::vector<Candidate> all;
    std::vector<Candidate> level;
    const auto nf = static_cast<std::int32_t>(data.n_features());
    for (std::int32_t f = 0; f < nf; ++f) {
        auto sup = static_cast<std::int64_t>(data.feature_bits[static_cast<std::size_t>(f)].popcount());
        if (sup >= threshold)
            level.push_back({{f}, data.feature_bits[static_cast<std::size_t>(f)], sup});
    }
    all = level;
    for (int card = 2; card <= max_card && !level.empty(); ++card) {
        std::vector<Candidate> next;
        for (const auto& cand : level) {
            for (std::int32_t f = cand.literals.back() + 1; f < nf; ++f) {
                const int col = data.feature_column[static_cast<std::size_t>(f)];
                bool same_col = false;
                for (auto lit : cand.literals)
                    if (data.feature_column[static_cast<std::size_t>(lit)] == col) {
                        same_col = true;
                        break;
                    }
                if (same_col) continue;
                Candidate c;
                c.bits = BitVector(data.n);
                c.bits.assign_and(cand.bits, data.feature_bits[static_cast<std::size_t>(f)]);
                c.support = static_cast<std::int64_t>(c.bits.popcount());
                if (c.support < threshold) continue;
                c.literals = cand.literals;
                c.literals.push_back(f);
                next.push_back(std::move(c));
            }
        }
        for (const auto& c : next) all.push_back(c);
        level = std::move(next);
    }
    return all;
}

inline RulePool assemble_pool(std::vector<Candidate> cands, int min_card, int max_card) {
    std::erase_if(cands, [&](const Candidate& c) {
        return static_cast<int>(c.literals.size()) < min_card;
    });
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.literals.size() != b.literals.size()) return a.literals.size() < b.literals.size();
        return a.literals < b.literals;
    });
    RulePool pool;
    pool.min_cardinality = min_card;
    pool.max_cardinality = max_card;
    pool.by_cardinality.assign(static_cast<std::size_t>(max_card) + 1, {});
    pool.cardinality_counts.assign(static_cast<std::size_t>(max_card) + 1, 0);
    pool.antecedents.reserve(cands.size());
    for (auto& c : cands) {
        Antecedent a;
        a.id = static_cast<std::int32_t>(pool.antecedents.size());
        a.cardinality = static_cast<std::int32_t>(c.literals.size());
        a.literals = std::move(c.literals);
        a.init_bits = std::move(c.bits);
        a.support = c.support;
        pool.by_cardinality[static_cast<std::size_t>(a.cardinality)].push_back(a.id);
        ++pool.cardinality_counts[static_cast<std::size_t>(a.cardinality)];
        pool.antecedents.push_back(std::move(a));
    }
    return pool;
}

}  // namespace detail

// All frequent conjunctions with min_card..max_card literals and support
// >= ceil(min_support_frac * n).
inline RulePool mine(const BinaryDataset& data, double min_support_frac, int min_card,
                     int max_card) {
    if (!(min_support_frac > 0.0 && min_support_frac < 1.0))
        throw config_error("min_support_frac must be in (0,1)");
    if (min_card < 1 || min_card > max_card)
        throw config_error("need 1 <= min_card <= max_card");
    const auto threshold = static_cast<std::int64_t>(
        std::ceil(min_support_frac * static_cast<double>(data.n)));
    auto pool = detail::assemble_pool(
        detail::enumerate_frequent(data, std::max<std::int64_t>(threshold, 1), max_card),
        min_card, max_card);
    if (pool.antecedents.empty())
        throw mining_error("no antecedent reaches support " + std::to_string(threshold) +
                           "; lower --min-support or the cardinality bounds");
    return pool;
}

// Sweeps the 5%,10%,...,95% support grid and keeps the point whose pool size
// is closest to target_rule_count (ties break toward higher support). The
// enumeration runs once at the lowest grid point; higher points are support
// threshold filters of it.
inline std::pair<double, RulePool> tune_support(const BinaryDataset& data,
                                                int target_rule_count, int min_card,
                                                int max_card) {
    if (target_rule_count < 1) throw config_error("target_rule_count must be >= 1");
    if (min_card < 1 || min_card > max_card)
        throw config_error("need 1 <= min_card <= max_card");

    const double lowest = 0.05;
    const auto base_threshold = std::max<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(lowest * static_cast<double>(data.n))), 1);
    auto cands = detail::enumerate_frequent(data, base_threshold, max_card);
    std::erase_if(cands, [&](const detail::Candidate& c) {
        return static_cast<int>(c.literals.size()) < min_card;
    });

    double best_frac = -1.0;
    std::int64_t best_dist = 0;
    for (int g = 1; g <= 19; ++g) {
        const double frac = 0.05 * g;
        const auto threshold = static_cast<std::int64_t>(
            std::ceil(frac * static_cast<double>(data.n)));
        std::int64_t count = 0;
        for (const auto& c : cands)
            if (c.support >= threshold) ++count;
        if (count == 0) continue;
        const auto dist = std::abs(count - target_rule_count);
        if (best_frac < 0.0 || dist <= best_dist) {  // grid ascends, so <= prefers higher support
            best_frac = frac;
            best_dist = dist;
        }
    }
    if (best_frac < 0.0)
        throw mining_error("every support grid point yields an empty pool");

    const auto chosen = static_cast<std::int64_t>(
        std::ceil(best_frac * static_cast<double>(data.n)));
    std::erase_if(cands,
                  [&](const detail::Candidate& c) { return c.support < chosen; });
    return {best_frac, detail::assemble_pool(std::move(cands), min_card, max_card)};
}

// One antecedent per line: id<TAB>lit1&lit2<TAB>support
inline void dump_pool(const RulePool& pool, const BinaryDataset& data, std::ostream& os) {
    for (const auto& a : pool.antecedents)
        os << a.id << '\t' << pool.render(a.id, data, "&") << '\t' << a.support << '\n';
}

}  // namespace rulelist
