#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rulelist/rulelist.hpp"

namespace testutil {

// Builds a BinaryDataset directly from explicit feature bit patterns, one
// string of '0'/'1' per feature, plus a label pattern.
inline rulelist::BinaryDataset make_dataset(const std::vector<std::string>& feature_rows,
                                            const std::string& labels) {
    rulelist::BinaryDataset d;
    d.n = labels.size();
    d.labels_pos = rulelist::BitVector(d.n);
    for (std::size_t i = 0; i < d.n; ++i)
        if (labels[i] == '1') d.labels_pos.set(i);
    d.n_pos = d.labels_pos.popcount();
    d.n_neg = d.n - d.n_pos;
    for (std::size_t f = 0; f < feature_rows.size(); ++f) {
        rulelist::FeatureDef def;
        def.name = "f" + std::to_string(f);
        def.column = def.name;
        def.column_index = static_cast<int>(f);
        def.kind = rulelist::FeatureDef::Kind::Level;
        def.level = "1";
        rulelist::BitVector bits(d.n);
        for (std::size_t i = 0; i < d.n; ++i)
            if (feature_rows[f][i] == '1') bits.set(i);
        d.features.push_back(def);
        d.feature_bits.push_back(std::move(bits));
        d.feature_column.push_back(static_cast<int>(f));
    }
    return d;
}

// A pool whose antecedents are given directly as bit patterns with assigned
// cardinalities, bypassing the miner.
inline rulelist::RulePool make_pool(const std::vector<std::pair<std::string, int>>& ants) {
    rulelist::RulePool pool;
    int max_card = 1;
    for (const auto& [bits, card] : ants) max_card = std::max(max_card, card);
    pool.min_cardinality = 1;
    pool.max_cardinality = max_card;
    pool.by_cardinality.assign(static_cast<std::size_t>(max_card) + 1, {});
    pool.cardinality_counts.assign(static_cast<std::size_t>(max_card) + 1, 0);
    for (const auto& [bits, card] : ants) {
        rulelist::Antecedent a;
        a.id = static_cast<std::int32_t>(pool.antecedents.size());
        a.cardinality = card;
        for (int l = 0; l < card; ++l) a.literals.push_back(a.id * 8 + l);  // synthetic
        a.init_bits = rulelist::BitVector(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i] == '1') a.init_bits.set(i);
        a.support = static_cast<std::int64_t>(a.init_bits.popcount());
        pool.by_cardinality[static_cast<std::size_t>(card)].push_back(a.id);
        ++pool.cardinality_counts[static_cast<std::size_t>(card)];
        pool.antecedents.push_back(std::move(a));
    }
    return pool;
}

struct RandomInstance {
    rulelist::BinaryDataset data;
    rulelist::RulePool pool;
};

// Random observations and a random mined pool; the workhorse for the
// capture-oracle and bound-soundness suites.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_n = 256,
                                      std::size_t max_pool = 64, int max_card = 3) {
    const auto n = std::uniform_int_distribution<std::size_t>(8, max_n)(rng);
    std::string labels(n, '0');
    for (auto& c : labels)
        if (std::uniform_real_distribution<>(0, 1)(rng) < 0.5) c = '1';

    const int n_features = std::uniform_int_distribution<int>(4, 12)(rng);
    std::vector<std::string> feats;
    for (int f = 0; f < n_features; ++f) {
        std::string bits(n, '0');
        const double p = std::uniform_real_distribution<>(0.2, 0.8)(rng);
        for (auto& c : bits)
            if (std::uniform_real_distribution<>(0, 1)(rng) < p) c = '1';
        feats.push_back(std::move(bits));
    }
    RandomInstance inst;
    inst.data = make_dataset(feats, labels);

    std::vector<std::pair<std::string, int>> ants;
    const auto pool_size = std::uniform_int_distribution<std::size_t>(4, max_pool)(rng);
    for (std::size_t a = 0; a < pool_size; ++a) {
        const int card =
            std::uniform_int_distribution<int>(1, std::min(max_card, n_features))(rng);
        std::vector<int> lits;
        while (static_cast<int>(lits.size()) < card) {
            int f = std::uniform_int_distribution<int>(0, n_features - 1)(rng);
            if (std::find(lits.begin(), lits.end(), f) == lits.end()) lits.push_back(f);
        }
        std::string bits(n, '1');
        for (int f : lits)
            for (std::size_t i = 0; i < n; ++i)
                if (feats[static_cast<std::size_t>(f)][i] == '0') bits[i] = '0';
        ants.emplace_back(std::move(bits), card);
    }
    inst.pool = make_pool(ants);
    return inst;
}

// CSV writer for loader tests.
inline std::string write_csv(const std::string& name, const std::string& content) {
    const std::string path = std::string("/tmp/rulelist_test_") + name;
    std::ofstream os(path);
    os << content;
    return path;
}

}  // namespace testutil
