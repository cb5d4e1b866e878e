#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"
#include "rulelist/model.hpp"
#include "rulelist/search.hpp"

namespace rulelist {

// Rank-based Mann-Whitney AUC with mid-ranks for tied scores.
inline double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw config_error("auc: scores and labels differ in length");
    const auto n = scores.size();
    std::size_t n_pos = 0;
    for (auto l : labels) n_pos += l ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw config_error("auc needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]]) rank_sum_pos += mid_rank;
        i = j;
    }
    return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double accuracy_at_half(std::span<const double> scores,
                               std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw config_error("accuracy: bad input lengths");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if ((scores[i] >= 0.5 ? 1 : 0) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

struct FoldReport {
    int fold = 0;
    double auc = 0.0;
    double accuracy = 0.0;
    int n_rules = 0;
    double seconds = 0.0;
};

struct CvReport {
    std::vector<FoldReport> folds;

    template <class Get>
    double mean(Get get) const {
        double s = 0.0;
        for (const auto& f : folds) s += get(f);
        return s / static_cast<double>(folds.size());
    }
    template <class Get>
    double median(Get get) const {
        std::vector<double> v;
        for (const auto& f : folds) v.push_back(get(f));
        std::sort(v.begin(), v.end());
        const auto k = v.size() / 2;
        return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
    }
    template <class Get>
    double stddev(Get get) const {
        const double mu = mean(get);
        double s = 0.0;
        for (const auto& f : folds) s += (get(f) - mu) * (get(f) - mu);
        return folds.size() > 1 ? std::sqrt(s / static_cast<double>(folds.size() - 1)) : 0.0;
    }

    double mean_auc() const { return mean([](const FoldReport& f) { return f.auc; }); }
    double mean_accuracy() const {
        return mean([](const FoldReport& f) { return f.accuracy; });
    }
    double mean_rules() const {
        return mean([](const FoldReport& f) { return static_cast<double>(f.n_rules); });
    }

    // fold,auc,accuracy,n_rules,seconds rows; the (n_rules, auc) columns double
    // as the scatter data for accuracy-vs-sparsity plots.
    void write_csv(std::ostream& os) const {
        os << "fold,auc,accuracy,n_rules,seconds\n";
        for (const auto& f : folds)
            os << f.fold << ',' << f.auc << ',' << f.accuracy << ',' << f.n_rules << ','
               << f.seconds << '\n';
        auto agg = [&](const char* name, auto get) {
            os << name << ',' << mean(get) << ',' << median(get) << ',' << stddev(get)
               << '\n';
        };
        os << "aggregate,mean,median,std\n";
        agg("auc", [](const FoldReport& f) { return f.auc; });
        agg("accuracy", [](const FoldReport& f) { return f.accuracy; });
        agg("n_rules", [](const FoldReport& f) { return static_cast<double>(f.n_rules); });
        agg("seconds", [](const FoldReport& f) { return f.seconds; });
    }
};

// Maps every model feature to a column of `table` by name.
inline std::vector<int> map_model_columns(const TrainedModel& model, const RawTable& table) {
    std::vector<int> out(model.features.size(), -1);
    for (std::size_t f = 0; f < model.features.size(); ++f) {
        const auto& want = model.features[f].column;
        for (std::size_t c = 0; c < table.column_names.size(); ++c)
            if (table.column_names[c] == want) {
                out[f] = static_cast<int>(c);
                break;
            }
        if (out[f] < 0)
            throw schema_error("feature '" + model.features[f].name +
                               "' references column '" + want + "' absent from the data");
    }
    return out;
}

inline std::vector<double> predict_table(const TrainedModel& model, const RawTable& table,
                                         std::vector<int>* matched_rule = nullptr) {
    const auto cols = map_model_columns(model, table);
    std::vector<double> scores;
    scores.reserve(table.n_rows());
    std::vector<std::string> row(table.n_cols());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) row[c] = table.columns[c][r];
        const auto bits = binarize_row(model.features, cols, row);
        const int idx = model.first_match(bits);
        if (matched_rule) matched_rule->push_back(idx);
        scores.push_back(idx == 0 ? model.default_theta
                                  : model.rules[static_cast<std::size_t>(idx - 1)].theta);
    }
    return scores;
}

// Per-rule accuracy among the test points each rule captures (first-match).
// Index 0 is the default rule.
inline std::vector<double> per_rule_accuracy(const TrainedModel& model,
                                             const RawTable& table) {
    std::vector<int> matched;
    const auto scores = predict_table(model, table, &matched);
    std::vector<double> hit(model.rules.size() + 1, 0.0), tot(model.rules.size() + 1, 0.0);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto idx = static_cast<std::size_t>(matched[r]);
        tot[idx] += 1.0;
        if ((scores[r] >= 0.5 ? 1 : 0) == table.labels[r]) hit[idx] += 1.0;
    }
    std::vector<double> acc(tot.size(), 0.0);
    for (std::size_t i = 0; i < tot.size(); ++i) acc[i] = tot[i] > 0 ? hit[i] / tot[i] : 1.0;
    return acc;
}

struct CvOptions {
    int folds = 10;
    BinarizeOptions binarize;
    MineOptions mine;
    Hyperparams hp;
    SearchConfig search;
    bool auto_lambda = true;
    std::vector<TrainedModel>* models_out = nullptr;  // optional per-fold models
};

// Seeded shuffled k-fold cross-validation. Binarization quantiles, the mined
// pool and the pilot lambda all come from each training split alone.
inline CvReport cross_validate(const RawTable& table, const CvOptions& opts) {
    if (opts.folds < 2) throw config_error("cross-validation needs k >= 2");
    const auto n = table.n_rows();
    if (n < static_cast<std::size_t>(opts.folds))
        throw config_error("fewer rows than folds");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opts.search.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(n);
    for (std::size_t t = 0; t < n; ++t)
        fold_of[order[t]] = static_cast<int>(t % static_cast<std::size_t>(opts.folds));

    CvReport report;
    for (int fold = 0; fold < opts.folds; ++fold) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < n; ++r)
            (fold_of[r] == fold ? test_rows : train_rows).push_back(r);
        const auto train = table.subset(train_rows);
        const auto test = table.subset(test_rows);

        auto has_both = [](const RawTable& t) {
            bool p = false, q = false;
            for (auto l : t.labels) (l ? p : q) = true;
            return p && q;
        };
        if (!has_both(train) || !has_both(test))
            throw schema_error("degenerate fold " + std::to_string(fold) +
                               ": a split lost one of the classes");

        const auto data = binarize(train, opts.binarize);
        RulePool pool;
        if (opts.mine.min_support_frac > 0.0)
            pool = mine(data, opts.mine.min_support_frac, opts.mine.min_card,
                        opts.mine.max_card);
        else
            pool = tune_support(data, opts.mine.target_rules > 0 ? opts.mine.target_rules : 300,
                                opts.mine.min_card, opts.mine.max_card)
                       .second;

        SearchConfig fold_cfg = opts.search;
        fold_cfg.seed = opts.search.seed ^ (0x9e3779b97f4a7c15ULL * (fold + 1));
        Hyperparams hp = opts.hp;
        if (opts.auto_lambda) hp.lambda = auto_lambda(data, pool, hp, fold_cfg);
        auto model =
            run(data, pool, hp, fold_cfg, table.label_name, table.positive_label);

        const auto scores = predict_table(model, test);
        FoldReport fr;
        fr.fold = fold;
        fr.auc = auc(scores, test.labels);
        fr.accuracy = accuracy_at_half(scores, test.labels);
        fr.n_rules = static_cast<int>(model.rules.size());
        fr.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.folds.push_back(fr);
        if (opts.models_out) opts.models_out->push_back(std::move(model));
    }
    return report;
}

}  // namespace rulelist
