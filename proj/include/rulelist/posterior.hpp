#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rulelist/antecedent.hpp"
#include "rulelist/capture.hpp"
#include "rulelist/errors.hpp"

namespace rulelist {

struct Hyperparams {
    double lambda = 5.0;  // expected list length (pilot value; see auto_lambda)
    double eta = 1.0;     // expected rule cardinality
    double alpha0 = 1.0;  // Beta pseudo-count for label 0
    double alpha1 = 1.0;  // Beta pseudo-count for label 1

    void validate() const {
        if (!(lambda > 0.0 && eta > 0.0 && alpha0 > 0.0 && alpha1 > 0.0))
            throw config_error("hyperparameters must all be strictly positive");
    }
};

struct PosteriorValue {
    double log_prior = 0.0;
    double log_likelihood = 0.0;
    double log_posterior = 0.0;  // always log_prior + log_likelihood

    static PosteriorValue of(double lp, double ll) { return {lp, ll, lp + ll}; }
};

namespace detail {

// log sum_{j=0}^{K} lambda^j / j!
inline double log_truncated_poisson_norm(double lambda, std::int64_t K) {
    double max_term = -std::numeric_limits<double>::infinity();
    const double ll = std::log(lambda);
    for (std::int64_t j = 0; j <= K; ++j)
        max_term = std::max(max_term, static_cast<double>(j) * ll - std::lgamma(j + 1.0));
    double s = 0.0;
    for (std::int64_t j = 0; j <= K; ++j)
        s += std::exp(static_cast<double>(j) * ll - std::lgamma(j + 1.0) - max_term);
    return max_term + std::log(s);
}

// Walks the list's cardinalities against the pool inventory, accumulating
// the truncated-Poisson cardinality terms and the uniform-choice terms:
//   sum_j [ ln p(c_j | R_{j-1}, eta) - ln |Q_{c_j}| ]
// Inventory counts are depleted as antecedents are consumed.
inline double log_cardinality_chain(std::span<const std::int32_t> cards,
                                    std::span<const std::int64_t> pool_card_counts,
                                    double eta) {
    std::vector<std::int64_t> avail(pool_card_counts.begin(), pool_card_counts.end());
    const double le = std::log(eta);
    double out = 0.0;
    for (auto c : cards) {
        if (c < 0 || static_cast<std::size_t>(c) >= avail.size() ||
            avail[static_cast<std::size_t>(c)] <= 0)
            throw state_error("no unused antecedent of cardinality " + std::to_string(c));
        double norm = 0.0;
        for (std::size_t k = 0; k < avail.size(); ++k)
            if (avail[k] > 0)
                norm += std::exp(static_cast<double>(k) * le - std::lgamma(k + 1.0));
        out += static_cast<double>(c) * le - std::lgamma(c + 1.0) - std::log(norm);
        out -= std::log(static_cast<double>(avail[static_cast<std::size_t>(c)]));
        --avail[static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace detail

// Beta-Binomial marginal per rule, summed over the list (default included):
//   sum_j lnG(N_j0 + a0) + lnG(N_j1 + a1) - lnG(N_j0 + N_j1 + a0 + a1)
inline double log_likelihood(std::span<const LabelCounts> counts, const Hyperparams& hp) {
    double s = 0.0;
    for (const auto& c : counts) {
        if (c.n0 < 0 || c.n1 < 0) throw config_error("negative capture count");
        s += std::lgamma(static_cast<double>(c.n0) + hp.alpha0) +
             std::lgamma(static_cast<double>(c.n1) + hp.alpha1) -
             std::lgamma(static_cast<double>(c.total()) + hp.alpha0 + hp.alpha1);
    }
    return s;
}

// Three-part prior: truncated Poisson on the list length, truncated Poisson
// on each rule's cardinality over the still-available sizes, and a uniform
// draw among the unused antecedents of that size.
inline double log_prior(std::span<const std::int32_t> ids, const RulePool& pool,
                        const Hyperparams& hp) {
    hp.validate();
    const auto A = static_cast<std::int64_t>(pool.size());
    const auto m = static_cast<std::int64_t>(ids.size());
    if (m > A) throw config_error("rule list longer than the antecedent pool");
    std::vector<std::int32_t> cards;
    cards.reserve(ids.size());
    for (auto id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= pool.size())
            throw config_error("unknown antecedent id " + std::to_string(id));
        cards.push_back(pool[id].cardinality);
    }
    double lp = static_cast<double>(m) * std::log(hp.lambda) - std::lgamma(m + 1.0) -
                detail::log_truncated_poisson_norm(hp.lambda, A);
    lp += detail::log_cardinality_chain(cards, pool.cardinality_counts, hp.eta);
    return lp;
}

// Precomputed tables bound to one (pool, data, hyperparams) triple. All
// methods are const and safe to share across chains.
class PosteriorModel {
public:
    PosteriorModel(const RulePool& pool, const BinaryDataset& data, const Hyperparams& hp)
        : hp_(hp),
          pool_size_(static_cast<std::int64_t>(pool.size())),
          card_counts_(pool.cardinality_counts) {
        hp_.validate();
        const auto n = static_cast<std::int64_t>(data.n);
        lg_a0_.resize(n + 1);
        lg_a1_.resize(n + 1);
        lg_a01_.resize(n + 1);
        for (std::int64_t v = 0; v <= n; ++v) {
            lg_a0_[v] = std::lgamma(static_cast<double>(v) + hp_.alpha0);
            lg_a1_[v] = std::lgamma(static_cast<double>(v) + hp_.alpha1);
            lg_a01_[v] = std::lgamma(static_cast<double>(v) + hp_.alpha0 + hp_.alpha1);
        }
        lnZ_ = detail::log_truncated_poisson_norm(hp_.lambda, pool_size_);
        log_factorial_.resize(pool_size_ + 2);
        for (std::int64_t v = 0; v < static_cast<std::int64_t>(log_factorial_.size()); ++v)
            log_factorial_[v] = std::lgamma(static_cast<double>(v) + 1.0);
        log_int_.resize(pool_size_ + 1);
        for (std::int64_t v = 1; v <= pool_size_; ++v)
            log_int_[v] = std::log(static_cast<double>(v));
        eta_pow_.resize(card_counts_.size());
        for (std::size_t c = 0; c < card_counts_.size(); ++c)
            eta_pow_[c] = std::exp(static_cast<double>(c) * std::log(hp_.eta) -
                                   std::lgamma(static_cast<double>(c) + 1.0));
    }

    const Hyperparams& hp() const { return hp_; }
    std::int64_t pool_size() const { return pool_size_; }
    double log_poisson_norm() const { return lnZ_; }

    double rule_loglik(const LabelCounts& c) const {
        return lg_a0_[c.n0] + lg_a1_[c.n1] - lg_a01_[c.total()];
    }

    // ln p(m | A, lambda)
    double log_length_prior(std::int64_t m) const {
        return static_cast<double>(m) * std::log(hp_.lambda) - log_factorial_[m] - lnZ_;
    }

    template <class Engine>
    double list_log_prior(const Engine& st) const {
        const auto m = static_cast<std::int64_t>(st.size());
        if (m > pool_size_) throw config_error("rule list longer than the antecedent pool");
        double lp = log_length_prior(m);
        std::vector<std::int64_t> avail = card_counts_;
        for (int pos = 1; pos <= static_cast<int>(m); ++pos) {
            const auto c = static_cast<std::size_t>(st.card_at(pos));
            double norm = 0.0;
            for (std::size_t k = 0; k < avail.size(); ++k)
                if (avail[k] > 0) norm += eta_pow_[k];
            lp += std::log(eta_pow_[c] / norm) - log_int_[avail[c]];
            --avail[c];
        }
        return lp;
    }

    template <class Engine>
    PosteriorValue evaluate(const Engine& st) const {
        double ll = rule_loglik(st.counts(0));
        for (int pos = 1; pos <= static_cast<int>(st.size()); ++pos)
            ll += rule_loglik(st.counts(pos));
        return PosteriorValue::of(list_log_prior(st), ll);
    }

private:
    Hyperparams hp_;
    std::int64_t pool_size_;
    std::vector<std::int64_t> card_counts_;
    std::vector<double> lg_a0_, lg_a1_, lg_a01_;
    std::vector<double> log_factorial_;
    std::vector<double> log_int_;
    std::vector<double> eta_pow_;
    double lnZ_ = 0.0;
};

inline PosteriorValue log_posterior(const CaptureState& state, const RulePool& pool,
                                    const Hyperparams& hp) {
    std::vector<LabelCounts> counts;
    counts.reserve(state.size() + 1);
    counts.push_back(state.counts(0));
    for (int pos = 1; pos <= static_cast<int>(state.size()); ++pos)
        counts.push_back(state.counts(pos));
    return PosteriorValue::of(log_prior(state.ids(), pool, hp), log_likelihood(counts, hp));
}

// Per-position likelihood terms kept alive across moves so that a mutation
// re-evaluates only the suffix the capture operation touched.
struct LikelihoodTerms {
    std::vector<double> terms;  // position 1..m
    double default_term = 0.0;
    double total = 0.0;

    template <class Engine>
    void rebuild(const Engine& st, const PosteriorModel& model) {
        terms.resize(st.size());
        for (int pos = 1; pos <= static_cast<int>(st.size()); ++pos)
            terms[static_cast<std::size_t>(pos - 1)] = model.rule_loglik(st.counts(pos));
        default_term = model.rule_loglik(st.counts(0));
        sum();
    }

    // Refreshes positions first..m plus the default term.
    template <class Engine>
    void update_suffix(const Engine& st, const PosteriorModel& model, int first) {
        terms.resize(st.size());
        for (int pos = first; pos <= static_cast<int>(st.size()); ++pos)
            terms[static_cast<std::size_t>(pos - 1)] = model.rule_loglik(st.counts(pos));
        default_term = model.rule_loglik(st.counts(0));
        sum();
    }

private:
    void sum() {
        total = default_term;
        for (double t : terms) total += t;
    }
};

// Recomputes the posterior after a capture mutation, reusing every
// likelihood term before `first_touched`. A non-positive first_touched
// means nothing changed. Agrees with a from-scratch evaluation to 1e-9.
template <class Engine>
inline PosteriorValue incremental_posterior(const PosteriorValue& prev,
                                            const PosteriorModel& model,
                                            LikelihoodTerms& terms, const Engine& st,
                                            int first_touched) {
    if (first_touched <= 0) return prev;
    terms.update_suffix(st, model, first_touched);
    return PosteriorValue::of(model.list_log_prior(st), terms.total);
}

}  // namespace rulelist
