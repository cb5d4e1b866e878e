#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rulelist/capture.hpp"
#include "rulelist/errors.hpp"
#include "rulelist/posterior.hpp"

namespace rulelist {

namespace detail {

// Walks the b sequence lazily: for c = 0..floor(P/2), a countdown from
// C(P,c) to 1, then (when 2c != P) a countdown from C(P,P-c) to 1. Run
// lengths are held as doubles so the walk also works for feature counts
// whose binomials exceed 64 bits; only the first few runs are ever small
// enough to finish.
class BSequenceWalker {
public:
    explicit BSequenceWalker(int P) : P_(P) { start_run(); }

    // next value, starting from b_0
    double next() {
        if (value_ < 1.0) advance_run();
        return value_--;
    }

private:
    static double binomial(int n, int k) {
        return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                   std::lgamma(n - k + 1.0)));
    }

    void start_run() { value_ = binomial(P_, c_); }

    void advance_run() {
        if (phase_ == 0 && 2 * c_ != P_) {
            phase_ = 1;
            value_ = binomial(P_, P_ - c_);
            return;
        }
        phase_ = 0;
        ++c_;
        if (c_ > P_ / 2) throw state_error("b sequence exhausted");
        start_run();
    }

    int P_;
    int c_ = 0;
    int phase_ = 0;
    double value_ = 0.0;
};

}  // namespace detail

// The worst-case lower-bound sequence for the per-cardinality antecedent
// inventories, materialized in full (length 2^P).
inline std::vector<std::int64_t> build_b_vector(int P) {
    if (P < 1 || P > 24) throw config_error("build_b_vector requires 1 <= P <= 24");
    std::vector<std::int64_t> b;
    b.reserve(std::size_t{1} << P);
    detail::BSequenceWalker walk(P);
    for (std::size_t i = 0; i < (std::size_t{1} << P); ++i)
        b.push_back(static_cast<std::int64_t>(walk.next()));
    return b;
}

// Largest list length a MAP rule list can have:
//   min(2^P - 1, max{ m : lambda^m / m! >= GammaRatio * prod_{j=1}^{m} b_j })
// evaluated in log space, 0 when no m satisfies the inequality.
inline std::int64_t compute_m_max(int P, std::int64_t n_pos, std::int64_t n_neg,
                                  const Hyperparams& hp) {
    if (P < 1) throw config_error("compute_m_max requires P >= 1");
    if (n_pos < 0 || n_neg < 0) throw config_error("negative label counts");
    hp.validate();

    const double log_gamma_ratio =
        std::lgamma(static_cast<double>(n_neg) + hp.alpha0) +
        std::lgamma(static_cast<double>(n_pos) + hp.alpha1) -
        std::lgamma(static_cast<double>(n_pos + n_neg) + hp.alpha0 + hp.alpha1);
    const std::int64_t cap = P >= 62 ? std::numeric_limits<std::int64_t>::max()
                                     : (std::int64_t{1} << P) - 1;
    const double log_lambda = std::log(hp.lambda);

    detail::BSequenceWalker walk(P);
    walk.next();  // b_0 is not part of the product

    std::int64_t best = 0;
    double sum_log_b = 0.0;
    for (std::int64_t m = 1; m <= cap; ++m) {
        sum_log_b += std::log(walk.next());
        const double lhs = static_cast<double>(m) * log_lambda - std::lgamma(m + 1.0);
        if (lhs >= log_gamma_ratio + sum_log_b)
            best = m;
        else if (static_cast<double>(m) > hp.lambda)
            break;  // lhs shrinks every further step while the rhs cannot
    }
    return best;
}

// log Upsilon(d_p): upper bound on the log posterior of every rule list
// extending a prefix with the given capture counts and cardinalities.
// Only defined for alpha = (1,1).
inline double log_upsilon(std::span<const LabelCounts> prefix_counts,
                          std::span<const std::int32_t> prefix_cards, const RulePool& pool,
                          const BinaryDataset& data, const Hyperparams& hp,
                          double cached_log_poisson_norm = std::numeric_limits<double>::quiet_NaN()) {
    if (hp.alpha0 != 1.0 || hp.alpha1 != 1.0)
        throw config_error("the prefix bound requires alpha = (1,1)");
    if (prefix_counts.size() != prefix_cards.size())
        throw config_error("prefix counts and cardinalities differ in length");
    hp.validate();

    const auto p = static_cast<std::int64_t>(prefix_counts.size());
    const double lnZ = std::isnan(cached_log_poisson_norm)
                           ? detail::log_truncated_poisson_norm(
                                 hp.lambda, static_cast<std::int64_t>(pool.size()))
                           : cached_log_poisson_norm;

    // Poisson length term at its mode among lengths >= p.
    const auto mode = std::max(p, static_cast<std::int64_t>(std::floor(hp.lambda)));
    double lu = static_cast<double>(mode) * std::log(hp.lambda) - std::lgamma(mode + 1.0) - lnZ;

    lu += detail::log_cardinality_chain(prefix_cards, pool.cardinality_counts, hp.eta);

    std::int64_t cap0 = 0, cap1 = 0;
    for (const auto& c : prefix_counts) {
        lu += std::lgamma(static_cast<double>(c.n0) + 1.0) +
              std::lgamma(static_cast<double>(c.n1) + 1.0) -
              std::lgamma(static_cast<double>(c.total()) + 2.0);
        cap0 += c.n0;
        cap1 += c.n1;
    }
    const auto rem0 = static_cast<std::int64_t>(data.n_neg) - cap0;
    const auto rem1 = static_cast<std::int64_t>(data.n_pos) - cap1;
    if (rem0 < 0 || rem1 < 0) throw state_error("prefix captures exceed label totals");
    // Two hypothetical perfect rules absorb the remaining data.
    lu -= std::log(1.0 + static_cast<double>(rem0));
    lu -= std::log(1.0 + static_cast<double>(rem1));
    return lu;
}

// Theorem-2 screen: a prefix with log Upsilon strictly below the best
// posterior seen so far cannot begin a MAP rule list.
inline bool prefix_excluded(std::span<const LabelCounts> prefix_counts,
                            std::span<const std::int32_t> prefix_cards,
                            const RulePool& pool, const BinaryDataset& data,
                            const Hyperparams& hp, double v_star_log,
                            double cached_log_poisson_norm =
                                std::numeric_limits<double>::quiet_NaN()) {
    return log_upsilon(prefix_counts, prefix_cards, pool, data, hp,
                       cached_log_poisson_norm) < v_star_log;
}

}  // namespace rulelist
