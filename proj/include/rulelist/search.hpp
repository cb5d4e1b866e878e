#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rulelist/bounds.hpp"
#include "rulelist/capture.hpp"
#include "rulelist/errors.hpp"
#include "rulelist/model.hpp"
#include "rulelist/posterior.hpp"

namespace rulelist {

struct SearchConfig {
    int chains = 20;
    int iterations_per_chain = 5000;
    std::uint64_t seed = 0;
    int initial_list_length = 1;
    bool enforce_m_max = true;
    bool prefix_screen = true;
    std::array<double, 3> move_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};  // add, remove, swap
    bool deterministic = false;
    int threads = 0;  // 0 = RULELIST_THREADS env or hardware concurrency
    std::ostream* log = nullptr;
    // Test hook: called with each accepted list (serial execution only).
    std::function<void(int chain, long long iter, std::span<const std::int32_t> ids)> observer;

    void validate() const {
        if (chains < 1) throw config_error("chains must be >= 1");
        if (iterations_per_chain < 1) throw config_error("iterations must be >= 1");
        if (initial_list_length < 1) throw config_error("initial list length must be >= 1");
        double sum = 0.0;
        for (double w : move_weights) {
            if (w < 0.0) throw config_error("move weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw config_error("move weights must sum to 1");
    }
};

// Monotone best-so-far cell shared by all chains. Ties keep the first list
// found, which makes serial runs deterministic under a fixed seed.
class BestTracker {
public:
    double v_star() const {
        std::lock_guard lock(mu_);
        return v_star_;
    }

    bool offer(const PosteriorValue& v, std::span<const std::int32_t> ids, int chain,
               long long iter, std::ostream* log) {
        std::lock_guard lock(mu_);
        if (v.log_posterior <= v_star_) return false;
        v_star_ = v.log_posterior;
        best_value_ = v;
        best_.assign(ids.begin(), ids.end());
        if (log)
            (*log) << chain << ',' << iter << ',' << ids.size() << ',' << v.log_prior << ','
                   << v.log_likelihood << ',' << v.log_posterior << '\n';
        return true;
    }

    std::vector<std::int32_t> best() const {
        std::lock_guard lock(mu_);
        return best_;
    }

    PosteriorValue best_value() const {
        std::lock_guard lock(mu_);
        return best_value_;
    }

    bool empty() const {
        std::lock_guard lock(mu_);
        return best_.empty() && v_star_ == -std::numeric_limits<double>::infinity();
    }

private:
    mutable std::mutex mu_;
    double v_star_ = -std::numeric_limits<double>::infinity();
    PosteriorValue best_value_{0, 0, -std::numeric_limits<double>::infinity()};
    std::vector<std::int32_t> best_;
};

enum class MoveKind { Add = 0, Remove = 1, Swap = 2 };

struct Move {
    MoveKind kind = MoveKind::Add;
    int pos = 0;        // insertion/removal position, or the lower swap position
    int pos2 = 0;       // upper swap position
    std::int32_t id = -1;  // antecedent to add
};

namespace detail {

struct ProposalContext {
    std::array<double, 3> weights;
    std::int64_t pool_size = 0;
    bool enforce_m_max = false;
    std::int64_t m_max = 0;
};

// Masked move-kind distribution at a state with m rules: impossible kinds
// get weight zero and the rest renormalize.
inline std::array<double, 3> masked_weights(const ProposalContext& ctx, std::int64_t m) {
    std::array<double, 3> w{0.0, 0.0, 0.0};
    const bool can_add =
        m < ctx.pool_size && (!ctx.enforce_m_max || m < ctx.m_max);
    if (can_add) w[0] = ctx.weights[0];
    if (m >= 1) w[1] = ctx.weights[1];
    if (m >= 2) w[2] = ctx.weights[2];
    const double sum = w[0] + w[1] + w[2];
    if (sum <= 0.0) throw state_error("no legal move from the current rule list");
    for (auto& x : w) x /= sum;
    return w;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <class Engine>
std::int32_t draw_unused(std::mt19937_64& rng, const Engine& st, std::int64_t pool_size) {
    const auto m = static_cast<std::int64_t>(st.size());
    if (m * 2 < pool_size) {  // rejection sampling stays cheap
        for (;;) {
            auto id = static_cast<std::int32_t>(
                uniform_int(rng, 0, static_cast<int>(pool_size) - 1));
            if (!st.contains(id)) return id;
        }
    }
    std::vector<std::int32_t> unused;
    unused.reserve(static_cast<std::size_t>(pool_size - m));
    for (std::int32_t id = 0; id < static_cast<std::int32_t>(pool_size); ++id)
        if (!st.contains(id)) unused.push_back(id);
    return unused[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(unused.size()) - 1))];
}

}  // namespace detail

// Draws a neighborhood move: kind by masked weights, then a uniform unused
// antecedent and position (add), a uniform position (remove), or a uniform
// unordered position pair (swap).
template <class Engine>
Move propose(std::mt19937_64& rng, const Engine& st, const detail::ProposalContext& ctx) {
    const auto m = static_cast<std::int64_t>(st.size());
    const auto w = detail::masked_weights(ctx, m);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Move mv;
    if (u < w[0])
        mv.kind = MoveKind::Add;
    else if (u < w[0] + w[1])
        mv.kind = MoveKind::Remove;
    else
        mv.kind = MoveKind::Swap;
    switch (mv.kind) {
        case MoveKind::Add:
            mv.id = detail::draw_unused(rng, st, ctx.pool_size);
            mv.pos = detail::uniform_int(rng, 1, static_cast<int>(m) + 1);
            break;
        case MoveKind::Remove:
            mv.pos = detail::uniform_int(rng, 1, static_cast<int>(m));
            break;
        case MoveKind::Swap: {
            int a = detail::uniform_int(rng, 1, static_cast<int>(m));
            int b = detail::uniform_int(rng, 1, static_cast<int>(m) - 1);
            if (b >= a) ++b;
            mv.pos = std::min(a, b);
            mv.pos2 = std::max(a, b);
            break;
        }
    }
    return mv;
}

// One Metropolis-Hastings step. Applies the proposal through the capture
// algebra, evaluates the posterior incrementally, and accepts with
// min(1, exp(delta) * proposal ratio). Rejections undo the move with the
// exact inverse capture operation.
template <class Engine>
bool mh_step(Engine& st, LikelihoodTerms& terms, PosteriorValue& value,
             std::mt19937_64& rng, const PosteriorModel& model,
             const detail::ProposalContext& ctx) {
    const auto m = static_cast<std::int64_t>(st.size());
    const auto w_here = detail::masked_weights(ctx, m);
    const Move mv = propose(rng, st, ctx);

    const PosteriorValue saved_value = value;
    const LikelihoodTerms saved_terms = terms;

    double log_fwd = 0.0, log_rev = 0.0;
    int first = 0;
    std::int32_t removed_id = -1;
    switch (mv.kind) {
        case MoveKind::Add: {
            first = st.insert_rule(mv.pos, mv.id);
            log_fwd = std::log(w_here[0]) - std::log(static_cast<double>(ctx.pool_size - m)) -
                      std::log(static_cast<double>(m + 1));
            const auto w_there = detail::masked_weights(ctx, m + 1);
            log_rev = std::log(w_there[1]) - std::log(static_cast<double>(m + 1));
            break;
        }
        case MoveKind::Remove: {
            removed_id = st.id_at(mv.pos);
            first = st.remove_rule(mv.pos);
            log_fwd = std::log(w_here[1]) - std::log(static_cast<double>(m));
            const auto w_there = detail::masked_weights(ctx, m - 1);
            log_rev = std::log(w_there[0]) -
                      std::log(static_cast<double>(ctx.pool_size - (m - 1))) -
                      std::log(static_cast<double>(m));
            break;
        }
        case MoveKind::Swap:
            first = st.swap_rules(mv.pos, mv.pos2);
            break;  // symmetric: masks and pair counts are unchanged
    }

    const PosteriorValue proposed = incremental_posterior(value, model, terms, st, first);
    const double log_accept =
        (proposed.log_posterior - value.log_posterior) + (log_rev - log_fwd);
    bool accept = log_accept >= 0.0;
    if (!accept) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        accept = std::log(u) < log_accept;
    }
    if (accept) {
        value = proposed;
        return true;
    }
    switch (mv.kind) {
        case MoveKind::Add:
            st.remove_rule(mv.pos);
            break;
        case MoveKind::Remove:
            st.insert_rule(mv.pos, removed_id);
            break;
        case MoveKind::Swap:
            st.swap_rules(mv.pos, mv.pos2);
            break;
    }
    terms = saved_terms;
    value = saved_value;
    return false;
}

struct SearchResult {
    std::vector<std::int32_t> best_ids;
    PosteriorValue best_value;
    Diagnostics diagnostics;
};

namespace detail {

inline LabelCounts antecedent_counts(const Antecedent& a, const BinaryDataset& data) {
    const auto n1 = static_cast<std::int64_t>(a.init_bits.and_popcount(data.labels_pos));
    return {a.support - n1, n1};
}

// Draws a fresh starting list. With screening on, the first rule is retried
// while Theorem 2 rules it out against the best posterior so far; after
// max_retries the candidate with the highest bound wins.
inline std::vector<std::int32_t> draw_restart(std::mt19937_64& rng, const RulePool& pool,
                                              const BinaryDataset& data,
                                              const PosteriorModel& model,
                                              const SearchConfig& cfg, std::int64_t m_max,
                                              double v_star, long long& screened) {
    auto len = static_cast<std::int64_t>(cfg.initial_list_length);
    len = std::min(len, static_cast<std::int64_t>(pool.size()));
    if (cfg.enforce_m_max) len = std::min(len, std::max<std::int64_t>(m_max, 1));

    auto draw_list = [&] {
        std::vector<std::int32_t> ids;
        while (static_cast<std::int64_t>(ids.size()) < len) {
            auto id = static_cast<std::int32_t>(
                uniform_int(rng, 0, static_cast<int>(pool.size()) - 1));
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        return ids;
    };

    if (!cfg.prefix_screen || v_star == -std::numeric_limits<double>::infinity())
        return draw_list();

    constexpr int max_retries = 100;
    std::vector<std::int32_t> best_ids;
    double best_ups = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        auto ids = draw_list();
        const auto& a = pool[ids[0]];
        const LabelCounts counts[1] = {antecedent_counts(a, data)};
        const std::int32_t cards[1] = {a.cardinality};
        const double ups = log_upsilon(counts, cards, pool, data, model.hp(),
                                       model.log_poisson_norm());
        if (ups >= v_star) return ids;
        ++screened;
        if (ups > best_ups) {
            best_ups = ups;
            best_ids = std::move(ids);
        }
    }
    return best_ids;
}

#ifdef NDEBUG
constexpr long long kConsistencyCheckInterval = 1000;
#else
constexpr long long kConsistencyCheckInterval = 1;
#endif

}  // namespace detail

// Runs the multi-chain search over an arbitrary capture engine. The factory
// turns an id list into a fresh engine; everything else (screening, bounds,
// posterior) is engine-independent.
template <class Engine, class BuildFn>
SearchResult run_search_with(const BinaryDataset& data, const RulePool& pool,
                             const Hyperparams& hp, const SearchConfig& cfg,
                             BuildFn build_engine) {
    cfg.validate();
    hp.validate();
    if (pool.size() == 0) throw mining_error("antecedent pool is empty");

    const auto t0 = std::chrono::steady_clock::now();
    const PosteriorModel model(pool, data, hp);

    detail::ProposalContext ctx;
    ctx.weights = cfg.move_weights;
    ctx.pool_size = static_cast<std::int64_t>(pool.size());
    ctx.enforce_m_max = cfg.enforce_m_max;
    ctx.m_max = cfg.enforce_m_max
                    ? compute_m_max(static_cast<int>(data.n_features()),
                                    static_cast<std::int64_t>(data.n_pos),
                                    static_cast<std::int64_t>(data.n_neg), hp)
                    : 0;

    BestTracker tracker;
    std::atomic<long long> accepted{0}, screened{0};

    auto run_chain = [&](int chain) {
        std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(chain));
        long long chain_screened = 0;
        auto ids = detail::draw_restart(rng, pool, data, model, cfg, ctx.m_max,
                                        tracker.v_star(), chain_screened);
        screened += chain_screened;

        Engine st = build_engine(ids);
        LikelihoodTerms terms;
        terms.rebuild(st, model);
        PosteriorValue value = PosteriorValue::of(model.list_log_prior(st), terms.total);
        tracker.offer(value, st.ids(), chain, 0, cfg.log);
        if (cfg.observer) cfg.observer(chain, 0, st.ids());

        long long chain_accepted = 0;
        for (long long iter = 1; iter <= cfg.iterations_per_chain; ++iter) {
            if (mh_step(st, terms, value, rng, model, ctx)) {
                ++chain_accepted;
                tracker.offer(value, st.ids(), chain, iter, cfg.log);
                if (cfg.observer) cfg.observer(chain, iter, st.ids());
            }
            if (iter % detail::kConsistencyCheckInterval == 0) {
                const PosteriorValue scratch = model.evaluate(st);
                if (std::abs(scratch.log_posterior - value.log_posterior) > 1e-9)
                    throw state_error("incremental posterior drifted from scratch value");
                value = scratch;  // resync accumulated rounding
                terms.rebuild(st, model);
                if constexpr (requires { st.check_consistency(); }) {
#ifndef NDEBUG
                    st.check_consistency();
#endif
                }
            }
        }
        accepted += chain_accepted;
    };

    int threads = cfg.threads;
    if (threads <= 0) {
        if (const char* env = std::getenv("RULELIST_THREADS"))
            threads = std::max(1, std::atoi(env));
        else
            threads = static_cast<int>(std::thread::hardware_concurrency());
    }
    threads = std::clamp(threads, 1, cfg.chains);
    if (cfg.deterministic || cfg.observer) threads = 1;

    if (threads == 1) {
        for (int c = 0; c < cfg.chains; ++c) run_chain(c);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool_threads;
        std::exception_ptr failure;
        std::mutex failure_mu;
        for (int t = 0; t < threads; ++t)
            pool_threads.emplace_back([&] {
                for (;;) {
                    const int c = next.fetch_add(1);
                    if (c >= cfg.chains) return;
                    try {
                        run_chain(c);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& th : pool_threads) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    SearchResult res;
    res.best_ids = tracker.best();
    res.best_value = tracker.best_value();
    res.diagnostics.chains = cfg.chains;
    res.diagnostics.iterations =
        static_cast<long long>(cfg.chains) * cfg.iterations_per_chain;
    res.diagnostics.accepted = accepted.load();
    res.diagnostics.screened_restarts = screened.load();
    res.diagnostics.seed = cfg.seed;
    res.diagnostics.best_value = res.best_value;
    res.diagnostics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline SearchResult run_search(const BinaryDataset& data, const RulePool& pool,
                               const Hyperparams& hp, const SearchConfig& cfg) {
    return run_search_with<CaptureState>(
        data, pool, hp, cfg, [&](std::span<const std::int32_t> ids) {
            return CaptureState::build(pool, data, ids);
        });
}

// Pilot heuristic for the list-length hyperparameter: run once with
// lambda = 5 and adopt the returned list's length (at least 1).
inline double auto_lambda(const BinaryDataset& data, const RulePool& pool,
                          const Hyperparams& hp, const SearchConfig& cfg) {
    Hyperparams pilot = hp;
    pilot.lambda = 5.0;
    const auto res = run_search(data, pool, pilot, cfg);
    return std::max<double>(1.0, static_cast<double>(res.best_ids.size()));
}

// Full training entry point: search, then freeze the best list into a model.
inline TrainedModel run(const BinaryDataset& data, const RulePool& pool,
                        const Hyperparams& hp, const SearchConfig& cfg,
                        const std::string& label_column = "label",
                        const std::string& positive_label = "1") {
    const auto res = run_search(data, pool, hp, cfg);
    const auto state = CaptureState::build(pool, data, res.best_ids);
    return make_trained_model(data, pool, state, hp, label_column, positive_label,
                              res.diagnostics);
}

}  // namespace rulelist
