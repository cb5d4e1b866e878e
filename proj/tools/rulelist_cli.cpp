// rulelist: train, apply and benchmark probabilistic rule-list classifiers
// on tabular CSV data.
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulelist/rulelist.hpp"

namespace {

// Exit codes: 2 usage, 3 I/O, 4 schema/data, 5 mining, 6 internal.
constexpr int kUsageExit = 2;
constexpr int kIoExit = 3;
constexpr int kSchemaExit = 4;
constexpr int kMiningExit = 5;
constexpr int kInternalExit = 6;

struct CommonArgs {
    std::string data_path;
    std::string label = "class";
    std::string positive = "1";
    int numeric_bins = 4;
    double rare_level_threshold = 0.01;
    double min_support = 0.0;  // 0 = tune toward target_rules
    int min_card = 1;
    int max_card = 2;
    int target_rules = 300;
    int chains = 20;
    int iterations = 5000;
    std::uint64_t seed = 0;
    double lambda = 0.0;  // 0 = auto
    double eta = 1.0;
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    bool no_mmax_cap = false;
    bool no_prefix_screen = false;
    bool deterministic = false;
    bool quiet = false;
};

void add_data_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("data", a.data_path, "input CSV (first row = header)")->required();
    cmd->add_option("--label", a.label, "label column name");
    cmd->add_option("--positive-label", a.positive, "label value counted as positive");
    cmd->add_option("--numeric-bins", a.numeric_bins, "quantile bins per numeric column")
        ->check(CLI::Range(2, 64));
    cmd->add_option("--rare-level-threshold", a.rare_level_threshold,
                    "merge categorical levels rarer than this fraction");
}

void add_mine_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--min-support", a.min_support,
                    "minimum antecedent support fraction (0 = auto-tune)")
        ->check(CLI::Range(0.0, 0.999));
    cmd->add_option("--min-card", a.min_card, "minimum literals per antecedent")
        ->check(CLI::Range(1, 16));
    cmd->add_option("--max-card", a.max_card, "maximum literals per antecedent")
        ->check(CLI::Range(1, 16));
    cmd->add_option("--target-rules", a.target_rules,
                    "auto-tune support toward this pool size")
        ->check(CLI::PositiveNumber);
}

void add_search_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--chains", a.chains, "number of search chains")->check(CLI::PositiveNumber);
    cmd->add_option("--iterations", a.iterations, "iterations per chain")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "random seed");
    cmd->add_option("--lambda", a.lambda, "expected list length (omit for --auto-lambda)");
    cmd->add_flag(
        "--auto-lambda", [&a](std::int64_t) { a.lambda = 0.0; },
        "pick lambda from a pilot run (default)");
    cmd->add_option("--eta", a.eta, "expected rule cardinality");
    cmd->add_option("--alpha0", a.alpha0, "Beta pseudo-count for label 0");
    cmd->add_option("--alpha1", a.alpha1, "Beta pseudo-count for label 1");
    cmd->add_flag("--no-mmax-cap", a.no_mmax_cap, "disable the list-length cap");
    cmd->add_flag("--no-prefix-screen", a.no_prefix_screen, "disable restart screening");
    cmd->add_flag("--deterministic", a.deterministic,
                  "serialize chains for bit-reproducible output");
    cmd->add_flag("--quiet", a.quiet, "suppress progress output");
}

rulelist::SearchConfig search_config(const CommonArgs& a) {
    rulelist::SearchConfig cfg;
    cfg.chains = a.chains;
    cfg.iterations_per_chain = a.iterations;
    cfg.seed = a.seed;
    cfg.enforce_m_max = !a.no_mmax_cap;
    cfg.prefix_screen = !a.no_prefix_screen;
    cfg.deterministic = a.deterministic;
    cfg.log = a.quiet ? nullptr : &std::cerr;
    return cfg;
}

rulelist::Hyperparams hyperparams(const CommonArgs& a) {
    rulelist::Hyperparams hp;
    hp.lambda = a.lambda > 0.0 ? a.lambda : 5.0;
    hp.eta = a.eta;
    hp.alpha0 = a.alpha0;
    hp.alpha1 = a.alpha1;
    return hp;
}

rulelist::RawTable load_table(const CommonArgs& a) {
    return rulelist::load_csv(a.data_path, a.label, a.positive);
}

rulelist::RulePool build_pool(const rulelist::BinaryDataset& data, const CommonArgs& a,
                              bool quiet) {
    using namespace rulelist;
    if (a.min_support > 0.0) return mine(data, a.min_support, a.min_card, a.max_card);
    auto [frac, pool] = tune_support(data, a.target_rules, a.min_card, a.max_card);
    if (!quiet)
        std::cerr << "tuned min-support to " << frac << " (" << pool.size()
                  << " antecedents)\n";
    return std::move(pool);
}

int cmd_train(const CommonArgs& a, const std::string& out_path,
              const std::string& pool_dump) {
    using namespace rulelist;
    const auto table = load_table(a);
    std::vector<std::string> warnings;
    const auto data = binarize(table, {a.numeric_bins, a.rare_level_threshold}, &warnings);
    if (!a.quiet)
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const auto pool = build_pool(data, a, a.quiet);
    if (!pool_dump.empty()) {
        std::ofstream os(pool_dump);
        if (!os) throw io_error("cannot write pool dump: " + pool_dump);
        dump_pool(pool, data, os);
    }

    auto cfg = search_config(a);
    auto hp = hyperparams(a);
    if (a.lambda <= 0.0) {
        hp.lambda = auto_lambda(data, pool, hp, cfg);
        if (!a.quiet) std::cerr << "auto-lambda pilot selected lambda = " << hp.lambda << "\n";
    }
    auto model = run(data, pool, hp, cfg, a.label, a.positive);
    pretty_print(model, std::cout);
    if (!a.quiet)
        std::cerr << "log posterior " << model.diagnostics.best_value.log_posterior << ", "
                  << model.diagnostics.screened_restarts << " screened restarts, "
                  << model.diagnostics.wall_seconds << "s\n";
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw io_error("cannot write model file: " + out_path);
        os << serialize_model(model);
    }
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& csv_path,
                const std::string& out_path) {
    using namespace rulelist;
    std::ifstream in(model_path);
    if (!in) throw io_error("cannot open model file: " + model_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto model = parse_model(text);
    const auto table = load_csv_unlabeled(csv_path);  // labels not needed for scoring

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw io_error("cannot write: " + out_path);
        os = &file;
    }
    std::vector<int> matched;
    const auto scores = predict_table(model, table, &matched);
    (*os) << "row,probability,rule_index\n";
    for (std::size_t r = 0; r < scores.size(); ++r)
        (*os) << r << ',' << scores[r] << ',' << matched[r] << '\n';
    return 0;
}

int cmd_cv(const CommonArgs& a, int folds, const std::string& out_path) {
    using namespace rulelist;
    const auto table = load_table(a);
    CvOptions opts;
    opts.folds = folds;
    opts.binarize = {a.numeric_bins, a.rare_level_threshold};
    opts.mine.min_support_frac = a.min_support;
    opts.mine.min_card = a.min_card;
    opts.mine.max_card = a.max_card;
    opts.mine.target_rules = a.target_rules;
    opts.hp = hyperparams(a);
    opts.search = search_config(a);
    opts.search.log = nullptr;
    opts.auto_lambda = a.lambda <= 0.0;
    const auto report = cross_validate(table, opts);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw io_error("cannot write: " + out_path);
        os = &file;
    }
    report.write_csv(*os);
    return 0;
}

int cmd_bench(const CommonArgs& a, int moves, int search_iters) {
    using namespace rulelist;
    const auto table = load_table(a);
    const auto data = binarize(table, {a.numeric_bins, a.rare_level_threshold});
    const auto pool = build_pool(data, a, a.quiet);
    std::cerr << "bench: n=" << data.n << ", pool=" << pool.size() << ", moves=" << moves
              << "\n";

    // Shared random move tape so both backends replay identical mutations.
    struct TapeEntry {
        int op;  // 0 add, 1 remove, 2 swap
        int pos, pos2;
        std::int32_t id;
    };
    std::vector<TapeEntry> tape;
    {
        std::mt19937_64 rng(a.seed);
        std::vector<std::int32_t> in_list;
        for (int t = 0; t < moves; ++t) {
            const auto m = static_cast<int>(in_list.size());
            std::vector<int> legal;
            if (m < static_cast<int>(pool.size())) legal.push_back(0);
            if (m >= 1) legal.push_back(1);
            if (m >= 2) legal.push_back(2);
            const int op = legal[static_cast<std::size_t>(std::uniform_int_distribution<int>(
                0, static_cast<int>(legal.size()) - 1)(rng))];
            TapeEntry e{};
            e.op = op;
            if (op == 0) {
                for (;;) {
                    e.id = std::uniform_int_distribution<std::int32_t>(
                        0, static_cast<std::int32_t>(pool.size()) - 1)(rng);
                    if (std::find(in_list.begin(), in_list.end(), e.id) == in_list.end())
                        break;
                }
                e.pos = std::uniform_int_distribution<int>(1, m + 1)(rng);
                in_list.insert(in_list.begin() + e.pos - 1, e.id);
            } else if (op == 1) {
                e.pos = std::uniform_int_distribution<int>(1, m)(rng);
                in_list.erase(in_list.begin() + e.pos - 1);
            } else {
                int x = std::uniform_int_distribution<int>(1, m)(rng);
                int y = std::uniform_int_distribution<int>(1, m - 1)(rng);
                if (y >= x) ++y;
                e.pos = std::min(x, y);
                e.pos2 = std::max(x, y);
                std::swap(in_list[e.pos - 1], in_list[e.pos2 - 1]);
            }
            tape.push_back(e);
        }
    }

    auto replay = [&](auto& engine) {
        for (const auto& e : tape) {
            if (e.op == 0)
                engine.insert_rule(e.pos, e.id);
            else if (e.op == 1)
                engine.remove_rule(e.pos);
            else
                engine.swap_rules(e.pos, e.pos2);
        }
    };

    auto t0 = std::chrono::steady_clock::now();
    CaptureState bit_state(pool, data);
    replay(bit_state);
    const double bit_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto naive_pool = NaivePool::from(pool, data);
    t0 = std::chrono::steady_clock::now();
    NaiveCaptureState naive_state(naive_pool);
    replay(naive_state);
    const double naive_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool states_match = bit_state.size() == naive_state.size();
    for (int pos = 0; states_match && pos <= static_cast<int>(bit_state.size()); ++pos)
        states_match = bit_state.counts(pos) == naive_state.counts(pos);
    for (int pos = 1; states_match && pos <= static_cast<int>(bit_state.size()); ++pos)
        states_match = bit_state.id_at(pos) == naive_state.id_at(pos);

    const double ratio = (moves == 0 || bit_secs <= 0.0) ? 1.0 : naive_secs / bit_secs;
    std::cout << "backend,seconds\n";
    std::cout << "bitvector," << bit_secs << "\n";
    std::cout << "naive_sets," << naive_secs << "\n";
    std::cout << "speedup," << ratio << "\n";
    std::cout << "states_identical," << (states_match ? "yes" : "no") << "\n";

    if (search_iters > 0) {
        auto hp = hyperparams(a);
        auto cfg = search_config(a);
        cfg.chains = 1;
        cfg.iterations_per_chain = search_iters;
        cfg.deterministic = true;
        cfg.log = nullptr;
        const auto bit_res = run_search(data, pool, hp, cfg);
        const auto naive_res = run_search_with<NaiveCaptureState>(
            data, pool, hp, cfg,
            [&](std::span<const std::int32_t> ids) {
                return NaiveCaptureState::build(naive_pool, ids);
            });
        const bool same = bit_res.best_ids == naive_res.best_ids;
        std::cout << "search_best_lists_identical," << (same ? "yes" : "no") << "\n";
        if (!same) return 1;
    }
    return states_match ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic rule-list classifier"};
    app.require_subcommand(1);

    CommonArgs a;
    std::string out_path, model_path, pool_dump;
    int folds = 10;
    int bench_moves = 500;
    int bench_search_iters = 0;

    auto* train = app.add_subcommand("train", "learn a rule list and save it");
    add_data_flags(train, a);
    add_mine_flags(train, a);
    add_search_flags(train, a);
    train->add_option("--out", out_path, "write the model JSON here");
    train->add_option("--dump-pool", pool_dump, "write mined antecedents here");

    auto* predict = app.add_subcommand("predict", "score rows with a saved model");
    predict->add_option("--model", model_path, "model JSON from train")->required();
    predict->add_option("data", a.data_path, "CSV of rows to score")->required();
    predict->add_option("--out", out_path, "write row,probability,rule_index here");

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation report");
    add_data_flags(cv, a);
    add_mine_flags(cv, a);
    add_search_flags(cv, a);
    cv->add_option("--folds", folds, "number of folds")->check(CLI::Range(2, 100));
    cv->add_option("--out", out_path, "write the fold report CSV here");

    auto* bench = app.add_subcommand("bench", "bit-vector vs naive set backend timing");
    add_data_flags(bench, a);
    add_mine_flags(bench, a);
    add_search_flags(bench, a);
    bench->add_option("--moves", bench_moves, "length of the random move tape");
    bench->add_option("--search-iters", bench_search_iters,
                      "also run a short dual-backend search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageExit;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(a, out_path, pool_dump);
        if (app.got_subcommand(predict)) return cmd_predict(model_path, a.data_path, out_path);
        if (app.got_subcommand(cv)) return cmd_cv(a, folds, out_path);
        if (app.got_subcommand(bench)) return cmd_bench(a, bench_moves, bench_search_iters);
    } catch (const rulelist::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageExit;
    } catch (const rulelist::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoExit;
    } catch (const rulelist::schema_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchemaExit;
    } catch (const rulelist::mining_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMiningExit;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalExit;
    }
    return 0;
}
