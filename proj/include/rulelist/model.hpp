#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulelist/capture.hpp"
#include "rulelist/dataset.hpp"
#include "rulelist/errors.hpp"
#include "rulelist/posterior.hpp"

namespace rulelist {

struct Diagnostics {
    int chains = 0;
    long long iterations = 0;
    long long accepted = 0;
    long long screened_restarts = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;  // never serialized: model files must be run-stable
    PosteriorValue best_value;
};

// Beta posterior means, index 0 = default rule, 1..m = list positions.
template <class Engine>
inline std::vector<double> fit_thetas(const Engine& state, const Hyperparams& hp) {
    std::vector<double> thetas(state.size() + 1);
    for (int pos = 0; pos <= static_cast<int>(state.size()); ++pos) {
        const auto& c = state.counts(pos);
        thetas[static_cast<std::size_t>(pos)] =
            (static_cast<double>(c.n1) + hp.alpha1) /
            (static_cast<double>(c.total()) + hp.alpha0 + hp.alpha1);
    }
    return thetas;
}

struct TrainedRule {
    std::vector<std::int32_t> feature_indices;  // into TrainedModel::features
    double theta = 0.0;
};

// A rule list frozen into a classifier: feature definitions, ordered rules
// with probability estimates, and the default probability.
struct TrainedModel {
    std::string label_column;
    std::string positive_label;
    Hyperparams hp;
    std::vector<FeatureDef> features;
    std::vector<TrainedRule> rules;
    double default_theta = 0.5;
    Diagnostics diagnostics;

    // Index of the first rule the binarized observation satisfies, 0 for the
    // default. The observation must cover every model feature.
    int first_match(std::span<const std::uint8_t> observation) const {
        if (observation.size() != features.size())
            throw schema_error("observation has " + std::to_string(observation.size()) +
                               " features, model expects " + std::to_string(features.size()));
        for (std::size_t r = 0; r < rules.size(); ++r) {
            bool all = true;
            for (auto f : rules[r].feature_indices)
                if (!observation[static_cast<std::size_t>(f)]) {
                    all = false;
                    break;
                }
            if (all) return static_cast<int>(r) + 1;
        }
        return 0;
    }

    double predict(std::span<const std::uint8_t> observation) const {
        const int idx = first_match(observation);
        return idx == 0 ? default_theta : rules[static_cast<std::size_t>(idx - 1)].theta;
    }
};

inline TrainedModel make_trained_model(const BinaryDataset& data, const RulePool& pool,
                                       const CaptureState& state, const Hyperparams& hp,
                                       const std::string& label_column,
                                       const std::string& positive_label,
                                       const Diagnostics& diag) {
    TrainedModel m;
    m.label_column = label_column;
    m.positive_label = positive_label;
    m.hp = hp;
    m.features = data.features;
    m.diagnostics = diag;
    auto thetas = fit_thetas(state, hp);
    m.default_theta = thetas[0];
    for (int pos = 1; pos <= static_cast<int>(state.size()); ++pos) {
        TrainedRule r;
        r.feature_indices = pool[state.id_at(pos)].literals;
        r.theta = thetas[static_cast<std::size_t>(pos)];
        m.rules.push_back(std::move(r));
    }
    return m;
}

namespace detail {

inline const char* kind_name(FeatureDef::Kind k) {
    switch (k) {
        case FeatureDef::Kind::Level: return "level";
        case FeatureDef::Kind::OtherLevels: return "other_levels";
        case FeatureDef::Kind::Interval: return "interval";
    }
    return "level";
}

inline FeatureDef::Kind kind_from_name(const std::string& s) {
    if (s == "level") return FeatureDef::Kind::Level;
    if (s == "other_levels") return FeatureDef::Kind::OtherLevels;
    if (s == "interval") return FeatureDef::Kind::Interval;
    throw schema_error("unknown feature kind '" + s + "' in model file");
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const TrainedModel& m) {
    nlohmann::ordered_json j;
    j["format_version"] = "1";
    j["label"] = {{"column", m.label_column}, {"positive", m.positive_label}};
    j["hyperparams"] = {{"lambda", m.hp.lambda},
                        {"eta", m.hp.eta},
                        {"alpha0", m.hp.alpha0},
                        {"alpha1", m.hp.alpha1}};
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : m.features) {
        nlohmann::ordered_json jf;
        jf["name"] = f.name;
        jf["column"] = f.column;
        jf["kind"] = detail::kind_name(f.kind);
        switch (f.kind) {
            case FeatureDef::Kind::Level:
                jf["level"] = f.level;
                break;
            case FeatureDef::Kind::OtherLevels:
                jf["levels"] = f.other_levels;
                break;
            case FeatureDef::Kind::Interval:
                if (f.has_lo) jf["lo"] = f.lo;
                if (f.has_hi) jf["hi"] = f.hi;
                break;
        }
        j["features"].push_back(std::move(jf));
    }
    j["rules"] = nlohmann::ordered_json::array();
    for (const auto& r : m.rules)
        j["rules"].push_back({{"features", r.feature_indices}, {"theta", r.theta}});
    j["default_theta"] = m.default_theta;
    j["diagnostics"] = {{"chains", m.diagnostics.chains},
                        {"iterations", m.diagnostics.iterations},
                        {"accepted", m.diagnostics.accepted},
                        {"screened_restarts", m.diagnostics.screened_restarts},
                        {"seed", m.diagnostics.seed},
                        {"log_prior", m.diagnostics.best_value.log_prior},
                        {"log_likelihood", m.diagnostics.best_value.log_likelihood},
                        {"log_posterior", m.diagnostics.best_value.log_posterior}};
    return j;
}

inline std::string serialize_model(const TrainedModel& m) { return to_json(m).dump(2) + "\n"; }

inline TrainedModel model_from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("format_version"))
        throw schema_error("model file lacks a format_version field");
    if (j.at("format_version").get<std::string>() != "1")
        throw schema_error("unsupported model format_version");
    TrainedModel m;
    m.label_column = j.at("label").at("column").get<std::string>();
    m.positive_label = j.at("label").at("positive").get<std::string>();
    const auto& hp = j.at("hyperparams");
    m.hp.lambda = hp.at("lambda").get<double>();
    m.hp.eta = hp.at("eta").get<double>();
    m.hp.alpha0 = hp.at("alpha0").get<double>();
    m.hp.alpha1 = hp.at("alpha1").get<double>();
    for (const auto& jf : j.at("features")) {
        FeatureDef f;
        f.name = jf.at("name").get<std::string>();
        f.column = jf.at("column").get<std::string>();
        f.kind = detail::kind_from_name(jf.at("kind").get<std::string>());
        switch (f.kind) {
            case FeatureDef::Kind::Level:
                f.level = jf.at("level").get<std::string>();
                break;
            case FeatureDef::Kind::OtherLevels:
                f.other_levels = jf.at("levels").get<std::vector<std::string>>();
                break;
            case FeatureDef::Kind::Interval:
                f.has_lo = jf.contains("lo");
                if (f.has_lo) f.lo = jf.at("lo").get<double>();
                f.has_hi = jf.contains("hi");
                if (f.has_hi) f.hi = jf.at("hi").get<double>();
                break;
        }
        m.features.push_back(std::move(f));
    }
    for (const auto& jr : j.at("rules")) {
        TrainedRule r;
        r.feature_indices = jr.at("features").get<std::vector<std::int32_t>>();
        r.theta = jr.at("theta").get<double>();
        for (auto f : r.feature_indices)
            if (f < 0 || static_cast<std::size_t>(f) >= m.features.size())
                throw schema_error("rule references feature index out of range");
        m.rules.push_back(std::move(r));
    }
    m.default_theta = j.at("default_theta").get<double>();
    if (j.contains("diagnostics")) {
        const auto& d = j.at("diagnostics");
        m.diagnostics.chains = d.value("chains", 0);
        m.diagnostics.iterations = d.value("iterations", 0LL);
        m.diagnostics.accepted = d.value("accepted", 0LL);
        m.diagnostics.screened_restarts = d.value("screened_restarts", 0LL);
        m.diagnostics.seed = d.value("seed", std::uint64_t{0});
        m.diagnostics.best_value.log_prior = d.value("log_prior", 0.0);
        m.diagnostics.best_value.log_likelihood = d.value("log_likelihood", 0.0);
        m.diagnostics.best_value.log_posterior = d.value("log_posterior", 0.0);
    }
    return m;
}

inline TrainedModel parse_model(const std::string& text) {
    return model_from_json(nlohmann::ordered_json::parse(text));
}

namespace detail {

inline std::string sig3(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

}  // namespace detail

// if (a & b) then probability = 0.98
// else if (c) then probability = 0.003
// else (default) probability = 0.066
inline void pretty_print(const TrainedModel& m, std::ostream& os) {
    for (std::size_t r = 0; r < m.rules.size(); ++r) {
        os << (r == 0 ? "if (" : "else if (");
        for (std::size_t i = 0; i < m.rules[r].feature_indices.size(); ++i) {
            if (i) os << " & ";
            os << m.features[static_cast<std::size_t>(m.rules[r].feature_indices[i])].name;
        }
        os << ") then probability = " << detail::sig3(m.rules[r].theta) << "\n";
    }
    os << "else (default) probability = " << detail::sig3(m.default_theta) << "\n";
}

}  // namespace rulelist
