#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rulelist/bitvector.hpp"
#include "rulelist/errors.hpp"

namespace rulelist {

// Raw tabular data as parsed from CSV: all cells kept as strings, label
// column split off as 0/1. Empty string, "?" and "NA" count as missing.
struct RawTable {
    std::vector<std::string> column_names;        // label column excluded
    std::vector<std::vector<std::string>> columns;  // column-major
    std::vector<std::uint8_t> labels;
    std::string label_name;
    std::string positive_label;

    std::size_t n_rows() const { return columns.empty() ? labels.size() : columns[0].size(); }
    std::size_t n_cols() const { return columns.size(); }

    // Row subset, preserving order of `rows`.
    RawTable subset(const std::vector<std::size_t>& rows) const {
        RawTable out;
        out.column_names = column_names;
        out.label_name = label_name;
        out.positive_label = positive_label;
        out.columns.resize(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out.columns[c].reserve(rows.size());
            for (std::size_t r : rows) out.columns[c].push_back(columns[c][r]);
        }
        out.labels.reserve(rows.size());
        for (std::size_t r : rows) out.labels.push_back(labels[r]);
        return out;
    }
};

inline bool is_missing_value(const std::string& s) {
    return s.empty() || s == "?" || s == "NA";
}

inline std::optional<double> parse_double(const std::string& s) {
    const char* b = s.data();
    const char* e = b + s.size();
    double v{};
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) return std::nullopt;
    return v;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// One CSV record. Handles quoted fields with embedded commas/quotes;
// unquoted fields are whitespace-trimmed (UCI files use ", " separators).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    out.push_back(trim(field));
    return out;
}

}  // namespace detail

// Loads a headered CSV. The label column must exist; a cell equal to
// `positive_label` maps to 1, any other non-missing value to 0. Rows with
// missing labels are rejected with row context.
inline RawTable load_csv(const std::string& path, const std::string& label,
                         const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw io_error("empty file (no header row): " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = detail::split_csv_line(line);
    std::size_t label_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label) {
            label_col = c;
            break;
        }
    }
    if (label_col == header.size())
        throw schema_error("label column '" + label + "' not found in header of " + path);

    RawTable t;
    t.label_name = label;
    t.positive_label = positive_label;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_col) t.column_names.push_back(header[c]);
    t.columns.resize(t.column_names.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw schema_error("row " + std::to_string(row) + " of " + path + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
        const std::string& lab = fields[label_col];
        if (is_missing_value(lab))
            throw schema_error("row " + std::to_string(row) + " of " + path +
                               ": missing value in label column '" + label + "'");
        t.labels.push_back(lab == positive_label ? 1 : 0);
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == label_col) continue;
            t.columns[out_c++].push_back(std::move(fields[c]));
        }
    }
    return t;
}

// Loads a headered CSV without designating a label column; labels stay
// empty. Used for scoring rows against an already-trained model.
inline RawTable load_csv_unlabeled(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty file (no header row): " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RawTable t;
    t.column_names = detail::split_csv_line(line);
    t.columns.resize(t.column_names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != t.column_names.size())
            throw schema_error("row " + std::to_string(row) + " of " + path + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(t.column_names.size()));
        for (std::size_t c = 0; c < fields.size(); ++c)
            t.columns[c].push_back(std::move(fields[c]));
    }
    return t;
}

// How one binary feature is derived from a source column. Stored in the
// model file so test-time rows binarize with training-time parameters.
struct FeatureDef {
    enum class Kind { Level, OtherLevels, Interval };

    std::string name;
    std::string column;
    int column_index = -1;  // index into RawTable columns at training time
    Kind kind = Kind::Level;
    std::string level;                       // Kind::Level
    std::vector<std::string> other_levels;   // Kind::OtherLevels
    double lo = 0.0, hi = 0.0;
    bool has_lo = false, has_hi = false;     // Kind::Interval, [lo, hi)

    bool matches(const std::string& raw) const {
        if (is_missing_value(raw)) return false;
        switch (kind) {
            case Kind::Level:
                return raw == level;
            case Kind::OtherLevels:
                return std::find(other_levels.begin(), other_levels.end(), raw) !=
                       other_levels.end();
            case Kind::Interval: {
                auto v = parse_double(raw);
                if (!v) return false;
                if (has_lo && *v < lo) return false;
                if (has_hi && *v >= hi) return false;
                return true;
            }
        }
        return false;
    }
};

// Observations as per-feature bit columns plus the positive-label vector.
// Immutable once built; safe to share across search chains.
struct BinaryDataset {
    std::size_t n = 0;
    std::vector<FeatureDef> features;
    std::vector<BitVector> feature_bits;
    std::vector<int> feature_column;  // source column id per feature
    BitVector labels_pos;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;

    std::size_t n_features() const { return features.size(); }
};

struct BinarizeOptions {
    int numeric_bins = 4;
    double rare_level_threshold = 0.01;  // levels under this fraction merge into OTHER
};

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline std::string interval_name(const std::string& col, bool has_lo, double lo,
                                 bool has_hi, double hi) {
    if (!has_lo) return col + "<" + format_number(hi);
    if (!has_hi) return col + ">=" + format_number(lo);
    return col + "∈[" + format_number(lo) + "," + format_number(hi) + ")";
}

}  // namespace detail

// Turns raw columns into binary features. Categorical columns expand one
// feature per level, with levels under rare_level_threshold merged into a
// single col=OTHER feature. Numeric columns get quantile-edge interval
// features; a single value holding at least 1/numeric_bins of the mass is
// split out as its own col=value feature and excluded from the quantiles
// (sparse counters like capital-gain would otherwise collapse every edge
// onto the modal value). Constant columns are dropped with a warning.
inline BinaryDataset binarize(const RawTable& table, const BinarizeOptions& opts = {},
                              std::vector<std::string>* warnings = nullptr) {
    if (table.n_rows() == 0) throw schema_error("empty table: nothing to binarize");
    if (opts.numeric_bins < 2) throw config_error("numeric_bins must be >= 2");

    const std::size_t n = table.n_rows();
    BinaryDataset out;
    out.n = n;
    out.labels_pos = BitVector(n);
    for (std::size_t i = 0; i < n; ++i)
        if (table.labels[i]) out.labels_pos.set(i);
    out.n_pos = out.labels_pos.popcount();
    out.n_neg = n - out.n_pos;

    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        const auto& col = table.columns[c];
        const auto& cname = table.column_names[c];

        bool all_numeric = true;
        std::map<std::string, std::size_t> level_counts;
        std::size_t present = 0;
        for (const auto& cell : col) {
            if (is_missing_value(cell)) continue;
            ++present;
            ++level_counts[cell];
            if (all_numeric && !parse_double(cell)) all_numeric = false;
        }
        if (present == 0 || level_counts.size() <= 1) {
            warn("column '" + cname + "' is constant; dropped");
            continue;
        }
        // Numeric columns with very few distinct values behave as categorical.
        bool numeric = all_numeric &&
                       level_counts.size() > static_cast<std::size_t>(opts.numeric_bins);

        std::vector<FeatureDef> defs;
        if (!numeric) {
            const auto rare_cut =
                static_cast<std::size_t>(opts.rare_level_threshold * static_cast<double>(n));
            std::vector<std::string> rare;
            for (const auto& [lvl, cnt] : level_counts) {
                if (cnt < rare_cut) {
                    rare.push_back(lvl);
                    continue;
                }
                FeatureDef d;
                d.kind = FeatureDef::Kind::Level;
                d.column = cname;
                d.column_index = static_cast<int>(c);
                d.level = lvl;
                d.name = cname + "=" + lvl;
                defs.push_back(std::move(d));
            }
            if (!rare.empty()) {
                FeatureDef d;
                d.kind = FeatureDef::Kind::OtherLevels;
                d.column = cname;
                d.column_index = static_cast<int>(c);
                d.other_levels = std::move(rare);
                d.name = cname + "=OTHER";
                defs.push_back(std::move(d));
            }
        } else {
            // A value holding >= 1/numeric_bins of the mass gets its own
            // col=value feature; sparse counters like capital-gain would
            // otherwise collapse every quantile edge onto the modal value.
            std::map<double, std::size_t> value_counts;
            for (const auto& [lvl, cnt] : level_counts) value_counts[*parse_double(lvl)] += cnt;
            const double point_cut = static_cast<double>(present) / opts.numeric_bins;
            std::vector<double> points;
            std::vector<double> residual;
            residual.reserve(present);
            for (const auto& [v, cnt] : value_counts) {
                if (static_cast<double>(cnt) >= point_cut)
                    points.push_back(v);
                else
                    for (std::size_t k = 0; k < cnt; ++k) residual.push_back(v);
            }
            std::vector<double> edges;
            if (!residual.empty()) {
                std::sort(residual.begin(), residual.end());
                for (int b = 1; b < opts.numeric_bins; ++b) {
                    std::size_t idx = residual.size() * static_cast<std::size_t>(b) /
                                      static_cast<std::size_t>(opts.numeric_bins);
                    edges.push_back(residual[idx]);
                }
            }
            // Extracted points become edge pairs [v, v+) so intervals stay
            // disjoint and the point feature reads as col=value.
            for (double v : points) {
                edges.push_back(v);
                edges.push_back(std::nextafter(v, std::numeric_limits<double>::infinity()));
            }
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

            std::vector<std::pair<bool, double>> bounds;  // (bounded, value)
            bounds.emplace_back(false, 0.0);
            for (double e : edges) bounds.emplace_back(true, e);
            bounds.emplace_back(false, 0.0);
            for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
                FeatureDef d;
                d.kind = FeatureDef::Kind::Interval;
                d.column = cname;
                d.column_index = static_cast<int>(c);
                d.has_lo = bounds[b].first;
                d.lo = bounds[b].second;
                d.has_hi = bounds[b + 1].first;
                d.hi = bounds[b + 1].second;
                if (!d.has_lo && !d.has_hi) break;  // no edges survived
                if (d.has_lo && d.has_hi &&
                    d.hi == std::nextafter(d.lo, std::numeric_limits<double>::infinity()))
                    d.name = cname + "=" + detail::format_number(d.lo);
                else
                    d.name = detail::interval_name(cname, d.has_lo, d.lo, d.has_hi, d.hi);
                defs.push_back(std::move(d));
            }
        }

        // Materialize bit columns; drop empty or all-present literals.
        for (auto& d : defs) {
            BitVector bits(n);
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < n; ++i) {
                // Point-mass intervals must match the exact cell value, so reuse
                // the generic matcher for every kind.
                if (d.matches(col[i])) {
                    bits.set(i);
                    ++cnt;
                }
            }
            if (cnt == 0) continue;
            if (cnt == n) {
                warn("feature '" + d.name + "' holds on every row; dropped");
                continue;
            }
            out.feature_column.push_back(static_cast<int>(c));
            out.features.push_back(std::move(d));
            out.feature_bits.push_back(std::move(bits));
        }
    }
    return out;
}

// Evaluates every feature of a trained binarization on one raw row.
// column_map[f] gives the CSV column index for feature f.
inline std::vector<std::uint8_t> binarize_row(const std::vector<FeatureDef>& features,
                                              const std::vector<int>& column_map,
                                              const std::vector<std::string>& row) {
    std::vector<std::uint8_t> bits(features.size(), 0);
    for (std::size_t f = 0; f < features.size(); ++f)
        bits[f] = features[f].matches(row[static_cast<std::size_t>(column_map[f])]) ? 1 : 0;
    return bits;
}

}  // namespace rulelist
