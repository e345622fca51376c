#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "forestinv/common/error.hpp"
#include "forestinv/common/text.hpp"

namespace forestinv::evaluate {

/// Rows are true species, columns predicted species, both in `species` order.
struct ConfusionMatrix {
    std::vector<std::string> species;
    std::vector<std::vector<std::size_t>> counts;

    explicit ConfusionMatrix(std::vector<std::string> sp = {}) : species(std::move(sp)) {
        counts.assign(species.size(), std::vector<std::size_t>(species.size(), 0));
    }

    std::size_t index_of(const std::string& s) const {
        auto it = std::lower_bound(species.begin(), species.end(), s);
        if (it == species.end() || *it != s) throw DataError("species '" + s + "' not in confusion matrix");
        return static_cast<std::size_t>(it - species.begin());
    }

    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& r : counts)
            for (auto v : r) t += v;
        return t;
    }

    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
        return t;
    }

    /// trace / total
    std::optional<double> overall_accuracy() const {
        const auto n = total();
        if (n == 0) return std::nullopt;
        return static_cast<double>(trace()) / static_cast<double>(n);
    }
};

struct ScoredItem {
    std::optional<std::string> truth;
    std::optional<std::string> predicted;
};

struct ScoreResult {
    ConfusionMatrix matrix;
    std::size_t excluded = 0; // items missing either label
};

/// Tallies items into a confusion matrix over the sorted union of labels seen
/// (plus any `species` given up front).
inline ScoreResult score(const std::vector<ScoredItem>& items, std::vector<std::string> species = {}) {
    std::size_t excluded = 0;
    for (const auto& it : items) {
        if (!it.truth || !it.predicted) {
            ++excluded;
            continue;
        }
        species.push_back(*it.truth);
        species.push_back(*it.predicted);
    }
    std::sort(species.begin(), species.end());
    species.erase(std::unique(species.begin(), species.end()), species.end());
    ScoreResult out{ConfusionMatrix(species), excluded};
    for (const auto& it : items)
        if (it.truth && it.predicted)
            ++out.matrix.counts[out.matrix.index_of(*it.truth)][out.matrix.index_of(*it.predicted)];
    return out;
}

struct ClassMetrics {
    std::string species;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> accuracy;  // (TP + TN) / total
    std::optional<double> precision; // TP / (TP + FP)
    std::optional<double> recall;    // TP / (TP + FN)
    std::optional<double> f_score;   // 2PR / (P + R)
};

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

/// One-vs-rest counts and ratios per species. A ratio with a zero denominator is absent.
inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    std::vector<ClassMetrics> out;
    for (std::size_t k = 0; k < cm.species.size(); ++k) {
        ClassMetrics m;
        m.species = cm.species[k];
        m.tp = cm.counts[k][k];
        for (std::size_t j = 0; j < cm.species.size(); ++j) {
            if (j == k) continue;
            m.fn += cm.counts[k][j];
            m.fp += cm.counts[j][k];
        }
        m.tn = total - m.tp - m.fp - m.fn;
        m.accuracy = ratio(m.tp + m.tn, total);
        m.precision = ratio(m.tp, m.tp + m.fp);
        m.recall = ratio(m.tp, m.tp + m.fn);
        if (m.precision && m.recall && *m.precision + *m.recall > 0)
            m.f_score = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
        out.push_back(std::move(m));
    }
    return out;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? text::format_double(*v) : "-"; }

inline std::string format_percent(const std::optional<double>& v) {
    return v ? text::format_fixed(*v * 100.0, 0) + "%" : "-";
}

/// Delimited per-class metrics; absent values are written as "-".
inline std::string format_metrics_csv(const std::vector<std::pair<std::string, std::vector<ClassMetrics>>>& runs) {
    std::string out = "classifier,species,tp,fp,fn,tn,accuracy,precision,recall,f_score\n";
    for (const auto& [name, metrics] : runs)
        for (const auto& m : metrics)
            out += name + "," + m.species + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," +
                   std::to_string(m.fn) + "," + std::to_string(m.tn) + "," + format_optional(m.accuracy) + "," +
                   format_optional(m.precision) + "," + format_optional(m.recall) + "," + format_optional(m.f_score) +
                   "\n";
    return out;
}

namespace detail {

inline std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

inline std::string lpad(std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
}

} // namespace detail

/// Fixed-width table with Acc./Prec./F columns for each classifier run.
inline std::string format_metrics_table(const std::vector<std::pair<std::string, std::vector<ClassMetrics>>>& runs) {
    std::vector<std::string> species;
    for (const auto& [name, metrics] : runs)
        for (const auto& m : metrics) species.push_back(m.species);
    std::sort(species.begin(), species.end());
    species.erase(std::unique(species.begin(), species.end()), species.end());
    std::size_t w0 = 8;
    for (const auto& s : species) w0 = std::max(w0, s.size() + 2);
    constexpr std::size_t wc = 7;

    std::string out = detail::pad("Species", w0);
    for (const auto& [name, metrics] : runs) out += detail::pad(name, 3 * wc);
    out += "\n" + detail::pad("", w0);
    for (std::size_t r = 0; r < runs.size(); ++r)
        out += detail::lpad("Acc.", wc) + detail::lpad("Prec.", wc) + detail::lpad("F", wc);
    out += "\n";
    for (const auto& s : species) {
        std::string line = detail::pad(s, w0);
        for (const auto& [name, metrics] : runs) {
            auto it = std::find_if(metrics.begin(), metrics.end(), [&](const ClassMetrics& m) { return m.species == s; });
            if (it == metrics.end()) {
                line += detail::lpad("-", wc) + detail::lpad("-", wc) + detail::lpad("-", wc);
                continue;
            }
            line += detail::lpad(format_percent(it->accuracy), wc) + detail::lpad(format_percent(it->precision), wc) +
                    detail::lpad(format_percent(it->f_score), wc);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

} // namespace forestinv::evaluate
