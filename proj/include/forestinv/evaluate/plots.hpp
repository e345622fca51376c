#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestinv/classify/image.hpp"
#include "forestinv/crowns/itc.hpp"
#include "forestinv/evaluate/metrics.hpp"

namespace forestinv::evaluate {

struct PlotDefinition {
    std::string id;
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 15.0;  // m
    double dbh_min = 7.5;  // cm, strict
    std::optional<double> observed_volume; // m^3
    std::optional<double> observed_agb;    // Mg

    void validate() const {
        if (!(radius > 0)) throw DataError("plot " + id + ": radius must be > 0");
        if (!(dbh_min >= 0)) throw DataError("plot " + id + ": dbh_min must be >= 0");
    }
};

struct PlotTotals {
    double volume_m3 = 0.0;
    double agb_mg = 0.0;
    std::size_t n_trees = 0;
};

/// Sums crowns whose apex lies within the plot radius and whose dbh exceeds dbh_min.
inline PlotTotals aggregate_plot(const std::vector<crowns::CrownRecord>& crowns, const PlotDefinition& plot) {
    plot.validate();
    PlotTotals t;
    const double r2 = plot.radius * plot.radius;
    for (const auto& c : crowns) {
        const double dx = c.apex_x - plot.center_x, dy = c.apex_y - plot.center_y;
        if (dx * dx + dy * dy > r2) continue;
        if (!c.dbh || !(*c.dbh > plot.dbh_min)) continue;
        t.volume_m3 += c.volume.value_or(0.0);
        t.agb_mg += c.agb.value_or(0.0) / 1000.0;
        ++t.n_trees;
    }
    return t;
}

/// Sample Pearson correlation; absent when either series has zero variance.
inline std::optional<double> pearson_r(std::span<const double> observed, std::span<const double> predicted) {
    if (observed.size() != predicted.size()) throw DataError("correlation series differ in length");
    if (observed.size() < 2) throw DataError("correlation needs at least two pairs");
    const double n = static_cast<double>(observed.size());
    double mo = 0, mp = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) mo += observed[i], mp += predicted[i];
    mo /= n;
    mp /= n;
    double soo = 0, spp = 0, sop = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double a = observed[i] - mo, b = predicted[i] - mp;
        soo += a * a;
        spp += b * b;
        sop += a * b;
    }
    if (!(soo > 0) || !(spp > 0)) return std::nullopt;
    return std::clamp(sop / std::sqrt(soo * spp), -1.0, 1.0);
}

struct PlotComparison {
    PlotDefinition plot;
    PlotTotals predicted;
};

// plot_id,center_x,center_y[,radius][,dbh_min][,obs_volume_m3][,obs_agb_mg]
/// Absent radius/dbh_min columns or cells take the values from `defaults`.
inline std::vector<PlotDefinition> parse_plots(std::string_view buf, const std::string& name = "<memory>",
                                               const PlotDefinition& defaults = {}) {
    text::LineReader lines(buf);
    std::string_view line;
    while (lines.next(line) && text::trim(line).empty()) {
    }
    if (text::trim(line).empty()) throw DataError(name + ": empty plot file");
    const std::array<std::string_view, 7> known{"plot_id", "center_x", "center_y", "radius", "dbh_min",
                                                "obs_volume_m3", "obs_agb_mg"};
    std::array<int, 7> col;
    col.fill(-1);
    auto header = text::split(text::trim(line), ',');
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto h = text::trim(header[i]);
        auto it = std::find(known.begin(), known.end(), h);
        if (it == known.end()) throw ParseError(name, lines.line_number(), "unknown column '" + std::string(h) + "'");
        auto& slot = col[static_cast<std::size_t>(it - known.begin())];
        if (slot >= 0) throw ParseError(name, lines.line_number(), "duplicate column '" + std::string(h) + "'");
        slot = static_cast<int>(i);
    }
    for (int i = 0; i < 3; ++i)
        if (col[static_cast<std::size_t>(i)] < 0)
            throw ParseError(name, lines.line_number(), "missing column '" + std::string(known[static_cast<std::size_t>(i)]) + "'");
    std::vector<PlotDefinition> plots;
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != header.size()) throw ParseError(name, lines.line_number(), "wrong field count");
        auto num = [&](std::size_t k) -> std::optional<double> {
            if (col[k] < 0) return std::nullopt;
            auto field = text::trim(f[static_cast<std::size_t>(col[k])]);
            if (field.empty()) return std::nullopt;
            auto v = text::parse_double(field);
            if (!v) throw ParseError(name, lines.line_number(), "non-numeric value '" + std::string(field) + "'");
            return v;
        };
        PlotDefinition p;
        p.radius = defaults.radius;
        p.dbh_min = defaults.dbh_min;
        p.id = std::string(text::trim(f[static_cast<std::size_t>(col[0])]));
        auto cx = num(1), cy = num(2);
        if (!cx || !cy) throw ParseError(name, lines.line_number(), "missing plot center");
        p.center_x = *cx;
        p.center_y = *cy;
        if (auto v = num(3)) p.radius = *v;
        if (auto v = num(4)) p.dbh_min = *v;
        p.observed_volume = num(5);
        p.observed_agb = num(6);
        p.validate();
        plots.push_back(std::move(p));
    }
    return plots;
}

inline std::vector<PlotDefinition> read_plots(const std::string& path, const PlotDefinition& defaults = {}) {
    return parse_plots(text::read_file(path), path, defaults);
}

inline std::string format_plots(const std::vector<PlotDefinition>& plots) {
    std::string out = "plot_id,center_x,center_y,radius,dbh_min,obs_volume_m3,obs_agb_mg\n";
    for (const auto& p : plots)
        out += p.id + "," + text::format_double(p.center_x) + "," + text::format_double(p.center_y) + "," +
               text::format_double(p.radius) + "," + text::format_double(p.dbh_min) + "," +
               (p.observed_volume ? text::format_double(*p.observed_volume) : "") + "," +
               (p.observed_agb ? text::format_double(*p.observed_agb) : "") + "\n";
    return out;
}

struct CorrelationSummary {
    std::optional<double> volume_r;
    std::optional<double> agb_r;
};

/// Correlation over plots that carry both observed values.
inline CorrelationSummary correlate(const std::vector<PlotComparison>& rows) {
    std::vector<double> ov, pv, oa, pa;
    for (const auto& r : rows) {
        if (r.plot.observed_volume) ov.push_back(*r.plot.observed_volume), pv.push_back(r.predicted.volume_m3);
        if (r.plot.observed_agb) oa.push_back(*r.plot.observed_agb), pa.push_back(r.predicted.agb_mg);
    }
    CorrelationSummary s;
    if (ov.size() >= 2) s.volume_r = pearson_r(ov, pv);
    if (oa.size() >= 2) s.agb_r = pearson_r(oa, pa);
    return s;
}

/// Observed vs predicted values per plot, for external plotting.
inline std::string format_plot_csv(const std::vector<PlotComparison>& rows) {
    std::string out = "plot_id,n_trees,obs_volume_m3,pred_volume_m3,obs_agb_mg,pred_agb_mg\n";
    for (const auto& r : rows)
        out += r.plot.id + "," + std::to_string(r.predicted.n_trees) + "," + format_optional(r.plot.observed_volume) +
               "," + text::format_double(r.predicted.volume_m3) + "," + format_optional(r.plot.observed_agb) + "," +
               text::format_double(r.predicted.agb_mg) + "\n";
    return out;
}

/// Fixed-width observed/predicted rows per plot followed by the correlation coefficients.
inline std::string format_plot_table(const std::vector<PlotComparison>& rows) {
    constexpr std::size_t w0 = 10, w1 = 4, wc = 9;
    auto fixed = [](const std::optional<double>& v) { return v ? text::format_fixed(*v, 2) : std::string("-"); };
    std::string out = detail::pad("", w0) + detail::pad("Area", w1);
    for (const auto& r : rows) out += detail::lpad(r.plot.id, wc);
    out += "\n";
    auto row = [&](const std::string& label, const std::string& kind, auto get) {
        std::string line = detail::pad(label, w0) + detail::pad(kind, w1);
        for (const auto& r : rows) line += detail::lpad(fixed(get(r)), wc);
        out += line + "\n";
    };
    row("V (m3)", "Ob", [](const PlotComparison& r) { return r.plot.observed_volume; });
    row("", "Pr", [](const PlotComparison& r) { return std::optional<double>(r.predicted.volume_m3); });
    row("AGB (Mg)", "Ob", [](const PlotComparison& r) { return r.plot.observed_agb; });
    row("", "Pr", [](const PlotComparison& r) { return std::optional<double>(r.predicted.agb_mg); });
    const auto c = correlate(rows);
    out += "R volume: " + (c.volume_r ? text::format_fixed(*c.volume_r, 4) : std::string("undefined")) + "\n";
    out += "R AGB: " + (c.agb_r ? text::format_fixed(*c.agb_r, 4) : std::string("undefined")) + "\n";
    return out;
}

/// Pixel-level scoring items: each classified pixel inside a scored crown,
/// labelled with that crown's reference species.
inline std::vector<ScoredItem> pixel_items(const classify::LabelMap& map, const crowns::Segmentation& seg,
                                           const std::map<int, std::string>& truth, const std::vector<int>& crown_ids) {
    std::vector<ScoredItem> items;
    const auto& lg = map.labels.geometry();
    const auto& cg = seg.labels.geometry();
    for (int id : crown_ids) {
        auto t = truth.find(id);
        const auto* crown = seg.find(id);
        if (t == truth.end() || !crown) continue;
        for (const auto& cell : crown->cells) {
            auto pc = lg.cell_at(cg.center_x(cell.col), cg.center_y(cell.row));
            if (!pc) continue;
            if (auto sp = map.species_at(*pc)) items.push_back({t->second, *sp});
        }
    }
    return items;
}

} // namespace forestinv::evaluate
