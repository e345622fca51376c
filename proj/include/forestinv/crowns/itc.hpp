#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "forestinv/common/parallel.hpp"
#include "forestinv/geodata/grid.hpp"

namespace forestinv::crowns {

using geodata::Cell;
using geodata::Grid;

struct ItcParams {
    int min_search_win = 3;
    int max_search_win = 7;
    double thresh_seed = 0.55;
    double thresh_crown = 0.6;
    double min_dist = 5.0;      // minimum treetop spacing, m
    double max_dist = 40.0;     // maximum crown diameter, m
    double height_threshold = 2.0;
    double win_low_height = 2.0;
    double win_high_height = 30.0;
    int threads = 1;

    void validate() const {
        auto odd = [](int w) { return w >= 3 && w % 2 == 1; };
        if (!odd(min_search_win) || !odd(max_search_win) || min_search_win > max_search_win)
            throw DataError("search windows must be odd, >= 3, and min <= max");
        if (!(thresh_seed > 0 && thresh_seed < 1) || !(thresh_crown > 0 && thresh_crown < 1))
            throw DataError("thresh_seed and thresh_crown must lie in (0, 1)");
        if (!(min_dist > 0) || min_dist > max_dist) throw DataError("need 0 < min_dist <= max_dist");
        if (height_threshold < 0) throw DataError("height_threshold must be >= 0");
        if (!(win_high_height > win_low_height)) throw DataError("win_high_height must exceed win_low_height");
    }

    /// Odd window side for a given height: linear ramp between the two window heights, clamped.
    int window_for(double height) const {
        const double frac = std::clamp((height - win_low_height) / (win_high_height - win_low_height), 0.0, 1.0);
        const double half_steps = frac * (max_search_win - min_search_win) / 2.0;
        return min_search_win + 2 * static_cast<int>(std::lround(half_steps));
    }
};

struct Treetop {
    Cell cell;
    double x = 0.0;
    double y = 0.0;
    double height = 0.0;
};

/// Cell is a local maximum candidate when no cell of its height-scaled square
/// window is higher; on a plateau only the first cell in raster order qualifies. Candidates are then accepted in descending
/// height order unless an accepted treetop lies closer than min_dist.
inline std::vector<Treetop> detect_treetops(const Grid& chm, const ItcParams& params) {
    params.validate();
    const auto& g = chm.geometry();
    std::vector<std::vector<Treetop>> per_row(static_cast<std::size_t>(g.nrows));

    parallel_for(static_cast<std::size_t>(g.nrows), params.threads, [&](std::size_t ri) {
        const int r = static_cast<int>(ri);
        for (int c = 0; c < g.ncols; ++c) {
            const double h = chm.at(r, c);
            if (chm.is_nodata_value(h) || h < params.height_threshold) continue;
            const int half = params.window_for(h) / 2;
            bool is_max = true;
            for (int rr = std::max(0, r - half); rr <= std::min(g.nrows - 1, r + half) && is_max; ++rr)
                for (int cc = std::max(0, c - half); cc <= std::min(g.ncols - 1, c + half); ++cc) {
                    if (rr == r && cc == c) continue;
                    const double v = chm.at(rr, cc);
                    const bool earlier = rr < r || (rr == r && cc < c);
                    if (!chm.is_nodata_value(v) && (v > h || (v == h && earlier))) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) per_row[ri].push_back({{r, c}, g.center_x(c), g.center_y(r), h});
        }
    });

    std::vector<Treetop> candidates;
    for (auto& row : per_row) candidates.insert(candidates.end(), row.begin(), row.end());
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Treetop& a, const Treetop& b) { return a.height > b.height; });

    std::vector<Treetop> accepted;
    const double min_d2 = params.min_dist * params.min_dist;
    for (const auto& cand : candidates) {
        bool clear = true;
        for (const auto& a : accepted) {
            const double dx = a.x - cand.x, dy = a.y - cand.y;
            if (dx * dx + dy * dy < min_d2) {
                clear = false;
                break;
            }
        }
        if (clear) accepted.push_back(cand);
    }
    return accepted;
}

struct CrownRecord {
    int crown_id = 0;
    double apex_x = 0.0;
    double apex_y = 0.0;
    double tree_height = 0.0;
    double crown_area = 0.0;
    double crown_diameter = 0.0;
    Cell apex_cell;
    std::vector<Cell> cells; // sorted, 4-connected, contains apex_cell
    std::optional<std::string> species_code;
    std::optional<double> dbh;
    std::optional<double> volume;
    std::optional<double> agb;
};

/// Crowns plus the raster mapping each cell to its crown_id (nodata for background).
struct Segmentation {
    std::vector<CrownRecord> crowns;
    Grid labels;

    const CrownRecord* find(int crown_id) const {
        if (crown_id >= 1 && static_cast<std::size_t>(crown_id) <= crowns.size() &&
            crowns[static_cast<std::size_t>(crown_id - 1)].crown_id == crown_id)
            return &crowns[static_cast<std::size_t>(crown_id - 1)];
        for (const auto& c : crowns)
            if (c.crown_id == crown_id) return &c;
        return nullptr;
    }

    std::optional<int> crown_at(Cell c) const {
        if (!labels.geometry().contains(c)) return std::nullopt;
        auto v = labels.value(c);
        if (!v) return std::nullopt;
        return static_cast<int>(*v);
    }
};

inline void finalize_geometry(CrownRecord& crown, double cellsize) {
    std::sort(crown.cells.begin(), crown.cells.end());
    crown.crown_area = static_cast<double>(crown.cells.size()) * cellsize * cellsize;
    crown.crown_diameter = 2.0 * std::sqrt(crown.crown_area / std::numbers::pi);
}

/// Seeded region growing over 4-connected cells. The frontier is a single
/// priority queue ordered by cell height (descending), then apex height
/// (descending), then crown id, so contested cells go to the taller tree.
inline Segmentation grow_crowns(const Grid& chm, const std::vector<Treetop>& apexes, const ItcParams& params) {
    params.validate();
    const auto& g = chm.geometry();
    Segmentation seg{{}, Grid(g)};
    std::vector<int> owner(g.size(), 0);
    std::vector<double> sum(apexes.size(), 0.0);
    std::vector<std::size_t> count(apexes.size(), 0);
    const double radius2 = 0.25 * params.max_dist * params.max_dist;

    struct Candidate {
        double cell_h;
        double apex_h;
        int crown; // 0-based
        Cell cell;
    };
    auto worse = [](const Candidate& a, const Candidate& b) {
        if (a.cell_h != b.cell_h) return a.cell_h < b.cell_h;
        if (a.apex_h != b.apex_h) return a.apex_h < b.apex_h;
        if (a.crown != b.crown) return a.crown > b.crown;
        return b.cell < a.cell;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);

    seg.crowns.resize(apexes.size());
    for (std::size_t k = 0; k < apexes.size(); ++k) {
        const auto& a = apexes[k];
        auto& crown = seg.crowns[k];
        crown.crown_id = static_cast<int>(k) + 1;
        crown.apex_cell = a.cell;
        crown.apex_x = g.center_x(a.cell.col);
        crown.apex_y = g.center_y(a.cell.row);
        crown.tree_height = chm.at(a.cell);
        if (owner[g.index(a.cell)] != 0) throw DataError("duplicate apex cell");
        owner[g.index(a.cell)] = crown.crown_id;
        crown.cells.push_back(a.cell);
        sum[k] = crown.tree_height;
        count[k] = 1;
    }

    constexpr int dr[4] = {-1, 0, 0, 1};
    constexpr int dc[4] = {0, -1, 1, 0};
    auto push_neighbours = [&](std::size_t k, Cell from) {
        for (int n = 0; n < 4; ++n) {
            const Cell nb{from.row + dr[n], from.col + dc[n]};
            if (!g.contains(nb) || owner[g.index(nb)] != 0) continue;
            const double v = chm.at(nb);
            if (chm.is_nodata_value(v)) continue;
            frontier.push({v, seg.crowns[k].tree_height, static_cast<int>(k), nb});
        }
    };
    for (std::size_t k = 0; k < apexes.size(); ++k) push_neighbours(k, apexes[k].cell);

    while (!frontier.empty()) {
        const Candidate cand = frontier.top();
        frontier.pop();
        const std::size_t idx = g.index(cand.cell);
        if (owner[idx] != 0) continue;
        const auto k = static_cast<std::size_t>(cand.crown);
        auto& crown = seg.crowns[k];
        if (cand.cell_h < params.thresh_seed * crown.tree_height) continue;
        if (cand.cell_h < params.thresh_crown * (sum[k] / static_cast<double>(count[k]))) continue;
        const double dx = g.center_x(cand.cell.col) - crown.apex_x;
        const double dy = g.center_y(cand.cell.row) - crown.apex_y;
        if (dx * dx + dy * dy > radius2) continue;
        owner[idx] = crown.crown_id;
        crown.cells.push_back(cand.cell);
        sum[k] += cand.cell_h;
        ++count[k];
        push_neighbours(k, cand.cell);
    }

    for (auto& crown : seg.crowns) {
        finalize_geometry(crown, g.cellsize);
        for (const auto& c : crown.cells) seg.labels.at(c) = crown.crown_id;
    }
    return seg;
}

/// 3x3 mean filter over valid cells; nodata cells stay nodata.
inline Grid mean_filter_3x3(const Grid& in) {
    const auto& g = in.geometry();
    Grid out(g, in.nodata());
    for (int r = 0; r < g.nrows; ++r)
        for (int c = 0; c < g.ncols; ++c) {
            if (in.is_nodata(r, c)) continue;
            double s = 0;
            int n = 0;
            for (int rr = std::max(0, r - 1); rr <= std::min(g.nrows - 1, r + 1); ++rr)
                for (int cc = std::max(0, c - 1); cc <= std::min(g.ncols - 1, c + 1); ++cc)
                    if (!in.is_nodata(rr, cc)) s += in.at(rr, cc), ++n;
            out.at(r, c) = s / n;
        }
    return out;
}

} // namespace forestinv::crowns
