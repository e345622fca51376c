#pragma once

#include <string>

#include "forestinv/common/text.hpp"
#include "forestinv/crowns/itc.hpp"
#include "forestinv/geodata/ascii_grid.hpp"

namespace forestinv::crowns {

inline constexpr const char* kCrownTableHeader =
    "crown_id,apex_x,apex_y,tree_height,crown_area,crown_diameter,species_code,dbh,volume,agb";

inline std::string format_crown_table(const std::vector<CrownRecord>& crowns) {
    auto opt = [](const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); };
    std::string out = std::string(kCrownTableHeader) + "\n";
    for (const auto& c : crowns) {
        out += std::to_string(c.crown_id) + "," + text::format_double(c.apex_x) + "," + text::format_double(c.apex_y) +
               "," + text::format_double(c.tree_height) + "," + text::format_double(c.crown_area) + "," +
               text::format_double(c.crown_diameter) + "," + c.species_code.value_or("") + "," + opt(c.dbh) + "," +
               opt(c.volume) + "," + opt(c.agb) + "\n";
    }
    return out;
}

inline void write_segmentation(const Segmentation& seg, const std::string& table_path, const std::string& grid_path) {
    text::write_file(table_path, format_crown_table(seg.crowns));
    geodata::write_ascii_grid(seg.labels, grid_path);
}

/// Rebuilds a segmentation from its crown table and crown-label grid.
inline Segmentation parse_segmentation(std::string_view table, const Grid& labels, const std::string& name = "<memory>") {
    Segmentation seg{{}, labels};
    text::LineReader lines(table);
    std::string_view line;
    if (!lines.next(line) || text::trim(line) != kCrownTableHeader)
        throw ParseError(name, 1, "crown table header must be '" + std::string(kCrownTableHeader) + "'");
    const auto& g = labels.geometry();
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != 10) throw ParseError(name, lines.line_number(), "expected 10 fields");
        auto num = [&](std::size_t i) {
            auto v = text::parse_double(f[i]);
            if (!v) throw ParseError(name, lines.line_number(), "non-numeric field '" + std::string(f[i]) + "'");
            return *v;
        };
        auto opt = [&](std::size_t i) -> std::optional<double> {
            if (text::trim(f[i]).empty()) return std::nullopt;
            return num(i);
        };
        CrownRecord c;
        auto id = text::parse_int<int>(f[0]);
        if (!id || *id < 1) throw ParseError(name, lines.line_number(), "crown_id must be a positive integer");
        c.crown_id = *id;
        c.apex_x = num(1);
        c.apex_y = num(2);
        c.tree_height = num(3);
        c.crown_area = num(4);
        c.crown_diameter = num(5);
        if (auto sp = text::trim(f[6]); !sp.empty()) c.species_code = std::string(sp);
        c.dbh = opt(7);
        c.volume = opt(8);
        c.agb = opt(9);
        auto apex = g.cell_at(c.apex_x, c.apex_y);
        if (!apex) throw ParseError(name, lines.line_number(), "apex lies outside the crown-label grid");
        c.apex_cell = *apex;
        seg.crowns.push_back(std::move(c));
    }
    std::sort(seg.crowns.begin(), seg.crowns.end(),
              [](const CrownRecord& a, const CrownRecord& b) { return a.crown_id < b.crown_id; });
    std::vector<std::size_t> slot(seg.crowns.size() + 1, 0);
    bool dense = true;
    for (std::size_t i = 0; i < seg.crowns.size(); ++i) dense = dense && seg.crowns[i].crown_id == static_cast<int>(i + 1);
    if (!dense) throw DataError(name + ": crown ids must be 1..n");
    for (int r = 0; r < g.nrows; ++r)
        for (int col = 0; col < g.ncols; ++col) {
            auto v = labels.value({r, col});
            if (!v) continue;
            const auto id = static_cast<std::size_t>(*v);
            if (id < 1 || id > seg.crowns.size()) throw DataError(name + ": label grid references unknown crown id");
            seg.crowns[id - 1].cells.push_back({r, col});
        }
    for (auto& c : seg.crowns) std::sort(c.cells.begin(), c.cells.end());
    return seg;
}

inline Segmentation read_segmentation(const std::string& table_path, const std::string& grid_path) {
    return parse_segmentation(text::read_file(table_path), geodata::read_ascii_grid(grid_path), table_path);
}

} // namespace forestinv::crowns
