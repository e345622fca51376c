#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forestinv/classify/model_io.hpp"
#include "forestinv/common/parallel.hpp"
#include "forestinv/crowns/itc.hpp"
#include "forestinv/geodata/ascii_grid.hpp"

namespace forestinv::classify {

using geodata::Grid;

/// Per-pixel class raster. Cell value k (1-based) means legend[k - 1]; nodata elsewhere.
struct LabelMap {
    Grid labels;
    std::vector<std::string> legend;

    std::optional<std::string> species_at(geodata::Cell c) const {
        auto v = labels.value(c);
        if (!v) return std::nullopt;
        const auto k = static_cast<std::size_t>(*v);
        if (k < 1 || k > legend.size()) throw DataError("label value " + std::to_string(*v) + " missing from legend");
        return legend[k - 1];
    }
};

/// Predicts every cube pixel whose mask cell is defined and nonzero (all pixels
/// without a mask). Nodata cube pixels stay nodata. Pixels are independent, so
/// the result does not depend on the thread count.
inline LabelMap classify_image(const HyperCube& cube, const Model& model, const Grid* mask = nullptr,
                               int threads = 1) {
    const auto& g = cube.geometry();
    if (mask && !(mask->geometry() == g)) throw DataError("mask grid does not match the cube geometry");
    const auto& bands = model_bands(model);
    for (int b : bands)
        if (b < 0 || b >= cube.nbands())
            throw DataError("model band " + std::to_string(b) + " outside the " + std::to_string(cube.nbands()) +
                            "-band cube");
    LabelMap out{Grid(g), model_species(model)};
    auto values = out.labels.values();
    parallel_for(static_cast<std::size_t>(g.nrows), threads, [&](std::size_t row) {
        for (int col = 0; col < g.ncols; ++col) {
            const std::size_t p = g.index({static_cast<int>(row), col});
            if (mask) {
                const double mv = mask->values()[p];
                if (mask->is_nodata_value(mv) || mv == 0.0) continue;
            }
            if (cube.pixel_is_nodata(p)) continue;
            Eigen::VectorXd f;
            if (bands.empty()) {
                const auto s = cube.spectrum(p);
                f = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
            } else {
                f = pixel_features(cube, p, bands);
            }
            values[p] = static_cast<double>(predict_index(model, f) + 1);
        }
    });
    return out;
}

inline std::string format_legend(const std::vector<std::string>& legend) {
    std::string out = "label,species_code\n";
    for (std::size_t k = 0; k < legend.size(); ++k) out += std::to_string(k + 1) + "," + legend[k] + "\n";
    return out;
}

inline std::vector<std::string> parse_legend(std::string_view buf, const std::string& name = "<memory>") {
    text::LineReader lines(buf);
    std::string_view line;
    if (!lines.next(line) || text::trim(line) != "label,species_code")
        throw ParseError(name, lines.line_number(), "expected header 'label,species_code'");
    std::vector<std::string> legend;
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(line, ',');
        auto k = f.size() == 2 ? text::parse_int<long long>(text::trim(f[0])) : std::nullopt;
        if (!k || *k != static_cast<long long>(legend.size() + 1))
            throw ParseError(name, lines.line_number(), "labels must be consecutive from 1");
        legend.emplace_back(text::trim(f[1]));
    }
    return legend;
}

inline void write_label_map(const LabelMap& m, const std::string& grid_path, const std::string& legend_path) {
    geodata::write_ascii_grid(m.labels, grid_path);
    text::write_file(legend_path, format_legend(m.legend));
}

inline LabelMap read_label_map(const std::string& grid_path, const std::string& legend_path) {
    return {geodata::read_ascii_grid(grid_path), parse_legend(text::read_file(legend_path), legend_path)};
}

struct MajorityResult {
    std::map<int, std::string> labels; // crown_id -> species
    std::vector<int> unlabeled;        // crowns with no classified pixel
    std::vector<std::string> report;
};

/// Most frequent pixel label inside each crown; ties go to the lexicographically
/// first species. Crown cells are mapped to label pixels by their centers.
inline MajorityResult label_crowns_majority(const LabelMap& map, const crowns::Segmentation& seg) {
    MajorityResult out;
    const auto& lg = map.labels.geometry();
    const auto& cg = seg.labels.geometry();
    for (const auto& crown : seg.crowns) {
        std::map<std::string, std::size_t> counts;
        for (const auto& cell : crown.cells) {
            auto pc = lg.cell_at(cg.center_x(cell.col), cg.center_y(cell.row));
            if (!pc) continue;
            if (auto sp = map.species_at(*pc)) ++counts[*sp];
        }
        if (counts.empty()) {
            out.unlabeled.push_back(crown.crown_id);
            out.report.push_back("crown " + std::to_string(crown.crown_id) + ": no classified pixels, species unset");
            continue;
        }
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it)
            if (it->second > best->second) best = it;
        out.labels[crown.crown_id] = best->first;
    }
    return out;
}

} // namespace forestinv::classify
