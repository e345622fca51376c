#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "forestinv/common/random.hpp"
#include "forestinv/crowns/itc.hpp"
#include "forestinv/geodata/ground_truth.hpp"

namespace forestinv::crowns {

struct JoinResult {
    std::map<int, std::string> labels;          // crown_id -> species
    std::map<int, std::size_t> label_source;    // crown_id -> index of the deciding point
    std::vector<std::size_t> unmatched;         // points outside every crown
    std::vector<int> conflicts;                 // crowns holding more than one species
};

/// Assigns field points to the crown containing their cell. A crown holding
/// points of different species takes the species of the point nearest its apex.
inline JoinResult spatial_join(const std::vector<geodata::GroundTruthPoint>& points, const Segmentation& seg) {
    JoinResult out;
    std::map<int, std::vector<std::size_t>> by_crown;
    const auto& g = seg.labels.geometry();
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto cell = g.cell_at(points[i].x, points[i].y);
        std::optional<int> id = cell ? seg.crown_at(*cell) : std::nullopt;
        if (!id) {
            out.unmatched.push_back(i);
            continue;
        }
        by_crown[*id].push_back(i);
    }
    for (const auto& [id, idx] : by_crown) {
        const CrownRecord* crown = seg.find(id);
        bool mixed = false;
        for (auto i : idx) mixed = mixed || points[i].species_code != points[idx.front()].species_code;
        std::size_t pick = idx.front();
        if (mixed) {
            out.conflicts.push_back(id);
            double best = std::numeric_limits<double>::infinity();
            for (auto i : idx) {
                const double dx = points[i].x - crown->apex_x, dy = points[i].y - crown->apex_y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) best = d2, pick = i;
            }
        }
        out.labels[id] = points[pick].species_code;
        out.label_source[id] = pick;
    }
    return out;
}

struct TrainTestSplit {
    std::vector<int> train;                    // crown ids, ascending
    std::vector<int> test;                     // crown ids, ascending
    std::vector<std::string> singleton_species; // species with a single crown (sent to train)
};

/// Per species: floor(n * fraction) crowns (at least 1 when n >= 2) go to
/// training, the rest to test. Species are visited in lexicographic order and
/// shuffled with one generator seeded once, so the split is reproducible.
inline TrainTestSplit split_train_test(const std::map<int, std::string>& labels, double train_fraction,
                                       std::uint64_t seed) {
    if (!(train_fraction > 0 && train_fraction < 1)) throw DataError("train fraction must lie in (0, 1)");
    std::map<std::string, std::vector<int>> by_species;
    for (const auto& [id, sp] : labels) by_species[sp].push_back(id);

    Rng rng(seed);
    TrainTestSplit out;
    for (auto& [sp, ids] : by_species) {
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);
        const std::size_t n = ids.size();
        std::size_t n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
        if (n >= 2) n_train = std::max<std::size_t>(n_train, 1);
        if (n == 1) {
            n_train = 1;
            out.singleton_species.push_back(sp);
        }
        out.train.insert(out.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

} // namespace forestinv::crowns
