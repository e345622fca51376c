#pragma once

#include <map>
#include <string>
#include <vector>

#include "forestinv/allometry/models.hpp"
#include "forestinv/crowns/itc.hpp"

namespace forestinv::allometry {

struct EnrichReport {
    std::size_t enriched = 0;
    std::size_t unlabeled = 0;
    std::size_t unknown_species = 0;
    std::size_t below_threshold = 0;
    std::map<int, std::string> borrowed; // crown_id -> species whose volume parameters were used
    std::vector<std::string> lines;
};

/// Fills dbh, agb and volume for every labelled crown.
inline EnrichReport enrich_crowns(std::vector<crowns::CrownRecord>& crowns, const SpeciesRegistry& registry,
                                  const DbhModel& dbh_model) {
    dbh_model.validate();
    EnrichReport rep;
    for (auto& c : crowns) {
        const auto id = std::to_string(c.crown_id);
        if (!c.species_code) {
            ++rep.unlabeled;
            rep.lines.push_back("crown " + id + ": no species label, skipped");
            continue;
        }
        auto res = registry.resolve(*c.species_code);
        if (!res) {
            ++rep.unknown_species;
            rep.lines.push_back("crown " + id + ": species " + *c.species_code + " has no usable parameters, skipped");
            continue;
        }
        const double dbh = estimate_dbh(c.tree_height, c.crown_diameter, dbh_model);
        const auto vol = volume_double_entry(dbh, c.tree_height, *res->parameters->volume);
        c.dbh = dbh;
        c.agb = agb_jucker(c.tree_height, c.crown_diameter, res->species->group);
        c.volume = vol.volume;
        ++rep.enriched;
        if (res->borrowed()) rep.borrowed[c.crown_id] = res->parameters->code;
        if (vol.below_threshold) {
            ++rep.below_threshold;
            rep.lines.push_back("crown " + id + ": dbh " + text::format_double(dbh) + " cm at or below d0, volume 0");
        }
    }
    return rep;
}

} // namespace forestinv::allometry
