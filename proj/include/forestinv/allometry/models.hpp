#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forestinv/common/error.hpp"
#include "forestinv/common/text.hpp"

namespace forestinv::allometry {

enum class FunctionalGroup { Gymnosperm, Angiosperm };

inline std::string to_string(FunctionalGroup g) { return g == FunctionalGroup::Gymnosperm ? "gymnosperm" : "angiosperm"; }

inline FunctionalGroup parse_group(std::string_view s) {
    const auto t = text::to_lower(text::trim(s));
    if (t == "gymnosperm" || t == "conifer") return FunctionalGroup::Gymnosperm;
    if (t == "angiosperm" || t == "broadleaf") return FunctionalGroup::Angiosperm;
    throw ConfigError("unknown functional group '" + std::string(s) + "'");
}

/// V = a (d - d0)^b h^c with d in cm, h in m, V in m^3.
struct VolumeParams {
    double a = 0, b = 0, c = 0, d0 = 0;

    void validate(const std::string& code) const {
        if (!(a > 0 && b > 0 && c > 0 && d0 >= 0))
            throw ConfigError("volume parameters for " + code + " need a, b, c > 0 and d0 >= 0");
    }
};

struct SpeciesInfo {
    std::string code;
    std::string common_name;
    std::string latin_name;
    FunctionalGroup group = FunctionalGroup::Angiosperm;
    std::optional<VolumeParams> volume;
    std::optional<std::string> fallback; // species whose volume parameters are borrowed
};

class SpeciesRegistry {
public:
    /// Taxa with published double-entry parameters plus the remaining surveyed
    /// species, which borrow from beech (broadleaves) or spruce (conifers).
    static SpeciesRegistry defaults() {
        using G = FunctionalGroup;
        SpeciesRegistry r;
        auto with = [&](std::string code, std::string common, std::string latin, G g, VolumeParams p) {
            r.set({std::move(code), std::move(common), std::move(latin), g, p, std::nullopt});
        };
        auto borrow = [&](std::string code, std::string common, std::string latin, G g, std::string fb) {
            r.set({std::move(code), std::move(common), std::move(latin), g, std::nullopt, std::move(fb)});
        };
        with("PIAB", "Norway spruce", "Picea abies", G::Gymnosperm, {0.000177, 1.564254, 1.051565, 3.694650});
        with("ABAL", "Silver fir", "Abies alba", G::Gymnosperm, {0.000163, 1.706560, 0.941905, 3.694650});
        with("LADE", "Larch", "Larix decidua", G::Gymnosperm, {0.000108, 1.407756, 1.341377, 3.694650});
        with("FASY", "Beech", "Fagus sylvatica", G::Angiosperm, {0.000055, 1.942089, 1.006420, 4.009100});
        with("PISY", "Scots pine", "Pinus sylvestris", G::Gymnosperm, {0.000102, 1.918184, 0.830164, 3.694650});
        with("PICE", "Swiss stone pine", "Pinus cembra", G::Gymnosperm, {0.000188, 1.613713, 0.985266, 3.694650});
        with("PINI", "Black pine", "Pinus nigra", G::Gymnosperm, {0.000129, 1.763086, 0.938445, 3.694650});
        borrow("QUPU", "Downy oak", "Quercus pubescens", G::Angiosperm, "FASY");
        borrow("OSCA", "Hop-hornbeam", "Ostrya carpinifolia", G::Angiosperm, "FASY");
        borrow("FROR", "Manna ash", "Fraxinus ornus", G::Angiosperm, "FASY");
        borrow("FREX", "European ash", "Fraxinus excelsior", G::Angiosperm, "FASY");
        borrow("ACPS", "Sycamore", "Acer pseudoplatanus", G::Angiosperm, "FASY");
        borrow("BEPE", "Birch", "Betula pendula", G::Angiosperm, "FASY");
        borrow("QUCE", "Turkey oak", "Quercus cerris", G::Angiosperm, "FASY");
        borrow("CONI", "Other conifers", "", G::Gymnosperm, "PIAB");
        borrow("BROA", "Other broadleaves", "", G::Angiosperm, "FASY");
        return r;
    }

    void set(SpeciesInfo info) {
        if (info.code.empty()) throw ConfigError("species code must be nonempty");
        if (info.volume) info.volume->validate(info.code);
        if (!info.volume && !info.fallback)
            throw ConfigError("species " + info.code + " needs volume parameters or a fallback");
        const auto code = info.code;
        entries_[code] = std::move(info);
    }

    const SpeciesInfo* find(const std::string& code) const {
        auto it = entries_.find(code);
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, SpeciesInfo>& entries() const { return entries_; }

    struct Resolved {
        const SpeciesInfo* species = nullptr;   // the requested species
        const SpeciesInfo* parameters = nullptr; // where the volume parameters came from
        bool borrowed() const { return species != parameters; }
    };

    /// Follows fallbacks until an entry with volume parameters is found.
    std::optional<Resolved> resolve(const std::string& code) const {
        const SpeciesInfo* s = find(code);
        if (!s) return std::nullopt;
        const SpeciesInfo* p = s;
        std::set<std::string> seen{code};
        while (!p->volume) {
            const SpeciesInfo* next = find(*p->fallback);
            if (!next || !seen.insert(next->code).second) return std::nullopt;
            p = next;
        }
        return Resolved{s, p};
    }

    /// Registry override of the form "group a b c d0" or "group fallback=CODE".
    void apply_override(const std::string& code, std::string_view value) {
        auto tok = text::split_ws(value);
        if (tok.empty()) throw ConfigError("empty registry entry for " + code);
        SpeciesInfo info;
        if (const auto* old = find(code)) info = *old;
        info.code = code;
        info.group = parse_group(tok[0]);
        if (tok.size() == 2 && tok[1].starts_with("fallback=")) {
            info.volume.reset();
            info.fallback = std::string(tok[1].substr(9));
        } else if (tok.size() == 5) {
            double v[4];
            for (int i = 0; i < 4; ++i) {
                auto d = text::parse_double(tok[static_cast<std::size_t>(i) + 1]);
                if (!d) throw ConfigError("non-numeric registry parameter for " + code);
                v[i] = *d;
            }
            info.volume = VolumeParams{v[0], v[1], v[2], v[3]};
            info.fallback.reset();
        } else {
            throw ConfigError("registry entry for " + code + " must be 'group a b c d0' or 'group fallback=CODE'");
        }
        set(std::move(info));
    }

private:
    std::map<std::string, SpeciesInfo> entries_;
};

/// DBH (cm) = a (H CD)^b exp(sigma^2 / 2), H and CD in m.
struct DbhModel {
    double coeff_a = 0.557;
    double coeff_b = 0.809;
    double sigma = 0.056;

    void validate() const {
        if (!(coeff_a > 0 && coeff_b > 0 && sigma >= 0)) throw ConfigError("DBH model needs a, b > 0 and sigma >= 0");
    }
};

inline double estimate_dbh(double height, double crown_diameter, const DbhModel& m) {
    if (!(height > 0) || !(crown_diameter > 0)) throw DataError("DBH estimate needs positive height and crown diameter");
    return m.coeff_a * std::pow(height * crown_diameter, m.coeff_b) * std::exp(m.sigma * m.sigma / 2.0);
}

/// Above-ground biomass in kg from height and crown diameter (m).
inline double agb_jucker(double height, double crown_diameter, FunctionalGroup group) {
    if (!(height > 0) || !(crown_diameter > 0)) throw DataError("AGB estimate needs positive height and crown diameter");
    const bool gym = group == FunctionalGroup::Gymnosperm;
    const double alpha = gym ? 0.093 : 0.0;
    const double beta = gym ? -0.223 : 0.0;
    return (0.016 + alpha) * std::pow(height * crown_diameter, 2.013 + beta) * std::exp(0.204 * 0.204 / 2.0);
}

struct VolumeResult {
    double volume = 0.0;           // m^3
    bool below_threshold = false;  // dbh <= d0
};

inline VolumeResult volume_double_entry(double dbh, double height, const VolumeParams& p) {
    if (!(height > 0)) throw DataError("volume needs a positive height");
    if (!(dbh > p.d0)) return {0.0, true};
    return {p.a * std::pow(dbh - p.d0, p.b) * std::pow(height, p.c), false};
}

/// Regional tariff: V = b0 + b1 G + b2 G Ps + b3 G Ps It + b4 G Ps Bd.
struct TariffModel {
    double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0;
    double Ps = 0, It = 0, Bd = 0;
};

inline double volume_tariff(double basal_area, const TariffModel& m) {
    if (basal_area < 0) throw DataError("basal area must be >= 0");
    const double g = basal_area;
    return m.b0 + m.b1 * g + m.b2 * g * m.Ps + m.b3 * g * m.Ps * m.It + m.b4 * g * m.Ps * m.Bd;
}

} // namespace forestinv::allometry
