#include <gtest/gtest.h>

#include <cmath>

#include "forestinv/allometry.hpp"
#include "forestinv/common/random.hpp"

using namespace forestinv;
using namespace forestinv::allometry;

namespace {

// Log-space evaluators, written independently of the library formulas.
double agb_log_oracle(double h, double cd, bool gym) {
    const double a = gym ? 0.109 : 0.016, b = gym ? 1.790 : 2.013;
    return std::exp(std::log(a) + b * (std::log(h) + std::log(cd)) + 0.5 * 0.204 * 0.204);
}

double volume_log_oracle(double d, double h, const VolumeParams& p) {
    return std::exp(std::log(p.a) + p.b * std::log(d - p.d0) + p.c * std::log(h));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(Agb, GoldenValues) {
    EXPECT_LE(rel(agb_jucker(20, 5, FunctionalGroup::Gymnosperm), 423.11975010877234), 1e-6);
    EXPECT_LE(rel(agb_jucker(20, 5, FunctionalGroup::Angiosperm), 173.4430021683865), 1e-6);
}

TEST(Agb, MatchesLogSpaceEvaluator) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double h = rng.uniform(2, 50), cd = rng.uniform(0.5, 20);
        EXPECT_LE(rel(agb_jucker(h, cd, FunctionalGroup::Gymnosperm), agb_log_oracle(h, cd, true)), 1e-10);
        EXPECT_LE(rel(agb_jucker(h, cd, FunctionalGroup::Angiosperm), agb_log_oracle(h, cd, false)), 1e-10);
    }
}

TEST(Agb, MonotoneAndGroupCrossover) {
    for (auto g : {FunctionalGroup::Gymnosperm, FunctionalGroup::Angiosperm}) {
        double prev = 0;
        for (double h = 1; h <= 60; h += 1.0) {
            const double v = agb_jucker(h, 4, g);
            EXPECT_GT(v, prev);
            prev = v;
        }
        EXPECT_GT(agb_jucker(20, 6, g), agb_jucker(20, 5, g));
    }
    // 0.109 X^1.790 == 0.016 X^2.013 at X = (0.109 / 0.016)^(1 / 0.223)
    const double cross = std::pow(0.109 / 0.016, 1.0 / 0.223);
    const double below = cross * 0.9, above = cross * 1.1;
    EXPECT_GT(agb_jucker(below, 1, FunctionalGroup::Gymnosperm), agb_jucker(below, 1, FunctionalGroup::Angiosperm));
    EXPECT_LT(agb_jucker(above, 1, FunctionalGroup::Gymnosperm), agb_jucker(above, 1, FunctionalGroup::Angiosperm));
    EXPECT_LE(rel(agb_jucker(cross, 1, FunctionalGroup::Gymnosperm), agb_jucker(cross, 1, FunctionalGroup::Angiosperm)), 1e-9);
}

TEST(Agb, RejectsNonPositiveInputs) {
    EXPECT_THROW(agb_jucker(0, 5, FunctionalGroup::Angiosperm), DataError);
    EXPECT_THROW(agb_jucker(10, -1, FunctionalGroup::Angiosperm), DataError);
}

TEST(Volume, GoldenAndThreshold) {
    const auto reg = SpeciesRegistry::defaults();
    const auto piab = *reg.find("PIAB")->volume;
    EXPECT_LE(rel(volume_double_entry(30, 25, piab).volume, 0.869576292728049), 1e-6);
    const auto at = volume_double_entry(piab.d0, 25, piab);
    EXPECT_EQ(at.volume, 0.0);
    EXPECT_TRUE(at.below_threshold);
    EXPECT_TRUE(volume_double_entry(1.0, 25, piab).below_threshold);
    EXPECT_FALSE(volume_double_entry(piab.d0 + 1e-9, 25, piab).below_threshold);
    EXPECT_THROW(volume_double_entry(30, 0, piab), DataError);
}

TEST(Volume, MatchesLogSpaceEvaluatorForEverySpecies) {
    const auto reg = SpeciesRegistry::defaults();
    Rng rng(12);
    for (const auto& [code, info] : reg.entries()) {
        if (!info.volume) continue;
        for (int i = 0; i < 100; ++i) {
            const double d = rng.uniform(info.volume->d0 + 0.5, 90), h = rng.uniform(3, 45);
            EXPECT_LE(rel(volume_double_entry(d, h, *info.volume).volume, volume_log_oracle(d, h, *info.volume)), 1e-10)
                << code;
        }
    }
}

TEST(Volume, MonotoneInDiameterAndHeight) {
    const auto p = *SpeciesRegistry::defaults().find("FASY")->volume;
    double prev = 0;
    for (double d = 5; d <= 80; d += 2.5) {
        const double v = volume_double_entry(d, 20, p).volume;
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_GT(volume_double_entry(30, 26, p).volume, volume_double_entry(30, 25, p).volume);
}

TEST(Dbh, GoldenAndLogLinearity) {
    const DbhModel m;
    EXPECT_LE(rel(estimate_dbh(20, 5, m), 23.149209692799076), 1e-9);
    // doubling H*CD multiplies dbh by 2^b
    EXPECT_LE(rel(estimate_dbh(40, 5, m) / estimate_dbh(20, 5, m), std::pow(2.0, 0.809)), 1e-12);
    EXPECT_EQ(estimate_dbh(20, 5, m), estimate_dbh(5, 20, m));
    EXPECT_THROW(estimate_dbh(0, 5, m), DataError);
    EXPECT_THROW((DbhModel{0, 1, 0}.validate()), ConfigError);
}

TEST(Tariff, LinearCombination) {
    const TariffModel t{0.5, 2, 3, 4, 5, 0.1, 0.2, 0.3};
    EXPECT_DOUBLE_EQ(volume_tariff(0, t), 0.5);
    EXPECT_DOUBLE_EQ(volume_tariff(2, t), 0.5 + 4 + 0.6 + 0.16 + 0.3);
    EXPECT_THROW(volume_tariff(-1, t), DataError);
}

TEST(Registry, ResolveFallbackAndOverride) {
    auto reg = SpeciesRegistry::defaults();
    const auto piab = reg.resolve("PIAB");
    ASSERT_TRUE(piab);
    EXPECT_FALSE(piab->borrowed());
    EXPECT_EQ(piab->species->group, FunctionalGroup::Gymnosperm);
    const auto qupu = reg.resolve("QUPU");
    ASSERT_TRUE(qupu);
    EXPECT_TRUE(qupu->borrowed());
    EXPECT_EQ(qupu->parameters->code, "FASY");
    EXPECT_FALSE(reg.resolve("XXXX"));

    reg.apply_override("QUPU", "angiosperm 0.0001 2 1 5");
    EXPECT_FALSE(reg.resolve("QUPU")->borrowed());
    EXPECT_DOUBLE_EQ(reg.find("QUPU")->volume->d0, 5.0);
    reg.apply_override("NEW1", "conifer fallback=ABAL");
    EXPECT_EQ(reg.resolve("NEW1")->parameters->code, "ABAL");
    reg.apply_override("LOOP", "angiosperm fallback=LOOP");
    EXPECT_FALSE(reg.resolve("LOOP"));
    EXPECT_THROW(reg.apply_override("BAD1", "shrub 1 1 1 1"), ConfigError);
    EXPECT_THROW(reg.apply_override("BAD2", "angiosperm 1 1"), ConfigError);
    EXPECT_THROW(reg.apply_override("BAD3", "angiosperm -1 1 1 1"), ConfigError);
}

TEST(Enrich, FillsAttributesAndReports) {
    std::vector<crowns::CrownRecord> cs(4);
    for (int i = 0; i < 4; ++i) {
        cs[static_cast<std::size_t>(i)].crown_id = i + 1;
        cs[static_cast<std::size_t>(i)].tree_height = 20;
        cs[static_cast<std::size_t>(i)].crown_diameter = 5;
    }
    cs[0].species_code = "PIAB";
    cs[1].species_code = "QUPU";
    cs[2].species_code = "ZZZZ";
    const auto rep = enrich_crowns(cs, SpeciesRegistry::defaults(), DbhModel{});
    EXPECT_EQ(rep.enriched, 2u);
    EXPECT_EQ(rep.unknown_species, 1u);
    EXPECT_EQ(rep.unlabeled, 1u);
    EXPECT_EQ(rep.borrowed.at(2), "FASY");
    EXPECT_LE(rel(*cs[0].agb, 423.11975010877234), 1e-9);
    EXPECT_LE(rel(*cs[1].agb, 173.4430021683865), 1e-9);
    EXPECT_LE(rel(*cs[0].dbh, 23.149209692799076), 1e-9);
    const auto piab = *SpeciesRegistry::defaults().find("PIAB")->volume;
    EXPECT_DOUBLE_EQ(*cs[0].volume, volume_double_entry(*cs[0].dbh, 20, piab).volume);
    EXPECT_FALSE(cs[2].agb);
    EXPECT_FALSE(cs[3].dbh);

    // tiny tree falls below d0
    std::vector<crowns::CrownRecord> small(1);
    small[0].crown_id = 9;
    small[0].tree_height = 2;
    small[0].crown_diameter = 0.5;
    small[0].species_code = "FASY";
    const auto r2 = enrich_crowns(small, SpeciesRegistry::defaults(), DbhModel{});
    EXPECT_EQ(r2.below_threshold, 1u);
    EXPECT_EQ(*small[0].volume, 0.0);
}
