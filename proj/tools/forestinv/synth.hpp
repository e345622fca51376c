#pragma once

#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "forestinv/evaluate.hpp"
#include "forestinv/geodata.hpp"

namespace forestinv::app {

struct SynthTree {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double height = 0.0;  // m
    double radius = 0.0;  // crown radius, m
    std::string species;
    double dbh = 0.0;     // cm, from the allometry of true height and 2 * radius
    double volume = 0.0;  // m^3
    double agb = 0.0;     // kg
};

struct SynthScene {
    double x0 = 0.0, y0 = 0.0, width = 0.0, height = 0.0;
    std::vector<SynthTree> trees;
    geodata::Grid dtm;
    geodata::PointCloud cloud;
    geodata::HyperCube cube;
    std::vector<geodata::GroundTruthPoint> ground_truth;
    std::vector<evaluate::PlotDefinition> plots; // observed values = generator truth
    std::map<std::string, std::vector<double>> signatures;
    std::vector<double> background;
    double min_separation_sigma = 0.0; // smallest pairwise max-band gap of normalized signatures, in noise units
    std::size_t first_returns = 0;
};

/// Crown surface of a tree at distance r from its stem: H (1 - 0.4 (r/R)^2) inside R.
double crown_surface(const SynthTree& t, double x, double y);

double terrain_elevation(const SynthConfig& s, double dx, double dy);

SynthScene generate_scene(const PipelineConfig& cfg);

/// Writes every scene file to the locations named in cfg.paths.
void write_scene(const SynthScene& scene, const PipelineConfig& cfg);

std::string format_tree_table(const std::vector<SynthTree>& trees);

} // namespace forestinv::app
