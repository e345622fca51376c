#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forestinv/allometry.hpp"
#include "forestinv/chm.hpp"
#include "forestinv/crowns.hpp"
#include "forestinv/spectral.hpp"

namespace forestinv::app {

struct Paths {
    std::string dtm;
    std::string points;
    std::string cube_header;
    std::string cube_data;
    std::string ground_truth;
    std::string plots;
    std::string trees; // generator truth table, written by synth only
};

struct SpectralConfig {
    int drop_head = 7;
    int drop_tail = 8;
    std::vector<int> exclude; // indices into the trimmed cube
    int k = 35;
    spectral::Aggregation aggregation = spectral::Aggregation::Mean;
};

struct ClassifyConfig {
    std::string method = "svm"; // svm | centroid
    double C = 10.0;
    double gamma = 0.0;         // 0: 1 / number of selected bands
    double tolerance = 1e-3;
    std::size_t max_pixels_per_class = 1000;
    double mask_min_height = 2.0;
    bool pixel_level = false;
};

struct SynthConfig {
    int n_trees = 200;
    std::vector<std::string> species{"ABAL", "FASY", "LADE", "PIAB", "PISY"};
    double spacing = 13.0;
    double jitter = 1.0;
    double height_min = 15.0;
    double height_max = 30.0;
    double radius_min = 3.5;
    double radius_max = 5.5;
    double density = 10.0;          // first returns per m^2
    double ground_fraction = 0.3;   // extra ground returns under canopy, per first return
    double dtm_cellsize = 1.0;
    std::string terrain = "hills";  // hills | plane | flat
    double base_elevation = 1000.0;
    double cube_cellsize = 0.5;
    int bands = 60;
    double noise = 0.004;
    double illum_min = 0.8;
    double illum_max = 1.2;
    int n_plots = 10;
    double plot_radius = 15.0;
    double gt_jitter = 0.5;
    double origin_x = 664000.0;
    double origin_y = 5102000.0;
    double margin = 10.0;
};

struct PipelineConfig {
    std::string config_dir;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    int threads = 1;
    Paths paths;
    double terrain_class_width = 100.0;
    chm::PitfreeParams chm;
    crowns::ItcParams itc;
    bool smooth_chm = false;
    SpectralConfig spectral;
    ClassifyConfig classify;
    double train_fraction = 0.65;
    allometry::DbhModel dbh;
    allometry::SpeciesRegistry registry = allometry::SpeciesRegistry::defaults();
    std::vector<std::pair<std::string, std::string>> registry_overrides;
    double plot_radius = 15.0;
    double dbh_min = 7.5;
    SynthConfig synth;

    /// Checks numeric invariants. With `require_inputs`, every input path must be set and exist.
    void validate(bool require_inputs) const;
};

/// Parses INI text. Relative paths resolve against `config_dir`. Unknown
/// sections or keys are rejected.
PipelineConfig parse_config(const std::string& ini_text, const std::string& config_dir);

PipelineConfig load_config(const std::string& path);

/// Canonical INI rendering of the effective configuration.
std::string echo_config(const PipelineConfig& cfg);

} // namespace forestinv::app
