#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"

namespace forestinv::app {

enum class Stage { Chm, Crowns, SelectBands, Train, Classify, Inventory, Evaluate };

inline constexpr Stage kAllStages[] = {Stage::Chm,      Stage::Crowns,    Stage::SelectBands, Stage::Train,
                                       Stage::Classify, Stage::Inventory, Stage::Evaluate};

std::string stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

/// Output file names inside the run directory.
namespace files {
inline constexpr const char* kChm = "chm.asc";
inline constexpr const char* kSlope = "slope.asc";
inline constexpr const char* kAspect = "aspect.asc";
inline constexpr const char* kElevationClass = "elevation_class.asc";
inline constexpr const char* kCrowns = "crowns.csv";
inline constexpr const char* kCrownLabels = "crown_labels.asc";
inline constexpr const char* kCubeHeader = "cube_normalized.hdr";
inline constexpr const char* kCubeData = "cube_normalized.bsq";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kJoinReport = "join_report.txt";
inline constexpr const char* kClassStats = "class_stats.txt";
inline constexpr const char* kBands = "bands.txt";
inline constexpr const char* kModel = "model.txt";
inline constexpr const char* kTrainingReport = "training_report.txt";
inline constexpr const char* kClassMap = "class_map.asc";
inline constexpr const char* kLegend = "class_legend.csv";
inline constexpr const char* kCrownsLabeled = "crowns_labeled.csv";
inline constexpr const char* kMajorityReport = "majority_report.txt";
inline constexpr const char* kInventory = "inventory.csv";
inline constexpr const char* kInventoryReport = "inventory_report.txt";
inline constexpr const char* kConfusion = "confusion.csv";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kMetricsTable = "metrics.txt";
inline constexpr const char* kPlotsCsv = "plots.csv";
inline constexpr const char* kPlotsTable = "plots.txt";
inline constexpr const char* kSummary = "summary.csv";
inline constexpr const char* kManifest = "manifest.json";
} // namespace files

/// Runs one stage, reading its inputs from the configured paths and earlier
/// stage outputs in cfg.out_dir.
void run_stage(const PipelineConfig& cfg, Stage stage);

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    bool ok = false;
};

struct RunRecord {
    std::string command;
    std::string config_path;
    std::vector<StageRecord> stages;
    bool complete = false;
    std::string error;
};

/// Runs the stages in order and writes manifest.json (also on failure, marking
/// the run incomplete). Errors propagate after the manifest is written.
RunRecord run_stages(const PipelineConfig& cfg, std::span<const Stage> stages, const std::string& command,
                     const std::string& config_path);

/// Hex SHA-256 of a file's content.
std::string sha256_file(const std::string& path);

std::string format_manifest(const PipelineConfig& cfg, const RunRecord& run);

} // namespace forestinv::app
