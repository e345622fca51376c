#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "config.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

namespace {

using namespace forestinv;
using namespace forestinv::app;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int table6_check() {
    std::vector<evaluate::PlotComparison> rows;
    for (std::size_t i = 0; i < evaluate::kReferenceVolumeObserved.size(); ++i) {
        evaluate::PlotComparison r;
        r.plot.id = std::to_string(i + 1);
        r.plot.observed_volume = evaluate::kReferenceVolumeObserved[i];
        r.plot.observed_agb = evaluate::kReferenceAgbObserved[i];
        r.predicted.volume_m3 = evaluate::kReferenceVolumePredicted[i];
        r.predicted.agb_mg = evaluate::kReferenceAgbPredicted[i];
        rows.push_back(r);
    }
    std::cout << evaluate::format_plot_table(rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Individual-tree forest inventory from LiDAR and hyperspectral data"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir, stage_arg;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "configuration file (INI)");
    app.add_option("--out", out_dir, "output directory (overrides [run] out)");
    app.add_option("--seed", seed, "random seed (overrides [run] seed)");
    app.add_option("--threads", threads, "worker threads (overrides [run] threads)")->check(CLI::PositiveNumber);

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene at the configured [paths]");
    std::vector<std::pair<CLI::App*, Stage>> stage_cmds;
    for (Stage s : kAllStages) {
        const char* help = "";
        switch (s) {
        case Stage::Chm: help = "pit-free canopy height model and terrain derivatives"; break;
        case Stage::Crowns: help = "treetop detection and crown delineation"; break;
        case Stage::SelectBands: help = "spectral preprocessing, crown labels and band selection"; break;
        case Stage::Train: help = "train the species classifier"; break;
        case Stage::Classify: help = "classify the image and label crowns by majority"; break;
        case Stage::Inventory: help = "per-tree DBH, volume and biomass"; break;
        case Stage::Evaluate: help = "accuracy metrics and plot comparison"; break;
        }
        stage_cmds.emplace_back(app.add_subcommand(stage_name(s), help), s);
    }
    auto* run = app.add_subcommand("run", "run the full pipeline");
    run->add_option("--stage", stage_arg, "stop after this stage");
    auto* t6 = app.add_subcommand("table6-check", "correlation of the published plot comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (t6->parsed()) return table6_check();
        if (config_path.empty()) throw ConfigError("--config is required");
        auto cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = std::filesystem::absolute(out_dir).lexically_normal().string();
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = cfg.chm.threads = cfg.itc.threads = *threads;

        if (synth->parsed()) {
            cfg.validate(false);
            const auto scene = generate_scene(cfg);
            write_scene(scene, cfg);
            std::cerr << "synth: " << scene.trees.size() << " trees, " << scene.cloud.points.size() << " points, "
                      << scene.plots.size() << " plots, min signature separation "
                      << text::format_fixed(scene.min_separation_sigma, 1) << " sigma\n";
            return 0;
        }
        if (run->parsed()) {
            cfg.validate(true);
            std::vector<Stage> stages;
            std::optional<Stage> stop;
            if (!stage_arg.empty()) {
                stop = parse_stage(stage_arg);
                if (!stop) throw ConfigError("unknown stage '" + stage_arg + "'");
            }
            for (Stage s : kAllStages) {
                stages.push_back(s);
                if (stop && s == *stop) break;
            }
            run_stages(cfg, stages, "run", std::filesystem::absolute(config_path).string());
            if (stages.back() == Stage::Evaluate) {
                const std::filesystem::path out(cfg.out_dir);
                std::cout << text::read_file((out / files::kMetricsTable).string()) << "\n"
                          << text::read_file((out / files::kPlotsTable).string());
            }
            return 0;
        }
        for (const auto& [cmd, s] : stage_cmds) {
            if (!cmd->parsed()) continue;
            cfg.validate(false);
            const Stage one[] = {s};
            run_stages(cfg, one, stage_name(s), std::filesystem::absolute(config_path).string());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
