#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "config.hpp"
#include "forestinv/common/text.hpp"
#include "pipeline.hpp"
#include "synth.hpp"
#include "test_util.hpp"

using namespace forestinv;
using namespace forestinv::app;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(const std::string& dir) {
    auto cfg = parse_config("[run]\nout = out\n[paths]\ndtm = s/dtm.asc\npoints = s/points.csv\n"
                            "cube_header = s/cube.hdr\ncube_data = s/cube.bsq\nground_truth = s/gt.csv\n"
                            "plots = s/plots.csv\ntrees = s/trees.csv\n[synth]\nn_trees = 30\nn_plots = 2\n"
                            "bands = 20\n[spectral]\nk = 3\n",
                            dir);
    return cfg;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(FORESTINV_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, DefaultsAndOverrides) {
    const auto cfg = parse_config("[crowns]\nmax_search_win = 9\n[classify]\nmethod = centroid\n", "/tmp/base");
    EXPECT_EQ(cfg.itc.max_search_win, 9);
    EXPECT_EQ(cfg.classify.method, "centroid");
    EXPECT_EQ(cfg.spectral.k, 35);
    EXPECT_EQ(cfg.train_fraction, 0.65);
    EXPECT_EQ(cfg.out_dir, "/tmp/base/out");
    // the echo parses back to the same configuration
    const auto back = parse_config(echo_config(cfg), "/elsewhere");
    EXPECT_EQ(echo_config(back), echo_config(cfg));
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config("[nosuch]\nx = 1\n", "."), ConfigError);
    EXPECT_THROW(parse_config("[crowns]\nbogus = 1\n", "."), ConfigError);
    EXPECT_THROW(parse_config("[crowns]\nthresh_seed = abc\n", "."), ConfigError);
    EXPECT_THROW(parse_config("[classify]\nmethod = forest\n", "."), ConfigError);
    EXPECT_THROW(parse_config("[crowns]\nthresh_seed = 2\n", ".").validate(false), ConfigError);
    EXPECT_THROW(parse_config("[split]\ntrain_fraction = 1\n", ".").validate(false), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, MissingInputNamesThePath) {
    test::TempDir dir("cfg");
    const auto cfg = small_config(dir.path());
    try {
        cfg.validate(true);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("dtm"), std::string::npos) << e.what();
    }
}

TEST(Synth, NoiselessSignaturesAreExact) {
    test::TempDir dir("synth");
    auto cfg = small_config(dir.path());
    cfg.synth.noise = 0;
    cfg.synth.illum_min = cfg.synth.illum_max = 1.0;
    const auto scene = generate_scene(cfg);
    ASSERT_EQ(scene.trees.size(), 30u);
    for (const auto& t : scene.trees) {
        const auto cell = scene.cube.geometry().cell_at(t.x, t.y);
        ASSERT_TRUE(cell);
        const auto px = scene.cube.spectrum(scene.cube.geometry().index(*cell));
        EXPECT_EQ(px, scene.signatures.at(t.species)) << "tree " << t.id;
    }
}

TEST(Synth, PointDensityAndDeterminism) {
    test::TempDir dir("density");
    const auto cfg = small_config(dir.path());
    const auto a = generate_scene(cfg);
    const double area = a.width * a.height;
    EXPECT_NEAR(static_cast<double>(a.first_returns) / area, cfg.synth.density, 0.05 * cfg.synth.density);
    const auto b = generate_scene(cfg);
    EXPECT_EQ(format_tree_table(a.trees), format_tree_table(b.trees));
    EXPECT_EQ(a.cloud.points.size(), b.cloud.points.size());
    EXPECT_EQ(a.cube.band(3)[100], b.cube.band(3)[100]);
    auto other = cfg;
    other.seed += 1;
    EXPECT_NE(format_tree_table(generate_scene(other).trees), format_tree_table(a.trees));
    for (const auto& p : a.plots) EXPECT_TRUE(p.observed_volume && p.observed_agb);
}

TEST(Pipeline, StagesProduceOutputsAndManifest) {
    test::TempDir dir("pipe");
    const auto cfg = small_config(dir.path());
    write_scene(generate_scene(cfg), cfg);
    cfg.validate(true);
    const auto rec = run_stages(cfg, kAllStages, "run", "test");
    EXPECT_TRUE(rec.complete);
    for (const char* f : {files::kChm, files::kCrowns, files::kBands, files::kModel, files::kClassMap,
                          files::kInventory, files::kMetricsCsv, files::kPlotsCsv, files::kSummary, files::kManifest})
        EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / f)) << f;
    const auto manifest = text::read_file((fs::path(cfg.out_dir) / files::kManifest).string());
    EXPECT_NE(manifest.find(sha256_file(cfg.paths.dtm)), std::string::npos);
}

TEST(Pipeline, StageNames) {
    for (Stage s : kAllStages) EXPECT_EQ(parse_stage(stage_name(s)), s);
    EXPECT_FALSE(parse_stage("nosuch"));
}

TEST(Cli, ExitCodes) {
    test::TempDir dir("cli");
    EXPECT_EQ(cli("table6-check"), 0);
    EXPECT_EQ(cli("--bogus-flag run"), 2);
    EXPECT_EQ(cli("run"), 2);
    EXPECT_EQ(cli("run --config /nonexistent.ini"), 2);
    const auto ini = dir.file("c.ini");
    text::write_file(ini, "[paths]\ndtm = missing.asc\n");
    EXPECT_EQ(cli("run --config " + ini), 2);
    // inputs exist but are malformed
    for (const char* f : {"dtm.asc", "p.csv", "c.hdr", "c.bsq", "gt.csv", "pl.csv"}) text::write_file(dir.file(f), "junk\n");
    text::write_file(ini, "[paths]\ndtm = dtm.asc\npoints = p.csv\ncube_header = c.hdr\ncube_data = c.bsq\n"
                          "ground_truth = gt.csv\nplots = pl.csv\n");
    EXPECT_EQ(cli("run --config " + ini), 3);
}
