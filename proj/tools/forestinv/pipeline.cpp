#include "pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "forestinv/allometry.hpp"
#include "forestinv/chm.hpp"
#include "forestinv/classify.hpp"
#include "forestinv/crowns.hpp"
#include "forestinv/evaluate.hpp"
#include "forestinv/geodata.hpp"
#include "forestinv/spectral.hpp"
#include "json.hpp"

namespace forestinv::app {

namespace fs = std::filesystem;

std::string stage_name(Stage s) {
    switch (s) {
    case Stage::Chm: return "chm";
    case Stage::Crowns: return "crowns";
    case Stage::SelectBands: return "select-bands";
    case Stage::Train: return "train";
    case Stage::Classify: return "classify";
    case Stage::Inventory: return "inventory";
    case Stage::Evaluate: return "evaluate";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
    for (Stage s : kAllStages)
        if (stage_name(s) == name) return s;
    return std::nullopt;
}

namespace {

std::string out_path(const PipelineConfig& cfg, const char* name) { return (fs::path(cfg.out_dir) / name).string(); }

void require_input(const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError("[paths] " + key + " is not set");
    if (!fs::exists(path)) throw ConfigError("[paths] " + key + ": file not found: " + path);
}

void check_inputs(const PipelineConfig& cfg, Stage s) {
    switch (s) {
    case Stage::Chm:
        require_input("dtm", cfg.paths.dtm);
        require_input("points", cfg.paths.points);
        break;
    case Stage::SelectBands:
        require_input("cube_header", cfg.paths.cube_header);
        require_input("cube_data", cfg.paths.cube_data);
        require_input("ground_truth", cfg.paths.ground_truth);
        break;
    case Stage::Evaluate: require_input("plots", cfg.paths.plots); break;
    default: break;
    }
}

std::uint64_t sampling_seed(const PipelineConfig& cfg) { return cfg.seed ^ 0x9E3779B97F4A7C15ull; }

// crown_id,species_code,role
struct CrownLabel {
    std::string species;
    geodata::SampleRole role = geodata::SampleRole::Unassigned;
};

std::string format_labels(const std::map<int, CrownLabel>& labels) {
    std::string out = "crown_id,species_code,role\n";
    for (const auto& [id, l] : labels) out += std::to_string(id) + "," + l.species + "," + geodata::to_string(l.role) + "\n";
    return out;
}

std::map<int, CrownLabel> read_labels(const std::string& path) {
    const auto buf = text::read_file(path);
    text::LineReader lines(buf);
    std::string_view line;
    if (!lines.next(line) || text::trim(line) != "crown_id,species_code,role")
        throw ParseError(path, 1, "expected header 'crown_id,species_code,role'");
    std::map<int, CrownLabel> out;
    while (lines.next(line)) {
        if (text::trim(line).empty()) continue;
        auto f = text::split(line, ',');
        auto id = f.size() == 3 ? text::parse_int<int>(text::trim(f[0])) : std::nullopt;
        if (!id) throw ParseError(path, lines.line_number(), "malformed label row");
        const auto role = text::trim(f[2]);
        CrownLabel l{std::string(text::trim(f[1])), geodata::SampleRole::Unassigned};
        if (role == "train") l.role = geodata::SampleRole::Train;
        else if (role == "test") l.role = geodata::SampleRole::Test;
        else throw ParseError(path, lines.line_number(), "role must be train or test");
        out[*id] = l;
    }
    return out;
}

std::map<int, std::string> with_role(const std::map<int, CrownLabel>& labels, geodata::SampleRole role) {
    std::map<int, std::string> out;
    for (const auto& [id, l] : labels)
        if (l.role == role) out[id] = l.species;
    return out;
}

std::vector<int> keys(const std::map<int, std::string>& m) {
    std::vector<int> out;
    for (const auto& [k, v] : m) out.push_back(k);
    return out;
}

std::string lines_to_text(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

geodata::HyperCube read_normalized_cube(const PipelineConfig& cfg) {
    return geodata::read_envi_cube(out_path(cfg, files::kCubeHeader), out_path(cfg, files::kCubeData));
}

crowns::Segmentation read_crowns(const PipelineConfig& cfg, const char* table) {
    return crowns::read_segmentation(out_path(cfg, table), out_path(cfg, files::kCrownLabels));
}

void stage_chm(const PipelineConfig& cfg) {
    const auto dtm = geodata::read_ascii_grid(cfg.paths.dtm);
    const auto cloud = geodata::read_point_cloud(cfg.paths.points);
    const auto normalized = chm::normalize_heights(cloud, dtm);
    const auto grid = chm::pitfree_chm(normalized, cfg.chm);
    geodata::write_ascii_grid(grid, out_path(cfg, files::kChm));
    const auto terrain = geodata::terrain_derivatives(dtm, cfg.terrain_class_width);
    geodata::write_ascii_grid(terrain.slope, out_path(cfg, files::kSlope));
    geodata::write_ascii_grid(terrain.aspect, out_path(cfg, files::kAspect));
    geodata::write_ascii_grid(terrain.elevation_class, out_path(cfg, files::kElevationClass));
}

void stage_crowns(const PipelineConfig& cfg) {
    auto chm_grid = geodata::read_ascii_grid(out_path(cfg, files::kChm));
    if (cfg.smooth_chm) chm_grid = crowns::mean_filter_3x3(chm_grid);
    const auto tops = crowns::detect_treetops(chm_grid, cfg.itc);
    const auto seg = crowns::grow_crowns(chm_grid, tops, cfg.itc);
    crowns::write_segmentation(seg, out_path(cfg, files::kCrowns), out_path(cfg, files::kCrownLabels));
}

void stage_select_bands(const PipelineConfig& cfg) {
    {
        const auto raw = geodata::read_envi_cube(cfg.paths.cube_header, cfg.paths.cube_data);
        const auto trimmed = spectral::trim_bands(raw, cfg.spectral.drop_head, cfg.spectral.drop_tail);
        const auto norm = spectral::normalize_spectrum(trimmed);
        geodata::write_envi_cube(norm.cube, out_path(cfg, files::kCubeHeader), out_path(cfg, files::kCubeData));
        if (norm.zero_mean_pixels > 0)
            std::cerr << "select-bands: " << norm.zero_mean_pixels << " zero-mean pixels set to nodata\n";
    }
    // downstream stages see exactly the stored (single precision) cube
    const auto cube = read_normalized_cube(cfg);
    const auto seg = read_crowns(cfg, files::kCrowns);
    const auto gt = geodata::read_ground_truth(cfg.paths.ground_truth);
    const auto join = crowns::spatial_join(gt, seg);

    std::map<int, CrownLabel> labels;
    std::map<int, std::string> unassigned;
    for (const auto& [id, species] : join.labels) {
        const auto role = gt[join.label_source.at(id)].role;
        if (role == geodata::SampleRole::Unassigned) unassigned[id] = species;
        else labels[id] = {species, role};
    }
    const auto split = crowns::split_train_test(unassigned, cfg.train_fraction, cfg.seed);
    for (int id : split.train) labels[id] = {unassigned[id], geodata::SampleRole::Train};
    for (int id : split.test) labels[id] = {unassigned[id], geodata::SampleRole::Test};
    text::write_file(out_path(cfg, files::kLabels), format_labels(labels));

    std::string rep = "points: " + std::to_string(gt.size()) + "\nlabelled crowns: " + std::to_string(join.labels.size()) +
                      "\nunmatched points: " + std::to_string(join.unmatched.size()) + "\n";
    for (auto i : join.unmatched)
        rep += "  unmatched point " + std::to_string(i + 1) + " (" + gt[i].species_code + ")\n";
    rep += "conflicting crowns: " + std::to_string(join.conflicts.size()) + "\n";
    for (int id : join.conflicts) rep += "  crown " + std::to_string(id) + " -> " + join.labels.at(id) + "\n";
    for (const auto& s : split.singleton_species) rep += "species " + s + " has a single crown; kept for training\n";
    text::write_file(out_path(cfg, files::kJoinReport), rep);

    const auto train = with_role(labels, geodata::SampleRole::Train);
    const auto pixels = spectral::collect_crown_pixels(cube, seg, train, keys(train));
    const auto stats = spectral::class_statistics(cube, pixels);
    const auto selection = spectral::sffs_select(stats.stats, cfg.spectral.k,
                                                 {cfg.spectral.aggregation, cfg.spectral.exclude});
    text::write_file(out_path(cfg, files::kBands), spectral::format_band_selection(selection));
    text::write_file(out_path(cfg, files::kClassStats),
                     lines_to_text(stats.warnings) + spectral::format_statistics_report(stats.stats));
}

void stage_train(const PipelineConfig& cfg) {
    const auto cube = read_normalized_cube(cfg);
    const auto seg = read_crowns(cfg, files::kCrowns);
    const auto train = with_role(read_labels(out_path(cfg, files::kLabels)), geodata::SampleRole::Train);
    const auto sel = spectral::parse_band_selection(text::read_file(out_path(cfg, files::kBands)),
                                                    out_path(cfg, files::kBands));
    const auto pixels = spectral::collect_crown_pixels(cube, seg, train, keys(train));
    const auto samples = classify::gather_samples(cube, pixels, sel.indices, cfg.classify.max_pixels_per_class,
                                                  sampling_seed(cfg));
    std::string rep = "training samples: " + std::to_string(samples.size()) + "\n";
    for (const auto& [sp, pix] : pixels) rep += "  " + sp + ": " + std::to_string(pix.size()) + " crown pixels\n";
    classify::Model model;
    if (cfg.classify.method == "centroid") {
        model = classify::train_centroid(samples, sel.indices);
    } else {
        classify::SvmParams params;
        params.C = cfg.classify.C;
        params.gamma = cfg.classify.gamma;
        params.eps = cfg.classify.tolerance;
        params.threads = cfg.threads;
        auto res = classify::train_svm(samples, params, sel.indices);
        for (std::size_t p = 0; p < res.model.pairs.size(); ++p) {
            const auto& pair = res.model.pairs[p];
            const auto& d = res.report.diagnostics[p];
            rep += "pair " + res.model.species[pair.positive] + "/" + res.model.species[pair.negative] +
                   ": iterations=" + std::to_string(d.iterations) + " support=" + std::to_string(pair.svm.coef.size()) +
                   " dual=" + text::format_double(d.dual_objective) + " primal=" + text::format_double(d.primal_objective) +
                   " gap=" + text::format_double(d.duality_gap) + " kkt=" + text::format_double(d.max_kkt_violation) + "\n";
        }
        rep += lines_to_text(res.report.warnings);
        model = std::move(res.model);
    }
    classify::save_model(model, out_path(cfg, files::kModel));
    text::write_file(out_path(cfg, files::kTrainingReport), rep);
}

/// 1 where the nearest CHM cell reaches the height threshold, 0 below, nodata off the CHM.
geodata::Grid canopy_mask(const geodata::Grid& chm_grid, const geodata::GridGeometry& target, double min_height) {
    geodata::Grid mask(target);
    const auto& cg = chm_grid.geometry();
    for (std::size_t p = 0; p < target.size(); ++p) {
        const auto cell = target.cell(p);
        auto src = cg.cell_at(target.center_x(cell.col), target.center_y(cell.row));
        if (!src) continue;
        auto v = chm_grid.value(*src);
        if (!v) continue;
        mask.values()[p] = *v >= min_height ? 1.0 : 0.0;
    }
    return mask;
}

void stage_classify(const PipelineConfig& cfg) {
    const auto cube = read_normalized_cube(cfg);
    const auto model = classify::load_model(out_path(cfg, files::kModel));
    const auto chm_grid = geodata::read_ascii_grid(out_path(cfg, files::kChm));
    const auto mask = canopy_mask(chm_grid, cube.geometry(), cfg.classify.mask_min_height);
    const auto map = classify::classify_image(cube, model, &mask, cfg.threads);
    classify::write_label_map(map, out_path(cfg, files::kClassMap), out_path(cfg, files::kLegend));
    auto seg = read_crowns(cfg, files::kCrowns);
    const auto majority = classify::label_crowns_majority(map, seg);
    for (auto& c : seg.crowns) {
        auto it = majority.labels.find(c.crown_id);
        c.species_code = it == majority.labels.end() ? std::nullopt : std::optional<std::string>(it->second);
    }
    text::write_file(out_path(cfg, files::kCrownsLabeled), crowns::format_crown_table(seg.crowns));
    text::write_file(out_path(cfg, files::kMajorityReport),
                     "labelled crowns: " + std::to_string(majority.labels.size()) + "\n" + lines_to_text(majority.report));
}

void stage_inventory(const PipelineConfig& cfg) {
    auto seg = read_crowns(cfg, files::kCrownsLabeled);
    const auto rep = allometry::enrich_crowns(seg.crowns, cfg.registry, cfg.dbh);
    text::write_file(out_path(cfg, files::kInventory), crowns::format_crown_table(seg.crowns));
    std::string out = "enriched: " + std::to_string(rep.enriched) + "\nunlabelled: " + std::to_string(rep.unlabeled) +
                      "\nunknown species: " + std::to_string(rep.unknown_species) +
                      "\nbelow d0: " + std::to_string(rep.below_threshold) + "\n";
    for (const auto& [id, code] : rep.borrowed)
        out += "crown " + std::to_string(id) + ": volume parameters borrowed from " + code + "\n";
    text::write_file(out_path(cfg, files::kInventoryReport), out + lines_to_text(rep.lines));
}

std::string format_confusion(const evaluate::ConfusionMatrix& cm) {
    std::string out = "true\\predicted";
    for (const auto& s : cm.species) out += "," + s;
    out += "\n";
    for (std::size_t i = 0; i < cm.species.size(); ++i) {
        out += cm.species[i];
        for (auto v : cm.counts[i]) out += "," + std::to_string(v);
        out += "\n";
    }
    return out;
}

void stage_evaluate(const PipelineConfig& cfg) {
    const auto seg = read_crowns(cfg, files::kInventory);
    const auto labels = read_labels(out_path(cfg, files::kLabels));
    const auto test = with_role(labels, geodata::SampleRole::Test);

    std::vector<evaluate::ScoredItem> items;
    for (const auto& [id, species] : test) {
        const auto* crown = seg.find(id);
        items.push_back({species, crown ? crown->species_code : std::nullopt});
    }
    const auto scored = evaluate::score(items);
    const std::string name = cfg.classify.method == "svm" ? "SVM" : "Centroid";
    std::vector<std::pair<std::string, std::vector<evaluate::ClassMetrics>>> runs{
        {name, evaluate::per_class_metrics(scored.matrix)}};
    if (cfg.classify.pixel_level) {
        const auto map = classify::read_label_map(out_path(cfg, files::kClassMap), out_path(cfg, files::kLegend));
        const auto px = evaluate::score(evaluate::pixel_items(map, seg, test, keys(test)));
        runs.emplace_back(name + " pixels", evaluate::per_class_metrics(px.matrix));
    }
    text::write_file(out_path(cfg, files::kConfusion), format_confusion(scored.matrix));
    text::write_file(out_path(cfg, files::kMetricsCsv), evaluate::format_metrics_csv(runs));
    text::write_file(out_path(cfg, files::kMetricsTable), evaluate::format_metrics_table(runs));

    evaluate::PlotDefinition defaults;
    defaults.radius = cfg.plot_radius;
    defaults.dbh_min = cfg.dbh_min;
    std::vector<evaluate::PlotComparison> rows;
    for (auto& p : evaluate::read_plots(cfg.paths.plots, defaults))
        rows.push_back({p, evaluate::aggregate_plot(seg.crowns, p)});
    text::write_file(out_path(cfg, files::kPlotsCsv), evaluate::format_plot_csv(rows));
    text::write_file(out_path(cfg, files::kPlotsTable), evaluate::format_plot_table(rows));

    const auto corr = evaluate::correlate(rows);
    double ov = 0, pv = 0, oa = 0, pa = 0;
    for (const auto& r : rows) {
        ov += r.plot.observed_volume.value_or(0.0);
        oa += r.plot.observed_agb.value_or(0.0);
        pv += r.predicted.volume_m3;
        pa += r.predicted.agb_mg;
    }
    std::size_t labelled = 0;
    for (const auto& c : seg.crowns) labelled += c.species_code ? 1 : 0;
    auto kv = [](const std::string& k, const std::string& v) { return k + "," + v + "\n"; };
    std::string s = "key,value\n";
    s += kv("crowns", std::to_string(seg.crowns.size()));
    s += kv("classified_crowns", std::to_string(labelled));
    s += kv("reference_crowns", std::to_string(labels.size()));
    s += kv("train_crowns", std::to_string(labels.size() - test.size()));
    s += kv("test_crowns", std::to_string(test.size()));
    s += kv("scored_crowns", std::to_string(scored.matrix.total()));
    s += kv("excluded_crowns", std::to_string(scored.excluded));
    s += kv("overall_accuracy", evaluate::format_optional(scored.matrix.overall_accuracy()));
    s += kv("plots", std::to_string(rows.size()));
    s += kv("observed_volume_m3", text::format_double(ov));
    s += kv("predicted_volume_m3", text::format_double(pv));
    s += kv("observed_agb_mg", text::format_double(oa));
    s += kv("predicted_agb_mg", text::format_double(pa));
    s += kv("r_volume", evaluate::format_optional(corr.volume_r));
    s += kv("r_agb", evaluate::format_optional(corr.agb_r));
    text::write_file(out_path(cfg, files::kSummary), s);
}

} // namespace

void run_stage(const PipelineConfig& cfg, Stage stage) {
    check_inputs(cfg, stage);
    fs::create_directories(cfg.out_dir);
    switch (stage) {
    case Stage::Chm: stage_chm(cfg); break;
    case Stage::Crowns: stage_crowns(cfg); break;
    case Stage::SelectBands: stage_select_bands(cfg); break;
    case Stage::Train: stage_train(cfg); break;
    case Stage::Classify: stage_classify(cfg); break;
    case Stage::Inventory: stage_inventory(cfg); break;
    case Stage::Evaluate: stage_evaluate(cfg); break;
    }
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string format_manifest(const PipelineConfig& cfg, const RunRecord& run) {
    nlohmann::ordered_json j;
    j["tool"] = "forestinv";
    j["command"] = run.command;
    j["complete"] = run.complete;
    if (!run.error.empty()) j["error"] = run.error;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    auto inputs = nlohmann::ordered_json::array();
    const std::pair<const char*, std::string> candidates[] = {
        {"config", run.config_path},           {"dtm", cfg.paths.dtm},
        {"points", cfg.paths.points},          {"cube_header", cfg.paths.cube_header},
        {"cube_data", cfg.paths.cube_data},    {"ground_truth", cfg.paths.ground_truth},
        {"plots", cfg.paths.plots},
    };
    for (const auto& [role, path] : candidates) {
        if (path.empty() || !fs::exists(path)) continue;
        inputs.push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
    }
    j["inputs"] = inputs;
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : run.stages) stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"ok", s.ok}});
    j["stages"] = stages;
    j["config"] = echo_config(cfg);
    return j.dump(2) + "\n";
}

RunRecord run_stages(const PipelineConfig& cfg, std::span<const Stage> stages, const std::string& command,
                     const std::string& config_path) {
    RunRecord run{command, config_path, {}, false, {}};
    std::exception_ptr failure;
    for (Stage s : stages) {
        const auto t0 = std::chrono::steady_clock::now();
        StageRecord rec{stage_name(s), 0.0, false};
        try {
            std::cerr << "[" << rec.name << "] running\n";
            run_stage(cfg, s);
            rec.ok = true;
        } catch (const std::exception& e) {
            run.error = rec.name + ": " + e.what();
            std::cerr << "[" << rec.name << "] failed: " << e.what() << "\n";
            failure = std::current_exception();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run.stages.push_back(rec);
        if (failure) break;
    }
    run.complete = !failure;
    fs::create_directories(cfg.out_dir);
    text::write_file((fs::path(cfg.out_dir) / files::kManifest).string(), format_manifest(cfg, run));
    if (failure) std::rethrow_exception(failure);
    return run;
}

} // namespace forestinv::app
