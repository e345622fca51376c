#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

namespace forestinv::app {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& what) {
    throw ConfigError("[" + section + "] " + key + ": " + what);
}

struct Value {
    std::string section, key, text;

    double number() const {
        auto v = text::parse_double(text::trim(text));
        if (!v || !std::isfinite(*v)) bad(section, key, "expected a finite number, got '" + text + "'");
        return *v;
    }

    int integer() const {
        auto v = text::parse_int<int>(text::trim(text));
        if (!v) bad(section, key, "expected an integer, got '" + text + "'");
        return *v;
    }

    std::uint64_t u64() const {
        auto v = text::parse_int<std::uint64_t>(text::trim(text));
        if (!v) bad(section, key, "expected a non-negative integer, got '" + text + "'");
        return *v;
    }

    bool boolean() const {
        const auto t = text::to_lower(text::trim(text));
        if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
        if (t == "false" || t == "no" || t == "0" || t == "off") return false;
        bad(section, key, "expected true/false, got '" + text + "'");
    }

    std::vector<std::string> tokens() const {
        std::string s = text;
        std::replace(s.begin(), s.end(), ',', ' ');
        std::vector<std::string> out;
        for (auto t : text::split_ws(s)) out.emplace_back(t);
        return out;
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (const auto& t : tokens()) out.push_back(Value{section, key, t}.number());
        return out;
    }

    std::vector<int> integers() const {
        std::vector<int> out;
        for (const auto& t : tokens()) out.push_back(Value{section, key, t}.integer());
        return out;
    }

    std::string str() const { return std::string(text::trim(text)); }
};

std::string resolve(const std::string& dir, const std::string& p) {
    if (p.empty()) return p;
    fs::path path(p);
    if (path.is_relative()) path = fs::path(dir) / path;
    return path.lexically_normal().string();
}

using Setter = std::function<void(PipelineConfig&, const Value&)>;
using SectionTable = std::map<std::string, Setter>;

std::map<std::string, SectionTable> build_tables() {
    std::map<std::string, SectionTable> t;
    t["run"] = {
        {"seed", [](auto& c, const Value& v) { c.seed = v.u64(); }},
        {"threads", [](auto& c, const Value& v) { c.threads = v.integer(); }},
        {"out", [](auto& c, const Value& v) { c.out_dir = resolve(c.config_dir, v.str()); }},
    };
    auto path = [](std::string Paths::*member) {
        return [member](PipelineConfig& c, const Value& v) { c.paths.*member = resolve(c.config_dir, v.str()); };
    };
    t["paths"] = {
        {"dtm", path(&Paths::dtm)},
        {"points", path(&Paths::points)},
        {"cube_header", path(&Paths::cube_header)},
        {"cube_data", path(&Paths::cube_data)},
        {"ground_truth", path(&Paths::ground_truth)},
        {"plots", path(&Paths::plots)},
        {"trees", path(&Paths::trees)},
    };
    t["terrain"] = {{"class_width", [](auto& c, const Value& v) { c.terrain_class_width = v.number(); }}};
    t["chm"] = {
        {"resolution", [](auto& c, const Value& v) { c.chm.resolution = v.number(); }},
        {"thresholds", [](auto& c, const Value& v) { c.chm.height_thresholds = v.numbers(); }},
        {"max_edge", [](auto& c, const Value& v) { c.chm.max_edge = v.number(); }},
        {"subcircle_radius", [](auto& c, const Value& v) { c.chm.subcircle_radius = v.number(); }},
        {"first_returns_only", [](auto& c, const Value& v) { c.chm.first_returns_only = v.boolean(); }},
    };
    t["crowns"] = {
        {"min_search_win", [](auto& c, const Value& v) { c.itc.min_search_win = v.integer(); }},
        {"max_search_win", [](auto& c, const Value& v) { c.itc.max_search_win = v.integer(); }},
        {"thresh_seed", [](auto& c, const Value& v) { c.itc.thresh_seed = v.number(); }},
        {"thresh_crown", [](auto& c, const Value& v) { c.itc.thresh_crown = v.number(); }},
        {"min_dist", [](auto& c, const Value& v) { c.itc.min_dist = v.number(); }},
        {"max_dist", [](auto& c, const Value& v) { c.itc.max_dist = v.number(); }},
        {"height_threshold", [](auto& c, const Value& v) { c.itc.height_threshold = v.number(); }},
        {"win_low_height", [](auto& c, const Value& v) { c.itc.win_low_height = v.number(); }},
        {"win_high_height", [](auto& c, const Value& v) { c.itc.win_high_height = v.number(); }},
        {"smooth", [](auto& c, const Value& v) { c.smooth_chm = v.boolean(); }},
    };
    t["spectral"] = {
        {"drop_head", [](auto& c, const Value& v) { c.spectral.drop_head = v.integer(); }},
        {"drop_tail", [](auto& c, const Value& v) { c.spectral.drop_tail = v.integer(); }},
        {"exclude", [](auto& c, const Value& v) { c.spectral.exclude = v.integers(); }},
        {"k", [](auto& c, const Value& v) { c.spectral.k = v.integer(); }},
        {"aggregation",
         [](auto& c, const Value& v) {
             const auto s = text::to_lower(v.str());
             if (s == "mean") c.spectral.aggregation = spectral::Aggregation::Mean;
             else if (s == "min") c.spectral.aggregation = spectral::Aggregation::Min;
             else bad(v.section, v.key, "expected mean or min");
         }},
    };
    t["classify"] = {
        {"method",
         [](auto& c, const Value& v) {
             c.classify.method = text::to_lower(v.str());
             if (c.classify.method != "svm" && c.classify.method != "centroid")
                 bad(v.section, v.key, "expected svm or centroid");
         }},
        {"C", [](auto& c, const Value& v) { c.classify.C = v.number(); }},
        {"gamma", [](auto& c, const Value& v) { c.classify.gamma = v.number(); }},
        {"tolerance", [](auto& c, const Value& v) { c.classify.tolerance = v.number(); }},
        {"max_pixels_per_class",
         [](auto& c, const Value& v) { c.classify.max_pixels_per_class = static_cast<std::size_t>(v.u64()); }},
        {"mask_min_height", [](auto& c, const Value& v) { c.classify.mask_min_height = v.number(); }},
        {"pixel_level", [](auto& c, const Value& v) { c.classify.pixel_level = v.boolean(); }},
    };
    t["split"] = {{"train_fraction", [](auto& c, const Value& v) { c.train_fraction = v.number(); }}};
    t["allometry"] = {
        {"dbh_a", [](auto& c, const Value& v) { c.dbh.coeff_a = v.number(); }},
        {"dbh_b", [](auto& c, const Value& v) { c.dbh.coeff_b = v.number(); }},
        {"dbh_sigma", [](auto& c, const Value& v) { c.dbh.sigma = v.number(); }},
    };
    t["evaluate"] = {
        {"plot_radius", [](auto& c, const Value& v) { c.plot_radius = v.number(); }},
        {"dbh_min", [](auto& c, const Value& v) { c.dbh_min = v.number(); }},
    };
    auto sn = [](double SynthConfig::*m) { return [m](PipelineConfig& c, const Value& v) { c.synth.*m = v.number(); }; };
    auto si = [](int SynthConfig::*m) { return [m](PipelineConfig& c, const Value& v) { c.synth.*m = v.integer(); }; };
    t["synth"] = {
        {"n_trees", si(&SynthConfig::n_trees)},
        {"species", [](auto& c, const Value& v) { c.synth.species = v.tokens(); }},
        {"spacing", sn(&SynthConfig::spacing)},
        {"jitter", sn(&SynthConfig::jitter)},
        {"height_min", sn(&SynthConfig::height_min)},
        {"height_max", sn(&SynthConfig::height_max)},
        {"radius_min", sn(&SynthConfig::radius_min)},
        {"radius_max", sn(&SynthConfig::radius_max)},
        {"density", sn(&SynthConfig::density)},
        {"ground_fraction", sn(&SynthConfig::ground_fraction)},
        {"dtm_cellsize", sn(&SynthConfig::dtm_cellsize)},
        {"terrain",
         [](auto& c, const Value& v) {
             c.synth.terrain = text::to_lower(v.str());
             if (c.synth.terrain != "hills" && c.synth.terrain != "plane" && c.synth.terrain != "flat")
                 bad(v.section, v.key, "expected hills, plane or flat");
         }},
        {"base_elevation", sn(&SynthConfig::base_elevation)},
        {"cube_cellsize", sn(&SynthConfig::cube_cellsize)},
        {"bands", si(&SynthConfig::bands)},
        {"noise", sn(&SynthConfig::noise)},
        {"illum_min", sn(&SynthConfig::illum_min)},
        {"illum_max", sn(&SynthConfig::illum_max)},
        {"n_plots", si(&SynthConfig::n_plots)},
        {"plot_radius", sn(&SynthConfig::plot_radius)},
        {"gt_jitter", sn(&SynthConfig::gt_jitter)},
        {"origin_x", sn(&SynthConfig::origin_x)},
        {"origin_y", sn(&SynthConfig::origin_y)},
        {"margin", sn(&SynthConfig::margin)},
    };
    return t;
}

template <class Fn>
void rethrow_as_config(Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

PipelineConfig parse_config(const std::string& ini_text, const std::string& config_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(ini_text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    PipelineConfig cfg;
    cfg.config_dir = config_dir;
    cfg.out_dir = resolve(config_dir, cfg.out_dir);
    static const auto tables = build_tables();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
        if (section == "registry") {
            for (const auto& [key, val] : body) {
                cfg.registry_overrides.emplace_back(key, val.data());
                rethrow_as_config([&] { cfg.registry.apply_override(key, val.data()); });
            }
            continue;
        }
        auto table = tables.find(section);
        if (table == tables.end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, val] : body) {
            auto setter = table->second.find(key);
            if (setter == table->second.end()) throw ConfigError("[" + section + "] unknown key '" + key + "'");
            setter->second(cfg, Value{section, key, val.data()});
        }
    }
    cfg.chm.threads = cfg.itc.threads = cfg.threads;
    cfg.validate(false);
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = text::read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    const auto dir = fs::absolute(fs::path(path)).parent_path().string();
    return parse_config(text, dir);
}

void PipelineConfig::validate(bool require_inputs) const {
    if (threads < 1) throw ConfigError("[run] threads must be >= 1");
    if (!(terrain_class_width > 0)) throw ConfigError("[terrain] class_width must be > 0");
    rethrow_as_config([&] {
        chm.validate();
        itc.validate();
        dbh.validate();
    });
    if (spectral.drop_head < 0 || spectral.drop_tail < 0) throw ConfigError("[spectral] band drops must be >= 0");
    if (spectral.k < 1) throw ConfigError("[spectral] k must be >= 1");
    for (int b : spectral.exclude)
        if (b < 0) throw ConfigError("[spectral] exclude indices must be >= 0");
    if (!(classify.C > 0)) throw ConfigError("[classify] C must be > 0");
    if (classify.gamma < 0) throw ConfigError("[classify] gamma must be >= 0 (0 selects 1/bands)");
    if (!(classify.tolerance > 0)) throw ConfigError("[classify] tolerance must be > 0");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("[split] train_fraction must lie in (0, 1)");
    if (!(plot_radius > 0)) throw ConfigError("[evaluate] plot_radius must be > 0");
    if (!(dbh_min >= 0)) throw ConfigError("[evaluate] dbh_min must be >= 0");
    const auto& s = synth;
    if (s.n_trees < 1 || s.species.empty() || !(s.spacing > 0) || s.jitter < 0 || !(s.height_min > 0) ||
        s.height_max < s.height_min || !(s.radius_min > 0) || s.radius_max < s.radius_min || !(s.density > 0) ||
        s.ground_fraction < 0 || !(s.dtm_cellsize > 0) || !(s.cube_cellsize > 0) || s.bands < 1 || s.noise < 0 ||
        !(s.illum_min > 0) || s.illum_max < s.illum_min || s.n_plots < 0 || !(s.plot_radius > 0) || s.gt_jitter < 0 ||
        s.margin < 0)
        throw ConfigError("[synth] parameters out of range");
    for (const auto& sp : s.species)
        if (!registry.find(sp)) throw ConfigError("[synth] species " + sp + " is not in the registry");
    if (!require_inputs) return;
    const std::pair<const char*, const std::string*> inputs[] = {
        {"dtm", &paths.dtm},
        {"points", &paths.points},
        {"cube_header", &paths.cube_header},
        {"cube_data", &paths.cube_data},
        {"ground_truth", &paths.ground_truth},
        {"plots", &paths.plots},
    };
    for (const auto& [key, p] : inputs) {
        if (p->empty()) throw ConfigError(std::string("[paths] ") + key + " is not set");
        if (!fs::exists(*p)) throw ConfigError(std::string("[paths] ") + key + ": file not found: " + *p);
    }
}

std::string echo_config(const PipelineConfig& c) {
    auto d = [](double v) { return text::format_double(v); };
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    auto list = [](const auto& v, auto fmt) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
        return s;
    };
    auto num = [&](double v) { return d(v); };
    auto inum = [](int v) { return std::to_string(v); };
    auto str = [](const std::string& v) { return v; };
    std::string o;
    o += "[run]\nseed = " + std::to_string(c.seed) + "\nthreads = " + std::to_string(c.threads) + "\nout = " + c.out_dir + "\n\n";
    o += "[paths]\ndtm = " + c.paths.dtm + "\npoints = " + c.paths.points + "\ncube_header = " + c.paths.cube_header +
         "\ncube_data = " + c.paths.cube_data + "\nground_truth = " + c.paths.ground_truth + "\nplots = " + c.paths.plots +
         "\ntrees = " + c.paths.trees + "\n\n";
    o += "[terrain]\nclass_width = " + d(c.terrain_class_width) + "\n\n";
    o += "[chm]\nresolution = " + d(c.chm.resolution) + "\nthresholds = " + list(c.chm.height_thresholds, num) +
         "\nmax_edge = " + d(c.chm.max_edge) + "\nsubcircle_radius = " + d(c.chm.subcircle_radius) +
         "\nfirst_returns_only = " + b(c.chm.first_returns_only) + "\n\n";
    o += "[crowns]\nmin_search_win = " + std::to_string(c.itc.min_search_win) +
         "\nmax_search_win = " + std::to_string(c.itc.max_search_win) + "\nthresh_seed = " + d(c.itc.thresh_seed) +
         "\nthresh_crown = " + d(c.itc.thresh_crown) + "\nmin_dist = " + d(c.itc.min_dist) +
         "\nmax_dist = " + d(c.itc.max_dist) + "\nheight_threshold = " + d(c.itc.height_threshold) +
         "\nwin_low_height = " + d(c.itc.win_low_height) + "\nwin_high_height = " + d(c.itc.win_high_height) +
         "\nsmooth = " + b(c.smooth_chm) + "\n\n";
    o += "[spectral]\ndrop_head = " + std::to_string(c.spectral.drop_head) +
         "\ndrop_tail = " + std::to_string(c.spectral.drop_tail) + "\nexclude = " + list(c.spectral.exclude, inum) +
         "\nk = " + std::to_string(c.spectral.k) +
         "\naggregation = " + (c.spectral.aggregation == spectral::Aggregation::Mean ? "mean" : "min") + "\n\n";
    o += "[classify]\nmethod = " + c.classify.method + "\nC = " + d(c.classify.C) + "\ngamma = " + d(c.classify.gamma) +
         "\ntolerance = " + d(c.classify.tolerance) +
         "\nmax_pixels_per_class = " + std::to_string(c.classify.max_pixels_per_class) +
         "\nmask_min_height = " + d(c.classify.mask_min_height) + "\npixel_level = " + b(c.classify.pixel_level) + "\n\n";
    o += "[split]\ntrain_fraction = " + d(c.train_fraction) + "\n\n";
    o += "[allometry]\ndbh_a = " + d(c.dbh.coeff_a) + "\ndbh_b = " + d(c.dbh.coeff_b) + "\ndbh_sigma = " + d(c.dbh.sigma) +
         "\n\n";
    o += "[registry]\n";
    for (const auto& [code, info] : c.registry.entries()) {
        o += code + " = " + allometry::to_string(info.group);
        if (info.volume)
            o += " " + d(info.volume->a) + " " + d(info.volume->b) + " " + d(info.volume->c) + " " + d(info.volume->d0);
        else
            o += " fallback=" + *info.fallback;
        o += "\n";
    }
    o += "\n[evaluate]\nplot_radius = " + d(c.plot_radius) + "\ndbh_min = " + d(c.dbh_min) + "\n\n";
    const auto& s = c.synth;
    o += "[synth]\nn_trees = " + std::to_string(s.n_trees) + "\nspecies = " + list(s.species, str) +
         "\nspacing = " + d(s.spacing) + "\njitter = " + d(s.jitter) + "\nheight_min = " + d(s.height_min) +
         "\nheight_max = " + d(s.height_max) + "\nradius_min = " + d(s.radius_min) + "\nradius_max = " + d(s.radius_max) +
         "\ndensity = " + d(s.density) + "\nground_fraction = " + d(s.ground_fraction) +
         "\ndtm_cellsize = " + d(s.dtm_cellsize) + "\nterrain = " + s.terrain + "\nbase_elevation = " + d(s.base_elevation) +
         "\ncube_cellsize = " + d(s.cube_cellsize) + "\nbands = " + std::to_string(s.bands) + "\nnoise = " + d(s.noise) +
         "\nillum_min = " + d(s.illum_min) + "\nillum_max = " + d(s.illum_max) + "\nn_plots = " + std::to_string(s.n_plots) +
         "\nplot_radius = " + d(s.plot_radius) + "\ngt_jitter = " + d(s.gt_jitter) + "\norigin_x = " + d(s.origin_x) +
         "\norigin_y = " + d(s.origin_y) + "\nmargin = " + d(s.margin) + "\n";
    return o;
}

} // namespace forestinv::app
