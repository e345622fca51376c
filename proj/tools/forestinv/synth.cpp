#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "forestinv/common/random.hpp"

namespace forestinv::app {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> wavelengths(int n) {
    std::vector<double> wl(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) wl[static_cast<std::size_t>(b)] = n == 1 ? 0.7 : 0.38 + 0.67 * b / (n - 1);
    return wl;
}

// Generic green-vegetation curve: green peak, red well, red-edge rise to a NIR plateau.
double vegetation(double wl) {
    const double green = 0.035 * std::exp(-std::pow((wl - 0.55) / 0.03, 2));
    const double nir = 0.38 / (1.0 + std::exp(-(wl - 0.715) / 0.018));
    return 0.04 + green + nir;
}

struct TreeIndex {
    double x0, y0, cell;
    int nx, ny;
    std::vector<std::vector<std::size_t>> buckets;

    TreeIndex(const std::vector<SynthTree>& trees, double x0_, double y0_, double w, double h, double cell_)
        : x0(x0_), y0(y0_), cell(cell_), nx(std::max(1, static_cast<int>(std::ceil(w / cell_)))),
          ny(std::max(1, static_cast<int>(std::ceil(h / cell_)))),
          buckets(static_cast<std::size_t>(nx * ny)) {
        for (std::size_t i = 0; i < trees.size(); ++i) {
            const auto& t = trees[i];
            const int c0 = std::clamp(static_cast<int>(std::floor((t.x - t.radius - x0) / cell)), 0, nx - 1);
            const int c1 = std::clamp(static_cast<int>(std::floor((t.x + t.radius - x0) / cell)), 0, nx - 1);
            const int r0 = std::clamp(static_cast<int>(std::floor((t.y - t.radius - y0) / cell)), 0, ny - 1);
            const int r1 = std::clamp(static_cast<int>(std::floor((t.y + t.radius - y0) / cell)), 0, ny - 1);
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c) buckets[static_cast<std::size_t>(r * nx + c)].push_back(i);
        }
    }

    /// Tallest crown surface at (x, y) and the tree it belongs to (npos on open ground).
    std::pair<double, std::size_t> canopy(const std::vector<SynthTree>& trees, double x, double y) const {
        const int c = static_cast<int>(std::floor((x - x0) / cell));
        const int r = static_cast<int>(std::floor((y - y0) / cell));
        double best = 0.0;
        std::size_t who = std::numeric_limits<std::size_t>::max();
        if (c < 0 || c >= nx || r < 0 || r >= ny) return {best, who};
        for (auto i : buckets[static_cast<std::size_t>(r * nx + c)]) {
            const double h = crown_surface(trees[i], x, y);
            if (h > best) best = h, who = i;
        }
        return {best, who};
    }
};

} // namespace

double crown_surface(const SynthTree& t, double x, double y) {
    const double r2 = ((x - t.x) * (x - t.x) + (y - t.y) * (y - t.y)) / (t.radius * t.radius);
    if (r2 >= 1.0) return 0.0;
    return t.height * (1.0 - 0.4 * r2);
}

double terrain_elevation(const SynthConfig& s, double dx, double dy) {
    if (s.terrain == "flat") return s.base_elevation;
    if (s.terrain == "plane") return s.base_elevation + 0.1 * dx + 0.05 * dy;
    return s.base_elevation + 20.0 * std::sin(2 * kPi * dx / 180.0) + 12.0 * std::cos(2 * kPi * dy / 140.0) + 0.05 * dx;
}

SynthScene generate_scene(const PipelineConfig& cfg) {
    const auto& s = cfg.synth;
    Rng rng(cfg.seed);
    SynthScene sc;
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(s.n_trees))));
    const int rows = (s.n_trees + cols - 1) / cols;
    sc.x0 = s.origin_x;
    sc.y0 = s.origin_y;
    sc.width = cols * s.spacing + 2 * s.margin;
    sc.height = rows * s.spacing + 2 * s.margin;

    // trees: jittered lattice, species dealt round-robin then shuffled
    std::vector<std::string> species;
    for (int i = 0; i < s.n_trees; ++i) species.push_back(s.species[static_cast<std::size_t>(i) % s.species.size()]);
    rng.shuffle(species);
    for (int i = 0; i < s.n_trees; ++i) {
        SynthTree t;
        t.id = i + 1;
        t.x = sc.x0 + s.margin + ((i % cols) + 0.5) * s.spacing + rng.uniform(-s.jitter, s.jitter);
        t.y = sc.y0 + s.margin + ((i / cols) + 0.5) * s.spacing + rng.uniform(-s.jitter, s.jitter);
        t.height = rng.uniform(s.height_min, s.height_max);
        t.radius = rng.uniform(s.radius_min, s.radius_max);
        t.species = species[static_cast<std::size_t>(i)];
        if (t.x - t.radius < sc.x0 || t.x + t.radius > sc.x0 + sc.width || t.y - t.radius < sc.y0 ||
            t.y + t.radius > sc.y0 + sc.height)
            throw DataError("synthetic tree " + std::to_string(t.id) + " extends outside the scene");
        const auto res = cfg.registry.resolve(t.species);
        if (!res) throw ConfigError("species " + t.species + " has no usable allometry parameters");
        const double cd = 2.0 * t.radius;
        t.dbh = allometry::estimate_dbh(t.height, cd, cfg.dbh);
        t.volume = allometry::volume_double_entry(t.dbh, t.height, *res->parameters->volume).volume;
        t.agb = allometry::agb_jucker(t.height, cd, res->species->group);
        sc.trees.push_back(std::move(t));
    }
    const TreeIndex index(sc.trees, sc.x0, sc.y0, sc.width, sc.height, s.spacing);

    // terrain sampled at DTM cell centers, padded so every point is inside the interpolation hull
    {
        geodata::GridGeometry g;
        g.cellsize = s.dtm_cellsize;
        g.xll = sc.x0 - s.dtm_cellsize;
        g.yll = sc.y0 - s.dtm_cellsize;
        g.ncols = static_cast<int>(std::ceil(sc.width / s.dtm_cellsize)) + 2;
        g.nrows = static_cast<int>(std::ceil(sc.height / s.dtm_cellsize)) + 2;
        sc.dtm = geodata::Grid(g);
        for (int r = 0; r < g.nrows; ++r)
            for (int c = 0; c < g.ncols; ++c)
                sc.dtm.at(r, c) = terrain_elevation(s, g.center_x(c) - sc.x0, g.center_y(r) - sc.y0);
    }

    // LiDAR: one first return per jittered stratum, optional ground echo under canopy
    {
        const double step = 1.0 / std::sqrt(s.density);
        const int nx = static_cast<int>(std::floor(sc.width / step));
        const int ny = static_cast<int>(std::floor(sc.height / step));
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double x = sc.x0 + (i + rng.uniform()) * step;
                const double y = sc.y0 + (j + rng.uniform()) * step;
                const double ground = terrain_elevation(s, x - sc.x0, y - sc.y0);
                const double h = index.canopy(sc.trees, x, y).first;
                geodata::LidarPoint p;
                p.x = x;
                p.y = y;
                p.z = ground + h;
                p.return_number = 1;
                p.is_ground = h == 0.0;
                sc.cloud.points.push_back(p);
                ++sc.first_returns;
                if (h > 0.0 && rng.uniform() < s.ground_fraction) {
                    p.z = ground;
                    p.return_number = 2;
                    p.is_ground = true;
                    sc.cloud.points.push_back(p);
                }
            }
    }

    // spectral signatures
    const auto wl = wavelengths(s.bands);
    for (std::size_t k = 0; k < s.species.size(); ++k) {
        const double amp = 0.10 + 0.03 * rng.uniform();
        const double freq = 1.2 + 0.9 * static_cast<double>(k);
        const double phase = 2 * kPi * rng.uniform();
        const double scale = 0.8 + 0.4 * rng.uniform();
        std::vector<double> sig;
        for (double w : wl) {
            const double t = (w - 0.38) / 0.67;
            sig.push_back(vegetation(w) * (1.0 + amp * std::sin(2 * kPi * freq * t + phase)) *
                          (w > 0.7 ? scale : 1.0));
        }
        sc.signatures[s.species[k]] = std::move(sig);
    }
    for (double w : wl) sc.background.push_back(0.08 + 0.18 * (w - 0.38));
    {
        auto normalized = [](const std::vector<double>& v) {
            double m = 0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            std::vector<double> o;
            for (double x : v) o.push_back(x / m);
            return std::pair{o, m};
        };
        double worst = std::numeric_limits<double>::infinity();
        for (auto a = sc.signatures.begin(); a != sc.signatures.end(); ++a)
            for (auto b = std::next(a); b != sc.signatures.end(); ++b) {
                const auto [na, ma] = normalized(a->second);
                const auto [nb, mb] = normalized(b->second);
                double gap = 0;
                for (std::size_t i = 0; i < na.size(); ++i) gap = std::max(gap, std::abs(na[i] - nb[i]));
                const double sigma = s.noise / std::min(ma, mb);
                worst = std::min(worst, sigma > 0 ? gap / sigma : std::numeric_limits<double>::infinity());
            }
        sc.min_separation_sigma = worst;
    }

    // cube: covering tree's signature scaled by a per-pixel illumination factor, plus noise
    {
        geodata::GridGeometry g;
        g.cellsize = s.cube_cellsize;
        g.xll = sc.x0;
        g.yll = sc.y0;
        g.ncols = static_cast<int>(std::ceil(sc.width / s.cube_cellsize));
        g.nrows = static_cast<int>(std::ceil(sc.height / s.cube_cellsize));
        sc.cube = geodata::HyperCube(g, s.bands, wl);
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto cell = g.cell(p);
            const auto [h, who] = index.canopy(sc.trees, g.center_x(cell.col), g.center_y(cell.row));
            const auto& sig = who < sc.trees.size() ? sc.signatures.at(sc.trees[who].species) : sc.background;
            const double illum = s.illum_max > s.illum_min ? rng.uniform(s.illum_min, s.illum_max) : s.illum_min;
            for (int b = 0; b < s.bands; ++b) {
                double v = illum * sig[static_cast<std::size_t>(b)];
                if (s.noise > 0) v += s.noise * rng.normal();
                sc.cube.sample(b, p) = v;
            }
        }
    }

    for (const auto& t : sc.trees) {
        const double a = 2 * kPi * rng.uniform();
        const double d = s.gt_jitter * std::sqrt(rng.uniform());
        sc.ground_truth.push_back({t.x + d * std::cos(a), t.y + d * std::sin(a), t.species,
                                   geodata::SampleRole::Unassigned});
    }

    // plots: disjoint circles whose boundary stays at least 1 m away from every stem
    const double r = s.plot_radius;
    const double lo_x = sc.x0 + s.margin + r, hi_x = sc.x0 + sc.width - s.margin - r;
    const double lo_y = sc.y0 + s.margin + r, hi_y = sc.y0 + sc.height - s.margin - r;
    if (s.n_plots > 0 && (hi_x < lo_x || hi_y < lo_y)) throw DataError("scene too small for the requested plots");
    for (int attempt = 0; static_cast<int>(sc.plots.size()) < s.n_plots; ++attempt) {
        if (attempt > 200000) throw DataError("could not place " + std::to_string(s.n_plots) + " synthetic plots");
        const double cx = rng.uniform(lo_x, hi_x), cy = rng.uniform(lo_y, hi_y);
        bool ok = true;
        for (const auto& p : sc.plots) ok = ok && std::hypot(p.center_x - cx, p.center_y - cy) >= 2 * r;
        for (const auto& t : sc.trees) ok = ok && std::abs(std::hypot(t.x - cx, t.y - cy) - r) >= 1.0;
        if (!ok) continue;
        evaluate::PlotDefinition p;
        p.id = std::to_string(sc.plots.size() + 1);
        p.center_x = cx;
        p.center_y = cy;
        p.radius = r;
        p.dbh_min = cfg.dbh_min;
        double vol = 0, agb = 0;
        for (const auto& t : sc.trees)
            if (std::hypot(t.x - cx, t.y - cy) <= r && t.dbh > p.dbh_min) vol += t.volume, agb += t.agb / 1000.0;
        p.observed_volume = vol;
        p.observed_agb = agb;
        sc.plots.push_back(std::move(p));
    }
    return sc;
}

std::string format_tree_table(const std::vector<SynthTree>& trees) {
    std::string out = "tree_id,x,y,species_code,height,crown_diameter,dbh,volume,agb\n";
    for (const auto& t : trees)
        out += std::to_string(t.id) + "," + text::format_double(t.x) + "," + text::format_double(t.y) + "," + t.species +
               "," + text::format_double(t.height) + "," + text::format_double(2 * t.radius) + "," +
               text::format_double(t.dbh) + "," + text::format_double(t.volume) + "," + text::format_double(t.agb) + "\n";
    return out;
}

void write_scene(const SynthScene& sc, const PipelineConfig& cfg) {
    const auto& p = cfg.paths;
    const std::string* all[] = {&p.dtm, &p.points, &p.cube_header, &p.cube_data, &p.ground_truth, &p.plots};
    for (const auto* path : all) {
        if (path->empty()) throw ConfigError("synth needs every [paths] entry to be set");
        const auto parent = std::filesystem::path(*path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    geodata::write_ascii_grid(sc.dtm, p.dtm);
    geodata::write_point_cloud(sc.cloud, p.points);
    geodata::write_envi_cube(sc.cube, p.cube_header, p.cube_data);
    geodata::write_ground_truth(sc.ground_truth, p.ground_truth);
    text::write_file(p.plots, evaluate::format_plots(sc.plots));
    if (!p.trees.empty()) {
        const auto parent = std::filesystem::path(p.trees).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        text::write_file(p.trees, format_tree_table(sc.trees));
    }
}

} // namespace forestinv::app
