#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "forestinv/common/text.hpp"
#include "forestinv/crowns/itc.hpp"
#include "forestinv/geodata/hypercube.hpp"

namespace forestinv::spectral {

using geodata::HyperCube;

struct GaussianClassStats {
    std::string species_code;
    std::size_t n_samples = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// species -> flat pixel indices into the cube.
using PixelSets = std::map<std::string, std::vector<std::size_t>>;

/// Cube pixels under the given crowns, grouped by crown species. Crown cells map
/// to cube pixels through their world-coordinate centers; nodata pixels are skipped.
inline PixelSets collect_crown_pixels(const HyperCube& cube, const crowns::Segmentation& seg,
                                      const std::map<int, std::string>& species_of, const std::vector<int>& crown_ids) {
    std::map<std::string, std::set<std::size_t>> acc;
    const auto& cg = cube.geometry();
    const auto& lg = seg.labels.geometry();
    for (int id : crown_ids) {
        auto sp = species_of.find(id);
        const auto* crown = seg.find(id);
        if (sp == species_of.end() || crown == nullptr) continue;
        for (const auto& cell : crown->cells) {
            auto pc = cg.cell_at(lg.center_x(cell.col), lg.center_y(cell.row));
            if (!pc) continue;
            const auto pix = cg.index(*pc);
            if (cube.pixel_is_nodata(pix)) continue;
            acc[sp->second].insert(pix);
        }
    }
    PixelSets out;
    for (auto& [sp, s] : acc) out[sp] = std::vector<std::size_t>(s.begin(), s.end());
    return out;
}

/// Ridge term added to a covariance: 1e-6 * trace / dim, floored at 1e-9.
inline double ridge_epsilon(const Eigen::MatrixXd& cov) {
    const double dim = static_cast<double>(cov.rows());
    return std::max(1e-6 * cov.trace() / dim, 1e-9);
}

struct ClassStatisticsResult {
    std::vector<GaussianClassStats> stats; // sorted by species_code
    std::vector<std::string> warnings;
};

/// Per species sample mean and unbiased covariance over `bands` (all bands
/// when empty), ridge-regularized unless `regularize` is false.
inline ClassStatisticsResult class_statistics(const HyperCube& cube, const PixelSets& pixels,
                                              std::span<const int> bands = {}, bool regularize = true) {
    std::vector<int> band_list(bands.begin(), bands.end());
    if (band_list.empty())
        for (int b = 0; b < cube.nbands(); ++b) band_list.push_back(b);
    for (int b : band_list)
        if (b < 0 || b >= cube.nbands()) throw DataError("band index " + std::to_string(b) + " out of range");
    const auto d = static_cast<Eigen::Index>(band_list.size());

    ClassStatisticsResult out;
    for (const auto& [species, pix] : pixels) {
        if (pix.size() < 2) {
            out.warnings.push_back("species " + species + " has " + std::to_string(pix.size()) +
                                   " labelled pixel(s); excluded from statistics");
            continue;
        }
        const auto n = static_cast<Eigen::Index>(pix.size());
        Eigen::MatrixXd x(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                x(i, j) = cube.sample(band_list[static_cast<std::size_t>(j)], pix[static_cast<std::size_t>(i)]);
        GaussianClassStats s;
        s.species_code = species;
        s.n_samples = pix.size();
        s.mean = x.colwise().mean().transpose();
        const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
        s.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
        if (regularize) s.covariance.diagonal().array() += ridge_epsilon(s.covariance);
        out.stats.push_back(std::move(s));
    }
    return out;
}

/// Restriction of a class's statistics to a band subset (indices into its dimensions).
inline GaussianClassStats marginal(const GaussianClassStats& s, std::span<const int> subset) {
    GaussianClassStats m;
    m.species_code = s.species_code;
    m.n_samples = s.n_samples;
    const auto k = static_cast<Eigen::Index>(subset.size());
    m.mean.resize(k);
    m.covariance.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        m.mean(i) = s.mean(subset[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < k; ++j)
            m.covariance(i, j) = s.covariance(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]);
    }
    return m;
}

namespace detail {

inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& l) {
    return 2.0 * l.matrixLLT().diagonal().array().log().sum();
}

inline double log_det_checked(const GaussianClassStats& s) {
    const Eigen::LLT<Eigen::MatrixXd> l(s.covariance);
    if (l.info() != Eigen::Success) throw NumericalError("covariance of " + s.species_code + " not positive definite");
    return log_det(l);
}

inline double bhattacharyya(const GaussianClassStats& a, const GaussianClassStats& b, double logdet_a,
                            double logdet_b) {
    const Eigen::LLT<Eigen::MatrixXd> lmid(0.5 * (a.covariance + b.covariance));
    if (lmid.info() != Eigen::Success)
        throw NumericalError("mid covariance of " + a.species_code + " and " + b.species_code +
                             " not positive definite");
    const Eigen::VectorXd diff = a.mean - b.mean;
    const double mahal = diff.dot(lmid.solve(diff));
    return std::max(0.0, mahal / 8.0 + 0.5 * (log_det(lmid) - 0.5 * (logdet_a + logdet_b)));
}

} // namespace detail

/// Bhattacharyya distance between two Gaussian classes.
inline double bhattacharyya_distance(const GaussianClassStats& a, const GaussianClassStats& b) {
    if (a.mean.size() != b.mean.size() || a.covariance.rows() != a.mean.size() ||
        b.covariance.rows() != b.mean.size())
        throw DataError("class statistics differ in dimension");
    return detail::bhattacharyya(a, b, detail::log_det_checked(a), detail::log_det_checked(b));
}

/// Jeffries-Matusita distance, 2 (1 - exp(-B)), in [0, 2].
inline double jm_distance(const GaussianClassStats& a, const GaussianClassStats& b) {
    return 2.0 * (1.0 - std::exp(-bhattacharyya_distance(a, b)));
}

enum class Aggregation { Mean, Min };

/// Pairwise JM over all class pairs on the band subset, aggregated by mean or min.
inline double separability(const std::vector<GaussianClassStats>& stats, std::span<const int> subset,
                           Aggregation agg = Aggregation::Mean) {
    if (stats.size() < 2) throw DataError("separability needs at least two classes");
    std::vector<GaussianClassStats> marg;
    std::vector<double> logdet;
    marg.reserve(stats.size());
    for (const auto& s : stats) {
        marg.push_back(marginal(s, subset));
        logdet.push_back(detail::log_det_checked(marg.back()));
    }
    double sum = 0.0, lo = 2.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < marg.size(); ++i)
        for (std::size_t j = i + 1; j < marg.size(); ++j) {
            const double v = 2.0 * (1.0 - std::exp(-detail::bhattacharyya(marg[i], marg[j], logdet[i], logdet[j])));
            sum += v;
            lo = std::min(lo, v);
            ++pairs;
        }
    return agg == Aggregation::Mean ? sum / static_cast<double>(pairs) : lo;
}

struct BandSelection {
    std::vector<int> indices; // ascending
    double criterion_value = 0.0;
};

struct SelectionOptions {
    Aggregation aggregation = Aggregation::Mean;
    std::vector<int> excluded; // bands never considered
};

namespace detail {

inline std::vector<int> candidate_bands(const std::vector<GaussianClassStats>& stats, int k,
                                        const SelectionOptions& opt) {
    if (stats.size() < 2) throw DataError("band selection needs at least two classes");
    const auto dim = static_cast<int>(stats.front().mean.size());
    for (const auto& s : stats)
        if (s.mean.size() != dim) throw DataError("class statistics differ in dimension");
    std::vector<int> cands;
    for (int b = 0; b < dim; ++b)
        if (std::find(opt.excluded.begin(), opt.excluded.end(), b) == opt.excluded.end()) cands.push_back(b);
    if (k < 1) throw DataError("target band count must be >= 1");
    if (k > static_cast<int>(cands.size()))
        throw DataError("target band count " + std::to_string(k) + " exceeds the " + std::to_string(cands.size()) +
                        " available bands");
    return cands;
}

inline std::vector<int> with(std::vector<int> s, int b) {
    s.insert(std::upper_bound(s.begin(), s.end(), b), b);
    return s;
}

inline std::vector<int> without(std::vector<int> s, int b) {
    s.erase(std::find(s.begin(), s.end(), b));
    return s;
}

} // namespace detail

/// Plain sequential forward selection.
inline BandSelection sfs_select(const std::vector<GaussianClassStats>& stats, int k, const SelectionOptions& opt = {}) {
    const auto cands = detail::candidate_bands(stats, k, opt);
    std::vector<int> current;
    double score = 0.0;
    while (static_cast<int>(current.size()) < k) {
        int best_band = -1;
        double best = -1.0;
        for (int b : cands) {
            if (std::binary_search(current.begin(), current.end(), b)) continue;
            const double v = separability(stats, detail::with(current, b), opt.aggregation);
            if (v > best) best = v, best_band = b;
        }
        current = detail::with(current, best_band);
        score = best;
    }
    return {current, score};
}

/// Sequential forward floating selection. After each inclusion, bands are
/// conditionally excluded while doing so beats the best score recorded for
/// the smaller size. Ties go to the lowest band index.
inline BandSelection sffs_select(const std::vector<GaussianClassStats>& stats, int k,
                                 const SelectionOptions& opt = {}) {
    const auto cands = detail::candidate_bands(stats, k, opt);
    const auto ksz = static_cast<std::size_t>(k);
    std::vector<double> best(ksz + 1, -1.0);
    std::vector<std::vector<int>> best_set(ksz + 1);
    auto J = [&](const std::vector<int>& s) { return separability(stats, s, opt.aggregation); };

    std::vector<int> current;
    while (current.size() < ksz) {
        int add = -1;
        double add_score = -1.0;
        for (int b : cands) {
            if (std::binary_search(current.begin(), current.end(), b)) continue;
            const double v = J(detail::with(current, b));
            if (v > add_score) add_score = v, add = b;
        }
        current = detail::with(current, add);
        const std::size_t m = current.size();
        if (add_score > best[m]) {
            best[m] = add_score;
            best_set[m] = current;
        } else {
            current = best_set[m];
        }

        while (current.size() > 2) {
            int drop = -1;
            double drop_score = -1.0;
            for (int b : current) {
                const double v = J(detail::without(current, b));
                if (v > drop_score) drop_score = v, drop = b;
            }
            const std::size_t smaller = current.size() - 1;
            if (!(drop_score > best[smaller])) break;
            current = detail::without(current, drop);
            best[smaller] = drop_score;
            best_set[smaller] = current;
        }
    }
    return {best_set[ksz], best[ksz]};
}

inline std::string format_band_selection(const BandSelection& sel) {
    std::string out = "# forestinv band selection\ncriterion=" + text::format_double(sel.criterion_value) + "\nbands=";
    for (std::size_t i = 0; i < sel.indices.size(); ++i) out += (i ? "," : "") + std::to_string(sel.indices[i]);
    return out + "\n";
}

inline BandSelection parse_band_selection(std::string_view buf, const std::string& name = "<memory>") {
    BandSelection sel;
    bool got_c = false, got_b = false;
    text::LineReader lines(buf);
    std::string_view line;
    while (lines.next(line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError(name, lines.line_number(), "expected key=value");
        auto key = text::trim(t.substr(0, eq));
        auto val = text::trim(t.substr(eq + 1));
        if (key == "criterion") {
            auto v = text::parse_double(val);
            if (!v) throw ParseError(name, lines.line_number(), "non-numeric criterion");
            sel.criterion_value = *v;
            got_c = true;
        } else if (key == "bands") {
            for (auto tok : text::split(val, ',')) {
                auto b = text::parse_int<int>(tok);
                if (!b || *b < 0) throw ParseError(name, lines.line_number(), "invalid band index");
                sel.indices.push_back(*b);
            }
            got_b = true;
        } else {
            throw ParseError(name, lines.line_number(), "unknown key '" + std::string(key) + "'");
        }
    }
    if (!got_c || !got_b) throw DataError(name + ": band selection needs 'criterion' and 'bands'");
    return sel;
}

/// Human-readable dump of class statistics for auditing.
inline std::string format_statistics_report(const std::vector<GaussianClassStats>& stats,
                                            std::span<const int> bands = {}) {
    std::string out;
    for (const auto& s : stats) {
        out += "species " + s.species_code + " n=" + std::to_string(s.n_samples) + "\n";
        for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
            const int band = bands.empty() ? static_cast<int>(i) : bands[static_cast<std::size_t>(i)];
            out += "  band " + std::to_string(band) + " mean=" + text::format_double(s.mean(i)) +
                   " var=" + text::format_double(s.covariance(i, i)) + "\n";
        }
    }
    return out;
}

} // namespace forestinv::spectral
