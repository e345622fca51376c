#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "forestinv/chm/delaunay.hpp"
#include "forestinv/common/parallel.hpp"
#include "forestinv/geodata/grid.hpp"
#include "forestinv/geodata/point_cloud.hpp"

namespace forestinv::chm {

using geodata::Grid;
using geodata::GridGeometry;
using geodata::PointCloud;

/// Subtracts bilinearly interpolated terrain from every point; negative heights clamp to 0.
inline PointCloud normalize_heights(const PointCloud& cloud, const Grid& dtm) {
    PointCloud out = cloud;
    std::vector<std::size_t> outside;
    std::vector<std::size_t> nodata;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        auto& p = out.points[i];
        std::optional<double> ground;
        try {
            ground = geodata::bilinear_sample(dtm, p.x, p.y);
        } catch (const OutOfBoundsError&) {
            outside.push_back(i);
            continue;
        }
        if (!ground) {
            nodata.push_back(i);
            continue;
        }
        p.height_above_ground = std::max(0.0, p.z - *ground);
    }
    auto list = [](const std::vector<std::size_t>& idx) {
        std::string s;
        for (std::size_t k = 0; k < idx.size() && k < 10; ++k) s += (k ? ", " : "") + std::to_string(idx[k]);
        if (idx.size() > 10) s += ", ... (" + std::to_string(idx.size()) + " total)";
        return s;
    };
    if (!outside.empty()) throw OutOfBoundsError("points outside the DTM interpolation hull: " + list(outside));
    if (!nodata.empty()) throw DataError("points over DTM nodata cells: " + list(nodata));
    return out;
}

struct PitfreeParams {
    double resolution = 0.5;
    std::vector<double> height_thresholds{0.0, 2.0, 5.0, 10.0, 15.0};
    double max_edge = 1.5;
    double subcircle_radius = 0.0;
    bool first_returns_only = true;
    /// Output raster geometry; derived from the cloud's bounding box when unset.
    std::optional<GridGeometry> geometry;
    int threads = 1;

    void validate() const {
        if (!(resolution > 0)) throw DataError("pit-free resolution must be > 0");
        if (height_thresholds.empty() || height_thresholds.front() != 0.0)
            throw DataError("pit-free height thresholds must start at 0");
        for (std::size_t i = 1; i < height_thresholds.size(); ++i)
            if (!(height_thresholds[i] > height_thresholds[i - 1]))
                throw DataError("pit-free height thresholds must be strictly ascending");
        if (!(max_edge > 0)) throw DataError("pit-free max_edge must be > 0");
        if (subcircle_radius < 0) throw DataError("pit-free subcircle radius must be >= 0");
    }
};

/// Planar sample used for triangulation: position plus normalized height.
struct HeightSample {
    double x;
    double y;
    double h;
};

/// Raster geometry snapped to multiples of the resolution that covers every point.
inline GridGeometry bounding_geometry(const std::vector<HeightSample>& pts, double resolution) {
    double min_x = pts.front().x, max_x = min_x, min_y = pts.front().y, max_y = min_y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    GridGeometry g;
    g.cellsize = resolution;
    g.xll = std::floor(min_x / resolution) * resolution;
    g.yll = std::floor(min_y / resolution) * resolution;
    g.ncols = std::max(1, static_cast<int>(std::floor((max_x - g.xll) / resolution)) + 1);
    g.nrows = std::max(1, static_cast<int>(std::floor((max_y - g.yll) / resolution)) + 1);
    return g;
}

/// Linear TIN interpolation at cell centers. Triangles with an edge longer
/// than max_edge are discarded. Uncovered cells keep the grid's nodata value.
/// Throws NumericalError on a collinear sample set.
inline Grid tin_raster(const std::vector<HeightSample>& pts, const GridGeometry& geometry, double max_edge) {
    Grid out(geometry);
    if (pts.size() < 3) return out;
    std::vector<double> xs(pts.size()), ys(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
    }
    const Delaunay tin(xs, ys);
    const auto& tri = tin.triangles();
    const double max_edge2 = max_edge * max_edge;
    const double cs = geometry.cellsize;
    auto edge2 = [&](std::size_t a, std::size_t b) {
        const double dx = xs[a] - xs[b], dy = ys[a] - ys[b];
        return dx * dx + dy * dy;
    };

    for (std::size_t t = 0; t + 2 < tri.size(); t += 3) {
        const std::size_t a = tri[t], b = tri[t + 1], c = tri[t + 2];
        if (edge2(a, b) > max_edge2 || edge2(b, c) > max_edge2 || edge2(c, a) > max_edge2) continue;
        const double det = (ys[b] - ys[c]) * (xs[a] - xs[c]) + (xs[c] - xs[b]) * (ys[a] - ys[c]);
        if (det == 0.0) continue;
        const double lo_x = std::min({xs[a], xs[b], xs[c]}), hi_x = std::max({xs[a], xs[b], xs[c]});
        const double lo_y = std::min({ys[a], ys[b], ys[c]}), hi_y = std::max({ys[a], ys[b], ys[c]});
        const int c0 = std::max(0, static_cast<int>(std::ceil((lo_x - geometry.xll) / cs - 0.5)));
        const int c1 = std::min(geometry.ncols - 1, static_cast<int>(std::floor((hi_x - geometry.xll) / cs - 0.5)));
        const int r0 = std::max(0, static_cast<int>(std::ceil((geometry.ytop() - hi_y) / cs - 0.5)));
        const int r1 = std::min(geometry.nrows - 1, static_cast<int>(std::floor((geometry.ytop() - lo_y) / cs - 0.5)));
        constexpr double eps = 1e-12;
        for (int r = r0; r <= r1; ++r) {
            const double py = geometry.center_y(r);
            for (int col = c0; col <= c1; ++col) {
                const double px = geometry.center_x(col);
                const double l1 = ((ys[b] - ys[c]) * (px - xs[c]) + (xs[c] - xs[b]) * (py - ys[c])) / det;
                const double l2 = ((ys[c] - ys[a]) * (px - xs[c]) + (xs[a] - xs[c]) * (py - ys[c])) / det;
                const double l3 = 1.0 - l1 - l2;
                if (l1 < -eps || l2 < -eps || l3 < -eps) continue;
                const double h = l1 * pts[a].h + l2 * pts[b].h + l3 * pts[c].h;
                double& cell = out.at(r, col);
                if (out.is_nodata_value(cell) || h > cell) cell = h;
            }
        }
    }
    return out;
}

/// Samples (x, y, height_above_ground) prepared for pit-free layering: first-return
/// filter, optional subcircling, exact (x, y) duplicates collapsed to their highest
/// height, sorted lexicographically by (x, y).
inline std::vector<HeightSample> prepare_samples(const PointCloud& cloud, const PitfreeParams& params) {
    std::vector<HeightSample> pts;
    pts.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        if (params.first_returns_only && p.return_number != 1) continue;
        if (!p.height_above_ground)
            throw DataError("point " + std::to_string(i) + " has no height above ground; normalize heights first");
        const double h = std::max(0.0, *p.height_above_ground);
        pts.push_back({p.x, p.y, h});
        if (params.subcircle_radius > 0) {
            for (int k = 0; k < 8; ++k) {
                const double a = k * (std::numbers::pi / 4.0);
                pts.push_back({p.x + params.subcircle_radius * std::cos(a), p.y + params.subcircle_radius * std::sin(a), h});
            }
        }
    }
    std::sort(pts.begin(), pts.end(), [](const HeightSample& a, const HeightSample& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        return a.h > b.h;
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const HeightSample& a, const HeightSample& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    return pts;
}

/// Pit-free canopy height model: one TIN raster per height threshold built
/// from samples at or above it, combined by cell-wise maximum. Cells no layer
/// covers are nodata.
inline Grid pitfree_chm(const PointCloud& cloud, const PitfreeParams& params) {
    params.validate();
    if (cloud.empty()) throw DataError("pit-free CHM: empty point cloud");
    const auto pts = prepare_samples(cloud, params);
    if (pts.empty()) throw DataError("pit-free CHM: no points left after first-return filtering");

    GridGeometry geometry = params.geometry ? *params.geometry : bounding_geometry(pts, params.resolution);
    geometry.validate();

    const auto& thresholds = params.height_thresholds;
    std::vector<std::optional<Grid>> layers(thresholds.size());
    parallel_for(thresholds.size(), params.threads, [&](std::size_t li) {
        std::vector<HeightSample> subset;
        for (const auto& p : pts)
            if (p.h >= thresholds[li]) subset.push_back(p);
        if (subset.size() < 3) return;
        try {
            layers[li] = tin_raster(subset, geometry, params.max_edge);
        } catch (const NumericalError&) {
            if (li == 0) throw;
        }
    });
    if (!layers[0]) throw NumericalError("pit-free CHM: fewer than 3 points at threshold 0");

    Grid chm(geometry);
    for (const auto& layer : layers) {
        if (!layer) continue;
        auto dst = chm.values();
        auto src = layer->values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (layer->is_nodata_value(src[i])) continue;
            if (chm.is_nodata_value(dst[i]) || src[i] > dst[i]) dst[i] = src[i];
        }
    }
    return chm;
}

} // namespace forestinv::chm
