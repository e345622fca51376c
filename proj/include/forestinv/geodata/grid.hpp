#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestinv/common/error.hpp"

namespace forestinv::geodata {

struct Cell {
    int row = 0;
    int col = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Georeference of a north-up raster: lower-left corner, square cells, row 0 is the northern edge.
struct GridGeometry {
    int ncols = 1;
    int nrows = 1;
    double xll = 0.0;
    double yll = 0.0;
    double cellsize = 1.0;

    friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

    void validate() const {
        if (ncols < 1 || nrows < 1) throw DataError("grid dimensions must be positive");
        if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw DataError("grid cellsize must be > 0");
        if (!std::isfinite(xll) || !std::isfinite(yll)) throw DataError("grid origin must be finite");
    }

    std::size_t size() const { return static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows); }
    double ytop() const { return yll + nrows * cellsize; }
    double xmax() const { return xll + ncols * cellsize; }

    double center_x(int col) const { return xll + (col + 0.5) * cellsize; }
    double center_y(int row) const { return yll + (nrows - row - 0.5) * cellsize; }

    bool contains(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < nrows && c.col < ncols; }

    /// Cell containing the world point; cells are half-open [left, right) x (bottom, top].
    std::optional<Cell> cell_at(double x, double y) const {
        const double fc = std::floor((x - xll) / cellsize);
        const double fr = std::floor((ytop() - y) / cellsize);
        if (!(fc >= 0 && fr >= 0 && fc < ncols && fr < nrows)) return std::nullopt;
        return Cell{static_cast<int>(fr), static_cast<int>(fc)};
    }

    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(ncols) + static_cast<std::size_t>(c.col);
    }
    Cell cell(std::size_t index) const {
        return Cell{static_cast<int>(index / static_cast<std::size_t>(ncols)),
                    static_cast<int>(index % static_cast<std::size_t>(ncols))};
    }
};

/// Single-band raster with a nodata sentinel. NaN cells are treated as nodata too.
class Grid {
public:
    static constexpr double kDefaultNodata = -9999.0;

    Grid() = default;

    explicit Grid(GridGeometry geometry, double nodata = kDefaultNodata)
        : Grid(geometry, nodata, nodata) {}

    Grid(GridGeometry geometry, double nodata, double fill)
        : geometry_(geometry), nodata_(nodata) {
        geometry_.validate();
        values_.assign(geometry_.size(), fill);
    }

    Grid(GridGeometry geometry, double nodata, std::vector<double> values)
        : geometry_(geometry), nodata_(nodata), values_(std::move(values)) {
        geometry_.validate();
        if (values_.size() != geometry_.size())
            throw DataError("grid value count " + std::to_string(values_.size()) + " != ncols*nrows " +
                            std::to_string(geometry_.size()));
    }

    const GridGeometry& geometry() const { return geometry_; }
    int ncols() const { return geometry_.ncols; }
    int nrows() const { return geometry_.nrows; }
    double cellsize() const { return geometry_.cellsize; }
    double nodata() const { return nodata_; }
    std::size_t size() const { return values_.size(); }

    double at(int row, int col) const { return values_[geometry_.index({row, col})]; }
    double& at(int row, int col) { return values_[geometry_.index({row, col})]; }
    double at(Cell c) const { return values_[geometry_.index(c)]; }
    double& at(Cell c) { return values_[geometry_.index(c)]; }

    bool is_nodata_value(double v) const { return std::isnan(v) || v == nodata_; }
    bool is_nodata(int row, int col) const { return is_nodata_value(at(row, col)); }
    bool is_nodata(Cell c) const { return is_nodata_value(at(c)); }

    std::optional<double> value(Cell c) const {
        const double v = at(c);
        if (is_nodata_value(v)) return std::nullopt;
        return v;
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    std::size_t count_valid() const {
        std::size_t n = 0;
        for (double v : values_)
            if (!is_nodata_value(v)) ++n;
        return n;
    }

private:
    GridGeometry geometry_{};
    double nodata_ = kDefaultNodata;
    std::vector<double> values_ = std::vector<double>(1, kDefaultNodata);
};

/// Bilinear interpolation between the four surrounding cell centers.
/// Returns nullopt when any contributing neighbour is nodata; throws
/// OutOfBoundsError outside the hull of cell centers.
inline std::optional<double> bilinear_sample(const Grid& grid, double x, double y) {
    const auto& g = grid.geometry();
    const double u = (x - g.xll) / g.cellsize - 0.5;
    const double v = (g.ytop() - y) / g.cellsize - 0.5;
    constexpr double slack = 1e-9;
    const double umax = g.ncols - 1;
    const double vmax = g.nrows - 1;
    if (!(u >= -slack && u <= umax + slack && v >= -slack && v <= vmax + slack))
        throw OutOfBoundsError("point (" + std::to_string(x) + ", " + std::to_string(y) +
                               ") lies outside the grid's cell-center hull");
    const double uc = std::clamp(u, 0.0, umax);
    const double vc = std::clamp(v, 0.0, vmax);

    const int c0 = g.ncols == 1 ? 0 : std::min(static_cast<int>(std::floor(uc)), g.ncols - 2);
    const int r0 = g.nrows == 1 ? 0 : std::min(static_cast<int>(std::floor(vc)), g.nrows - 2);
    const int c1 = g.ncols == 1 ? 0 : c0 + 1;
    const int r1 = g.nrows == 1 ? 0 : r0 + 1;
    const double tx = uc - c0;
    const double ty = vc - r0;

    const double z00 = grid.at(r0, c0), z01 = grid.at(r0, c1);
    const double z10 = grid.at(r1, c0), z11 = grid.at(r1, c1);
    if (grid.is_nodata_value(z00) || grid.is_nodata_value(z01) || grid.is_nodata_value(z10) ||
        grid.is_nodata_value(z11))
        return std::nullopt;
    const double top = (1.0 - tx) * z00 + tx * z01;
    const double bottom = (1.0 - tx) * z10 + tx * z11;
    return (1.0 - ty) * top + ty * bottom;
}

} // namespace forestinv::geodata
