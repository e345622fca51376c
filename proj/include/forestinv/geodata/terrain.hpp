#pragma once

#include <cmath>
#include <numbers>

#include "forestinv/geodata/grid.hpp"

namespace forestinv::geodata {

struct TerrainDerivatives {
    Grid slope;           // degrees
    Grid aspect;          // degrees clockwise from north, direction of steepest descent
    Grid elevation_class; // floor(z / class_width)
};

// Horn (1981) 3x3 weighted finite differences. Border cells and any cell with
// a nodata neighbour are nodata; aspect is nodata on flat cells.
inline TerrainDerivatives terrain_derivatives(const Grid& dtm, double class_width = 100.0) {
    if (!(class_width > 0)) throw DataError("elevation class width must be > 0");
    const auto& g = dtm.geometry();
    if (g.ncols < 3 || g.nrows < 3) throw DataError("terrain derivatives need at least a 3x3 DTM");

    TerrainDerivatives out{Grid(g, dtm.nodata()), Grid(g, dtm.nodata()), Grid(g, dtm.nodata())};
    const double cs = g.cellsize;
    constexpr double rad2deg = 180.0 / std::numbers::pi;

    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            if (auto z = dtm.value({r, c})) out.elevation_class.at(r, c) = std::floor(*z / class_width);
            if (r == 0 || c == 0 || r == g.nrows - 1 || c == g.ncols - 1) continue;

            double w[3][3];
            bool valid = true;
            for (int dr = -1; dr <= 1 && valid; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const double v = dtm.at(r + dr, c + dc);
                    if (dtm.is_nodata_value(v)) {
                        valid = false;
                        break;
                    }
                    w[dr + 1][dc + 1] = v;
                }
            if (!valid) continue;

            // Row 0 of the window is the northern neighbour row.
            const double dzdx = ((w[0][2] + 2 * w[1][2] + w[2][2]) - (w[0][0] + 2 * w[1][0] + w[2][0])) / (8 * cs);
            const double dzdy = ((w[0][0] + 2 * w[0][1] + w[0][2]) - (w[2][0] + 2 * w[2][1] + w[2][2])) / (8 * cs);
            const double grad = std::hypot(dzdx, dzdy);
            out.slope.at(r, c) = std::atan(grad) * rad2deg;
            if (grad > 0) {
                double a = std::atan2(-dzdx, -dzdy) * rad2deg;
                if (a < 0) a += 360.0;
                if (a >= 360.0) a -= 360.0;
                out.aspect.at(r, c) = a;
            }
        }
    }
    return out;
}

} // namespace forestinv::geodata
