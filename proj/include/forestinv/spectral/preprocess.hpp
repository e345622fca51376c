#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "forestinv/geodata/hypercube.hpp"

namespace forestinv::spectral {

using geodata::HyperCube;

/// Keeps bands [drop_head, nbands - drop_tail).
inline HyperCube trim_bands(const HyperCube& cube, int drop_head, int drop_tail) {
    if (drop_head < 0 || drop_tail < 0) throw DataError("band drop counts must be >= 0");
    if (drop_head + drop_tail >= cube.nbands())
        throw DataError("cannot drop " + std::to_string(drop_head) + " + " + std::to_string(drop_tail) + " bands from a " +
                        std::to_string(cube.nbands()) + "-band cube");
    const int keep = cube.nbands() - drop_head - drop_tail;
    std::vector<double> wl;
    if (!cube.wavelengths().empty())
        wl.assign(cube.wavelengths().begin() + drop_head, cube.wavelengths().begin() + drop_head + keep);
    const std::size_t np = cube.pixel_count();
    std::vector<double> samples(cube.samples().begin() + static_cast<std::ptrdiff_t>(drop_head * np),
                                cube.samples().begin() + static_cast<std::ptrdiff_t>((drop_head + keep) * np));
    return HyperCube(cube.geometry(), keep, std::move(wl), std::move(samples));
}

struct NormalizeResult {
    HyperCube cube;
    std::size_t zero_mean_pixels = 0; // set to nodata
};

/// Divides every pixel's spectrum by that pixel's own mean over all bands.
/// Pixels already holding nodata stay nodata; zero-mean pixels become nodata.
inline NormalizeResult normalize_spectrum(const HyperCube& cube) {
    NormalizeResult out{cube, 0};
    const int nb = cube.nbands();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
        double sum = 0.0;
        for (int b = 0; b < nb; ++b) sum += cube.sample(b, p);
        if (std::isnan(sum)) continue;
        const double mean = sum / nb;
        if (mean == 0.0) {
            for (int b = 0; b < nb; ++b) out.cube.sample(b, p) = nan;
            ++out.zero_mean_pixels;
            continue;
        }
        for (int b = 0; b < nb; ++b) out.cube.sample(b, p) = cube.sample(b, p) / mean;
    }
    return out;
}

} // namespace forestinv::spectral
