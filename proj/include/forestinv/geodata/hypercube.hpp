#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "forestinv/geodata/grid.hpp"

namespace forestinv::geodata {

/// Band-sequential reflectance cube. A NaN sample marks a nodata pixel.
class HyperCube {
public:
    HyperCube() = default;

    HyperCube(GridGeometry geometry, int nbands, std::vector<double> wavelengths = {})
        : geometry_(geometry), nbands_(nbands), wavelengths_(std::move(wavelengths)) {
        geometry_.validate();
        if (nbands_ < 1) throw DataError("cube must have at least one band");
        check_wavelengths();
        samples_.assign(static_cast<std::size_t>(nbands_) * geometry_.size(), 0.0);
    }

    HyperCube(GridGeometry geometry, int nbands, std::vector<double> wavelengths, std::vector<double> samples)
        : geometry_(geometry), nbands_(nbands), wavelengths_(std::move(wavelengths)), samples_(std::move(samples)) {
        geometry_.validate();
        if (nbands_ < 1) throw DataError("cube must have at least one band");
        check_wavelengths();
        if (samples_.size() != static_cast<std::size_t>(nbands_) * geometry_.size())
            throw DataError("cube sample count does not match bands x lines x samples");
    }

    const GridGeometry& geometry() const { return geometry_; }
    int ncols() const { return geometry_.ncols; }
    int nrows() const { return geometry_.nrows; }
    int nbands() const { return nbands_; }
    std::size_t pixel_count() const { return geometry_.size(); }
    const std::vector<double>& wavelengths() const { return wavelengths_; }

    double sample(int band, std::size_t pixel) const { return samples_[offset(band, pixel)]; }
    double& sample(int band, std::size_t pixel) { return samples_[offset(band, pixel)]; }
    double sample(int band, int row, int col) const { return sample(band, geometry_.index({row, col})); }
    double& sample(int band, int row, int col) { return sample(band, geometry_.index({row, col})); }

    std::span<const double> band(int b) const {
        return std::span<const double>(samples_).subspan(static_cast<std::size_t>(b) * pixel_count(), pixel_count());
    }
    std::span<double> band(int b) {
        return std::span<double>(samples_).subspan(static_cast<std::size_t>(b) * pixel_count(), pixel_count());
    }

    std::vector<double> spectrum(std::size_t pixel) const {
        std::vector<double> s(static_cast<std::size_t>(nbands_));
        for (int b = 0; b < nbands_; ++b) s[static_cast<std::size_t>(b)] = sample(b, pixel);
        return s;
    }

    bool pixel_is_nodata(std::size_t pixel) const {
        for (int b = 0; b < nbands_; ++b)
            if (std::isnan(sample(b, pixel))) return true;
        return false;
    }

    const std::vector<double>& samples() const { return samples_; }

private:
    std::size_t offset(int band, std::size_t pixel) const {
        return static_cast<std::size_t>(band) * pixel_count() + pixel;
    }

    void check_wavelengths() const {
        if (wavelengths_.empty()) return;
        if (wavelengths_.size() != static_cast<std::size_t>(nbands_))
            throw DataError("wavelength list length does not match band count");
        for (std::size_t i = 1; i < wavelengths_.size(); ++i)
            if (!(wavelengths_[i] > wavelengths_[i - 1])) throw DataError("wavelengths must be strictly increasing");
    }

    GridGeometry geometry_{};
    int nbands_ = 1;
    std::vector<double> wavelengths_;
    std::vector<double> samples_ = std::vector<double>(1, 0.0);
};

} // namespace forestinv::geodata
