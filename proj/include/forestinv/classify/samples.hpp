#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "forestinv/common/random.hpp"
#include "forestinv/geodata/hypercube.hpp"
#include "forestinv/spectral/separability.hpp"

namespace forestinv::classify {

using geodata::HyperCube;

/// Labelled feature vectors, one row per sample.
struct SampleSet {
    Eigen::MatrixXd x;
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }
    Eigen::Index dim() const { return x.cols(); }
};

inline Eigen::VectorXd pixel_features(const HyperCube& cube, std::size_t pixel, std::span<const int> bands) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(bands.size()));
    for (std::size_t j = 0; j < bands.size(); ++j) f(static_cast<Eigen::Index>(j)) = cube.sample(bands[j], pixel);
    return f;
}

/// Builds a sample set from per-species pixel lists. When `max_per_class` is
/// nonzero, larger classes are subsampled without replacement; species are
/// visited in order and drawn from one generator, so the result is seed-stable.
inline SampleSet gather_samples(const HyperCube& cube, const spectral::PixelSets& pixels, std::span<const int> bands,
                                std::size_t max_per_class = 0, std::uint64_t seed = 0) {
    for (int b : bands)
        if (b < 0 || b >= cube.nbands()) throw DataError("band index " + std::to_string(b) + " out of range");
    Rng rng(seed);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> chosen;
    std::size_t total = 0;
    for (const auto& [species, pix] : pixels) {
        std::vector<std::size_t> p = pix;
        if (max_per_class > 0 && p.size() > max_per_class) {
            rng.shuffle(p);
            p.resize(max_per_class);
            std::sort(p.begin(), p.end());
        }
        total += p.size();
        chosen.emplace_back(species, std::move(p));
    }
    SampleSet s;
    s.x.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(bands.size()));
    Eigen::Index row = 0;
    for (const auto& [species, pix] : chosen)
        for (auto p : pix) {
            s.x.row(row++) = pixel_features(cube, p, bands).transpose();
            s.labels.push_back(species);
        }
    return s;
}

/// Sorted distinct labels.
inline std::vector<std::string> species_of(const SampleSet& s) {
    std::vector<std::string> sp = s.labels;
    std::sort(sp.begin(), sp.end());
    sp.erase(std::unique(sp.begin(), sp.end()), sp.end());
    return sp;
}

} // namespace forestinv::classify
