#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

#include "forestinv/classify/samples.hpp"

namespace forestinv::classify {

/// Minimum-distance classifier: one mean vector per species.
struct CentroidModel {
    std::vector<int> bands;
    std::vector<std::string> species; // sorted
    std::vector<Eigen::VectorXd> centroids;
};

inline CentroidModel train_centroid(const SampleSet& samples, std::vector<int> bands = {}) {
    if (samples.size() == 0) throw DataError("no training samples");
    CentroidModel m;
    m.bands = std::move(bands);
    m.species = species_of(samples);
    std::vector<std::size_t> n(m.species.size(), 0);
    m.centroids.assign(m.species.size(), Eigen::VectorXd::Zero(samples.dim()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(m.species.begin(), m.species.end(), samples.labels[i]) - m.species.begin());
        m.centroids[k] += samples.x.row(static_cast<Eigen::Index>(i)).transpose();
        ++n[k];
    }
    for (std::size_t k = 0; k < m.species.size(); ++k) m.centroids[k] /= static_cast<double>(n[k]);
    return m;
}

/// Index of the nearest centroid; ties go to the first (lexicographically smallest) species.
inline std::size_t predict_centroid_index(const CentroidModel& m, const Eigen::VectorXd& x) {
    if (m.centroids.empty()) throw DataError("empty centroid model");
    if (x.size() != m.centroids.front().size())
        throw DataError("feature dimension " + std::to_string(x.size()) + " != model dimension " +
                        std::to_string(m.centroids.front().size()));
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.centroids.size(); ++k) {
        const double d = (x - m.centroids[k]).squaredNorm();
        if (d < best_d) best_d = d, best = k;
    }
    return best;
}

inline std::string predict_centroid(const CentroidModel& m, const Eigen::VectorXd& x) {
    return m.species[predict_centroid_index(m, x)];
}

} // namespace forestinv::classify
