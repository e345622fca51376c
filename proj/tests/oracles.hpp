#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "forestinv/common/random.hpp"
#include "forestinv/spectral/separability.hpp"

namespace forestinv::test {

/// Textbook Bhattacharyya/JM with explicit inverse and determinants.
inline double jm_oracle(const Eigen::VectorXd& ma, const Eigen::MatrixXd& sa, const Eigen::VectorXd& mb,
                        const Eigen::MatrixXd& sb) {
    const Eigen::MatrixXd s = 0.5 * (sa + sb);
    const Eigen::VectorXd d = ma - mb;
    const double term1 = 0.125 * d.dot(s.inverse() * d);
    const double term2 = 0.5 * std::log(s.determinant() / std::sqrt(sa.determinant() * sb.determinant()));
    return 2.0 * (1.0 - std::exp(-(term1 + term2)));
}

inline double subset_score_oracle(const std::vector<spectral::GaussianClassStats>& stats, const std::vector<int>& subset) {
    const auto k = static_cast<Eigen::Index>(subset.size());
    auto slice = [&](const spectral::GaussianClassStats& s, Eigen::VectorXd& m, Eigen::MatrixXd& c) {
        m.resize(k);
        c.resize(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            m(i) = s.mean(subset[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < k; ++j)
                c(i, j) = s.covariance(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]);
        }
    };
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < stats.size(); ++a)
        for (std::size_t b = a + 1; b < stats.size(); ++b) {
            Eigen::VectorXd ma, mb;
            Eigen::MatrixXd ca, cb;
            slice(stats[a], ma, ca);
            slice(stats[b], mb, cb);
            sum += jm_oracle(ma, ca, mb, cb);
            ++pairs;
        }
    return sum / pairs;
}

struct ExhaustiveResult {
    std::vector<int> subset;
    double score = -1.0;
};

/// Best size-k subset of [0, dim) by full enumeration.
inline ExhaustiveResult exhaustive_best(const std::vector<spectral::GaussianClassStats>& stats, int k) {
    const int dim = static_cast<int>(stats.front().mean.size());
    ExhaustiveResult best;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        const double s = subset_score_oracle(stats, idx);
        if (s > best.score + 1e-12) best = {idx, s};
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == dim - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

inline Eigen::MatrixXd random_spd(Rng& rng, int dim, double floor = 0.05) {
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
    return a * a.transpose() / dim + floor * Eigen::MatrixXd::Identity(dim, dim);
}

struct SelectionProblem {
    std::vector<spectral::GaussianClassStats> stats;
    std::vector<int> informative;
    int k = 0;
};

/// Classes share correlated noise on every band; `k` planted bands carry class-specific mean shifts.
inline SelectionProblem random_selection_problem(std::uint64_t seed) {
    Rng rng(seed);
    SelectionProblem p;
    const int dim = 5 + static_cast<int>(rng.below(6));      // 5..10
    p.k = 2 + static_cast<int>(rng.below(3));                // 2..4
    const int classes = 3 + static_cast<int>(rng.below(2));  // 3..4
    std::vector<int> order(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    p.informative.assign(order.begin(), order.begin() + p.k);
    for (int c = 0; c < classes; ++c) {
        spectral::GaussianClassStats s;
        s.species_code = std::string(1, static_cast<char>('A' + c));
        s.n_samples = 100;
        s.mean = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < dim; ++i) s.mean(i) = 0.1 * rng.normal();
        for (int b : p.informative) s.mean(b) += rng.uniform(-1.5, 1.5);
        s.covariance = random_spd(rng, dim);
        p.stats.push_back(std::move(s));
    }
    return p;
}

} // namespace forestinv::test

namespace forestinv::test {

struct BinaryFixture {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x;
    std::vector<int> y;
};

/// `per` points uniform in a disc of `radius` around each center, labelled by `labels`.
inline BinaryFixture disc_clusters(const std::vector<std::array<double, 2>>& centers, const std::vector<int>& labels,
                                   double radius, int per, std::uint64_t seed) {
    Rng rng(seed);
    BinaryFixture f;
    f.x.resize(static_cast<Eigen::Index>(centers.size()) * per, 2);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (int i = 0; i < per; ++i) {
            const double r = radius * std::sqrt(rng.uniform()), t = 2.0 * std::numbers::pi * rng.uniform();
            f.x(row, 0) = centers[c][0] + r * std::cos(t);
            f.x(row, 1) = centers[c][1] + r * std::sin(t);
            f.y.push_back(labels[c]);
            ++row;
        }
    return f;
}

/// Two separable blobs centred at (0,0) and (5,5), radius 0.5, 20 points each.
inline BinaryFixture blobs_fixture(std::uint64_t seed = 1) {
    return disc_clusters({{0, 0}, {5, 5}}, {1, -1}, 0.5, 20, seed);
}

/// Four clusters on the corners of a square with alternating labels.
inline BinaryFixture xor_fixture(std::uint64_t seed = 2) {
    return disc_clusters({{0, 0}, {3, 3}, {0, 3}, {3, 0}}, {1, 1, -1, -1}, 0.5, 20, seed);
}

} // namespace forestinv::test
