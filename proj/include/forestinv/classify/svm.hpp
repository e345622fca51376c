#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "forestinv/classify/samples.hpp"
#include "forestinv/classify/smo.hpp"
#include "forestinv/common/parallel.hpp"

namespace forestinv::classify {

struct SvmParams {
    double C = 10.0;
    double gamma = 0.0; // 0: 1 / n_features
    double eps = 1e-3;
    std::size_t cache_bytes = 64u << 20;
    int threads = 1;
};

/// One-vs-one RBF SVM over standardized features.
struct SvmModel {
    struct Pair {
        std::size_t positive = 0; // index into species; the lower code is the +1 side
        std::size_t negative = 0;
        BinarySvm svm;
    };

    std::vector<int> bands;
    std::vector<std::string> species; // sorted
    Eigen::RowVectorXd mean;          // per-feature training mean
    Eigen::RowVectorXd scale;         // per-feature population std (1 where constant)
    double C = 10.0;
    double gamma = 1.0;
    std::vector<Pair> pairs;

    Eigen::RowVectorXd standardize(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        return (x - mean).cwiseQuotient(scale);
    }
};

struct SvmTrainingReport {
    std::vector<SmoDiagnostics> diagnostics; // parallel to model.pairs
    std::vector<std::string> warnings;
};

struct SvmTrainingResult {
    SvmModel model;
    SvmTrainingReport report;
};

inline SvmTrainingResult train_svm(const SampleSet& samples, const SvmParams& params, std::vector<int> bands = {}) {
    if (!(params.C > 0)) throw ConfigError("SVM cost C must be > 0");
    if (params.gamma < 0) throw ConfigError("SVM gamma must be > 0");
    SvmTrainingResult out;
    auto& m = out.model;
    m.bands = std::move(bands);
    m.species = species_of(samples);
    if (m.species.size() < 2) throw DataError("SVM training needs at least two species");
    const Eigen::Index d = samples.dim();
    if (d < 1) throw DataError("SVM training needs at least one feature");
    m.C = params.C;
    m.gamma = params.gamma > 0 ? params.gamma : 1.0 / static_cast<double>(d);

    const double n = static_cast<double>(samples.size());
    m.mean = samples.x.colwise().mean();
    m.scale = ((samples.x.rowwise() - m.mean).array().square().colwise().sum() / n).sqrt().matrix();
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(m.scale(j) > 0)) m.scale(j) = 1.0;
    RowMatrix z = (samples.x.rowwise() - m.mean).array().rowwise() / m.scale.array();

    std::vector<std::vector<std::size_t>> members(m.species.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(m.species.begin(), m.species.end(), samples.labels[i]) - m.species.begin());
        members[k].push_back(i);
    }
    for (std::size_t a = 0; a < m.species.size(); ++a)
        for (std::size_t b = a + 1; b < m.species.size(); ++b) m.pairs.push_back({a, b, {}});

    out.report.diagnostics.resize(m.pairs.size());
    SmoOptions opt;
    opt.C = m.C;
    opt.gamma = m.gamma;
    opt.eps = params.eps;
    opt.cache_bytes = params.cache_bytes;
    opt.record_trace = false;
    parallel_for(m.pairs.size(), params.threads, [&](std::size_t p) {
        auto& pair = m.pairs[p];
        const auto& pa = members[pair.positive];
        const auto& pb = members[pair.negative];
        RowMatrix x(static_cast<Eigen::Index>(pa.size() + pb.size()), d);
        std::vector<int> y;
        Eigen::Index r = 0;
        for (auto i : pa) x.row(r++) = z.row(static_cast<Eigen::Index>(i)), y.push_back(1);
        for (auto i : pb) x.row(r++) = z.row(static_cast<Eigen::Index>(i)), y.push_back(-1);
        auto res = train_binary_svm(x, y, opt);
        pair.svm = std::move(res.model);
        out.report.diagnostics[p] = std::move(res.diagnostics);
    });
    for (std::size_t p = 0; p < m.pairs.size(); ++p)
        if (!out.report.diagnostics[p].converged)
            out.report.warnings.push_back("SMO hit the iteration limit for pair " + m.species[m.pairs[p].positive] +
                                          "/" + m.species[m.pairs[p].negative]);
    return out;
}

/// Voting over all pairwise models. Vote ties go to the larger summed winning
/// margin, then to the lexicographically smaller species.
inline std::size_t predict_svm_index(const SvmModel& m, const Eigen::Ref<const Eigen::RowVectorXd>& raw) {
    if (raw.size() != m.mean.size())
        throw DataError("feature dimension " + std::to_string(raw.size()) + " != model dimension " +
                        std::to_string(m.mean.size()));
    const Eigen::RowVectorXd z = m.standardize(raw);
    std::vector<int> votes(m.species.size(), 0);
    std::vector<double> margin(m.species.size(), 0.0);
    for (const auto& p : m.pairs) {
        const double f = p.svm.decision(z);
        const std::size_t w = f > 0 ? p.positive : p.negative;
        ++votes[w];
        margin[w] += std::abs(f);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < votes.size(); ++k)
        if (votes[k] > votes[best] || (votes[k] == votes[best] && margin[k] > margin[best])) best = k;
    return best;
}

inline std::string predict_svm(const SvmModel& m, const Eigen::Ref<const Eigen::RowVectorXd>& raw) {
    return m.species[predict_svm_index(m, raw)];
}

} // namespace forestinv::classify
