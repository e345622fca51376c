#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>

#include "forestinv/classify.hpp"
#include "oracles.hpp"

using namespace forestinv;
using namespace forestinv::classify;
using geodata::Grid;
using geodata::GridGeometry;

namespace {

SampleSet samples(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& labels) {
    SampleSet s;
    s.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    s.labels = labels;
    return s;
}

SampleSet from_fixture(const test::BinaryFixture& f) {
    SampleSet s;
    s.x = f.x;
    for (int y : f.y) s.labels.push_back(y > 0 ? "A" : "B");
    return s;
}

double training_accuracy(const BinarySvm& m, const test::BinaryFixture& f) {
    int ok = 0;
    for (Eigen::Index i = 0; i < f.x.rows(); ++i) ok += (m.decision(f.x.row(i)) > 0) == (f.y[static_cast<std::size_t>(i)] > 0);
    return static_cast<double>(ok) / static_cast<double>(f.x.rows());
}

/// Spectrally separated synthetic cube: species k owns a column stripe; truth grid holds k + 1.
struct StripeScene {
    HyperCube cube;
    std::vector<int> truth; // species index per pixel
    spectral::PixelSets train;
};

StripeScene stripe_scene(int nspecies, int nbands, double noise, std::uint64_t seed) {
    Rng rng(seed);
    const int w = 12 * nspecies, h = 20;
    StripeScene s{HyperCube(GridGeometry{w, h, 0, 0, 1.0}, nbands), {}, {}};
    std::vector<std::vector<double>> sig(static_cast<std::size_t>(nspecies), std::vector<double>(static_cast<std::size_t>(nbands)));
    for (auto& v : sig)
        for (auto& b : v) b = rng.uniform(0.1, 0.5);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int k = c / 12;
            const auto p = s.cube.geometry().index({r, c});
            for (int b = 0; b < nbands; ++b)
                s.cube.sample(b, p) = sig[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] + rng.normal(0, noise);
            s.truth.push_back(k);
            if (r % 4 == 0) s.train[std::string(1, static_cast<char>('A' + k))].push_back(p);
        }
    return s;
}

} // namespace

TEST(Centroid, Examples) {
    const auto m = train_centroid(samples({{0, 0}, {2, 0}, {10, 10}}, {"A", "A", "B"}));
    EXPECT_EQ(m.species, (std::vector<std::string>{"A", "B"}));
    EXPECT_EQ(m.centroids[0], Eigen::Vector2d(1, 0));
    EXPECT_EQ(m.centroids[1], Eigen::Vector2d(10, 10));
    EXPECT_EQ(predict_centroid(m, Eigen::Vector2d(1, 1)), "A");
    EXPECT_EQ(predict_centroid(m, Eigen::Vector2d(10, 10)), "B");
    // (5.5, 5) is equidistant from (1,0) and (10,10)
    EXPECT_EQ(predict_centroid(m, Eigen::Vector2d(5.5, 5)), "A");
    EXPECT_THROW(predict_centroid(m, Eigen::Vector3d(1, 1, 1)), DataError);
    EXPECT_THROW(train_centroid(SampleSet{}), DataError);
}

TEST(Centroid, TranslationEquivarianceAndScaleInvariance) {
    Rng rng(4);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({rng.normal(i % 3, 1), rng.normal(2 * (i % 3), 1), rng.normal()});
        labels.push_back(std::string(1, static_cast<char>('A' + i % 3)));
    }
    const auto base = train_centroid(samples(rows, labels));
    const Eigen::Vector3d v(3, -2, 7);
    auto shifted = rows;
    for (auto& r : shifted)
        for (int j = 0; j < 3; ++j) r[static_cast<std::size_t>(j)] += v(j);
    const auto moved = train_centroid(samples(shifted, labels));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_TRUE(moved.centroids[k].isApprox(base.centroids[k] + v, 1e-12));

    auto scaled = base;
    for (auto& c : scaled.centroids) c *= 4.5;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Vector3d x(rng.normal(1, 2), rng.normal(2, 2), rng.normal());
        EXPECT_EQ(predict_centroid_index(base, x), predict_centroid_index(scaled, (4.5 * x).eval()));
    }
}

TEST(Smo, BlobsSeparatedWithKktAndGap) {
    const auto f = test::blobs_fixture();
    SmoOptions opt;
    opt.C = 10;
    opt.gamma = 0.5;
    const auto res = train_binary_svm(f.x, f.y, opt);
    const auto& d = res.diagnostics;
    EXPECT_TRUE(d.converged);
    EXPECT_EQ(training_accuracy(res.model, f), 1.0);
    EXPECT_LE(d.max_kkt_violation, 1e-3);
    EXPECT_LE(d.duality_gap, 1e-2 * std::abs(d.dual_objective));
    double eq = 0;
    for (std::size_t i = 0; i < res.alpha.size(); ++i) {
        EXPECT_GE(res.alpha[i], 0.0);
        EXPECT_LE(res.alpha[i], opt.C);
        eq += res.alpha[i] * f.y[i];
    }
    EXPECT_NEAR(eq, 0.0, 1e-6);
    for (double c : res.model.coef) EXPECT_LE(std::abs(c), opt.C);
}

TEST(Smo, XorSolvedByRbf) {
    const auto f = test::xor_fixture();
    SmoOptions opt;
    opt.C = 10;
    opt.gamma = 1.0;
    const auto res = train_binary_svm(f.x, f.y, opt);
    EXPECT_TRUE(res.diagnostics.converged);
    EXPECT_EQ(training_accuracy(res.model, f), 1.0);
    EXPECT_LE(res.diagnostics.max_kkt_violation, 1e-3);
    EXPECT_LE(res.diagnostics.duality_gap, 1e-2 * std::abs(res.diagnostics.dual_objective));
}

TEST(Smo, DualObjectiveNonDecreasing) {
    for (const auto& f : {test::blobs_fixture(5), test::xor_fixture(6)}) {
        SmoOptions opt;
        opt.gamma = 1.0;
        const auto res = train_binary_svm(f.x, f.y, opt);
        const auto& tr = res.diagnostics.objective_trace;
        ASSERT_FALSE(tr.empty());
        for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GE(tr[i], tr[i - 1] - 1e-12);
        EXPECT_NEAR(tr.back(), res.diagnostics.dual_objective, 1e-9 * std::max(1.0, std::abs(tr.back())));
    }
}

TEST(Smo, DuplicatingSamplesKeepsDecisionFunction) {
    for (const auto& f : {test::blobs_fixture(7), test::xor_fixture(8)}) {
        SmoOptions opt;
        opt.gamma = 1.0;
        opt.eps = 1e-10;
        const auto once = train_binary_svm(f.x, f.y, opt);
        for (double a : once.alpha) ASSERT_LT(a, opt.C) << "fixture must have no bounded multipliers";
        test::BinaryFixture twice;
        twice.x.resize(2 * f.x.rows(), 2);
        twice.x << f.x, f.x;
        twice.y = f.y;
        twice.y.insert(twice.y.end(), f.y.begin(), f.y.end());
        const auto dup = train_binary_svm(twice.x, twice.y, opt);
        for (double px = -1; px <= 6; px += 0.5)
            for (double py = -1; py <= 6; py += 0.5) {
                const Eigen::RowVector2d p(px, py);
                EXPECT_NEAR(once.model.decision(p), dup.model.decision(p), 1e-6);
            }
    }
}

TEST(Smo, InputValidation) {
    const auto f = test::blobs_fixture();
    SmoOptions opt;
    std::vector<int> same(f.y.size(), 1);
    EXPECT_THROW(train_binary_svm(f.x, same, opt), DataError);
    std::vector<int> bad = f.y;
    bad[0] = 2;
    EXPECT_THROW(train_binary_svm(f.x, bad, opt), DataError);
    opt.C = 0;
    EXPECT_THROW(train_binary_svm(f.x, f.y, opt), ConfigError);
}

TEST(Svm, TwoClassReducesToBinary) {
    const auto f = test::xor_fixture(3);
    const auto s = from_fixture(f);
    SvmParams params;
    params.gamma = 0.8;
    const auto res = train_svm(s, params);
    ASSERT_EQ(res.model.pairs.size(), 1u);
    RowMatrix z = (f.x.rowwise() - res.model.mean).array().rowwise() / res.model.scale.array();
    SmoOptions opt;
    opt.gamma = 0.8;
    opt.C = params.C;
    const auto bin = train_binary_svm(z, f.y, opt);
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const Eigen::RowVector2d p(rng.uniform(-1, 4), rng.uniform(-1, 4));
        const double fb = bin.model.decision(res.model.standardize(p));
        EXPECT_EQ(res.model.pairs[0].svm.decision(res.model.standardize(p)), fb);
        EXPECT_EQ(predict_svm(res.model, p), fb > 0 ? "A" : "B");
    }
}

TEST(Svm, DefaultGammaAndStandardization) {
    const auto s = samples({{0, 10}, {1, 30}, {5, 10}, {6, 30}}, {"A", "A", "B", "B"});
    const auto res = train_svm(s, SvmParams{});
    EXPECT_DOUBLE_EQ(res.model.gamma, 0.5);
    EXPECT_DOUBLE_EQ(res.model.mean(0), 3.0);
    EXPECT_DOUBLE_EQ(res.model.scale(1), 10.0); // population std
    EXPECT_THROW(train_svm(samples({{0}, {1}}, {"A", "A"}), SvmParams{}), DataError);
}

TEST(Svm, SupportSampleDeepInsideClass) {
    const auto f = test::disc_clusters({{0, 0}, {4, 0}, {2, 4}}, {0, 1, 2}, 0.8, 25, 9);
    SampleSet s;
    s.x = f.x;
    for (int y : f.y) s.labels.push_back(std::string(1, static_cast<char>('A' + y)));
    const auto res = train_svm(s, SvmParams{});
    for (Eigen::Index i = 0; i < f.x.rows(); ++i) EXPECT_EQ(predict_svm(res.model, f.x.row(i)), s.labels[static_cast<std::size_t>(i)]);
    EXPECT_EQ(predict_svm(res.model, Eigen::RowVector2d(0, 0)), "A");
}

TEST(Svm, CyclicVoteTieUsesMargin) {
    SvmModel m;
    m.species = {"A", "B", "C"};
    m.mean = Eigen::RowVectorXd::Zero(1);
    m.scale = Eigen::RowVectorXd::Ones(1);
    auto pair = [](std::size_t a, std::size_t b, double f) {
        SvmModel::Pair p;
        p.positive = a;
        p.negative = b;
        p.svm.support.resize(0, 1);
        p.svm.rho = -f;
        return p;
    };
    // A beats B, C beats A, B beats C: one vote each
    m.pairs = {pair(0, 1, 0.5), pair(0, 2, -2.0), pair(1, 2, 1.0)};
    const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(1);
    EXPECT_EQ(predict_svm(m, x), "C");
    m.pairs = {pair(0, 1, 1.0), pair(0, 2, -1.0), pair(1, 2, 1.0)};
    EXPECT_EQ(predict_svm(m, x), "A");
}

TEST(ModelIo, RoundTripPreservesPredictions) {
    const auto scene = stripe_scene(3, 6, 0.01, 5);
    const std::vector<int> bands{0, 2, 5};
    const auto s = gather_samples(scene.cube, scene.train, bands);
    const Model svm = train_svm(s, SvmParams{}, bands).model;
    const Model cen = train_centroid(s, bands);
    for (const auto& m : {svm, cen}) {
        const auto back = parse_model(format_model(m));
        EXPECT_EQ(back.index(), m.index());
        EXPECT_EQ(model_bands(back), bands);
        EXPECT_EQ(format_model(back), format_model(m));
        for (std::size_t p = 0; p < scene.cube.pixel_count(); p += 7) {
            const auto x = pixel_features(scene.cube, p, bands);
            EXPECT_EQ(predict_index(back, x), predict_index(m, x));
        }
    }
    EXPECT_THROW(parse_model("forestinv-model 2\n"), ParseError);
    EXPECT_THROW(parse_model("garbage"), ParseError);
}

TEST(GatherSamples, CapIsSeededAndSorted) {
    const auto scene = stripe_scene(2, 3, 0.01, 6);
    const std::vector<int> bands{0, 1, 2};
    const auto a = gather_samples(scene.cube, scene.train, bands, 10, 99);
    const auto b = gather_samples(scene.cube, scene.train, bands, 10, 99);
    EXPECT_EQ(a.size(), 20u);
    EXPECT_EQ(a.x, b.x);
    const auto c = gather_samples(scene.cube, scene.train, bands, 10, 100);
    EXPECT_NE(a.x, c.x);
    const int bad[] = {9};
    EXPECT_THROW(gather_samples(scene.cube, scene.train, bad), DataError);
}

TEST(ClassifyImage, SeparatedSpeciesAccuracy) {
    const auto scene = stripe_scene(3, 8, 0.01, 7);
    const std::vector<int> bands{0, 1, 2, 3, 4, 5, 6, 7};
    const auto s = gather_samples(scene.cube, scene.train, bands);
    for (const Model& m : {Model(train_svm(s, SvmParams{}, bands).model), Model(train_centroid(s, bands))}) {
        const auto map = classify_image(scene.cube, m);
        std::size_t ok = 0;
        for (std::size_t p = 0; p < scene.cube.pixel_count(); ++p)
            ok += map.labels.values()[p] == scene.truth[p] + 1;
        EXPECT_GE(static_cast<double>(ok) / static_cast<double>(scene.cube.pixel_count()), 0.99);
    }
}

TEST(ClassifyImage, MaskAndSingleSpecies) {
    const auto scene = stripe_scene(2, 4, 0.01, 8);
    const auto s = gather_samples(scene.cube, scene.train, std::vector<int>{});
    const Model m = train_centroid(gather_samples(scene.cube, scene.train, std::vector<int>{0, 1, 2, 3}));
    Grid none(scene.cube.geometry());
    EXPECT_EQ(classify_image(scene.cube, m, &none).labels.count_valid(), 0u);
    Grid half(scene.cube.geometry(), Grid::kDefaultNodata, 0.0);
    for (int c = 0; c < half.ncols(); ++c) half.at(0, c) = 1.0;
    EXPECT_EQ(classify_image(scene.cube, m, &half).labels.count_valid(), static_cast<std::size_t>(half.ncols()));
    Grid wrong(GridGeometry{3, 3, 0, 0, 1.0});
    EXPECT_THROW(classify_image(scene.cube, m, &wrong), DataError);

    spectral::PixelSets only{{"PIAB", scene.train.at("A")}};
    const Model single = train_centroid(gather_samples(scene.cube, only, std::vector<int>{0, 1}), {0, 1});
    const auto map = classify_image(scene.cube, single);
    for (double v : map.labels.values()) EXPECT_EQ(v, 1.0);
}

TEST(ClassifyImage, PixelOrderAndThreadsDoNotMatter) {
    const auto scene = stripe_scene(3, 5, 0.05, 9);
    const std::vector<int> bands{0, 1, 2, 3, 4};
    const Model m = train_svm(gather_samples(scene.cube, scene.train, bands), SvmParams{}, bands).model;
    const auto base = classify_image(scene.cube, m, nullptr, 1);
    const auto par = classify_image(scene.cube, m, nullptr, 4);
    for (std::size_t p = 0; p < base.labels.size(); ++p) EXPECT_EQ(base.labels.values()[p], par.labels.values()[p]);

    // spatially permute pixels; labels must follow
    std::vector<std::size_t> perm(scene.cube.pixel_count());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(1);
    rng.shuffle(perm);
    HyperCube shuffled(scene.cube.geometry(), scene.cube.nbands());
    for (int b = 0; b < scene.cube.nbands(); ++b)
        for (std::size_t p = 0; p < perm.size(); ++p) shuffled.sample(b, perm[p]) = scene.cube.sample(b, p);
    const auto moved = classify_image(shuffled, m);
    for (std::size_t p = 0; p < perm.size(); ++p) EXPECT_EQ(moved.labels.values()[perm[p]], base.labels.values()[p]);
}

TEST(Legend, RoundTripAndErrors) {
    const std::vector<std::string> legend{"ABAL", "FASY", "PIAB"};
    EXPECT_EQ(parse_legend(format_legend(legend)), legend);
    EXPECT_THROW(parse_legend("label,species_code\n2,ABAL\n"), ParseError);
}

TEST(Majority, VotesTiesAndEmptyCrowns) {
    GridGeometry g{8, 1, 0, 0, 1.0};
    LabelMap map{Grid(g), {"A", "B"}};
    crowns::Segmentation seg{{}, Grid(g)};
    auto crown = [&](int id, std::vector<int> cols) {
        crowns::CrownRecord c;
        c.crown_id = id;
        for (int col : cols) c.cells.push_back({0, col});
        seg.crowns.push_back(c);
    };
    // crown 1: A A A B; crown 2: B A (tie); crown 3: nodata
    const double labels[] = {1, 1, 1, 2, 2, 1, Grid::kDefaultNodata, Grid::kDefaultNodata};
    for (int c = 0; c < 8; ++c) map.labels.at(0, c) = labels[c];
    crown(1, {0, 1, 2, 3});
    crown(2, {4, 5});
    crown(3, {6, 7});
    const auto res = label_crowns_majority(map, seg);
    EXPECT_EQ(res.labels.at(1), "A");
    EXPECT_EQ(res.labels.at(2), "A");
    EXPECT_EQ(res.labels.count(3), 0u);
    EXPECT_EQ(res.unlabeled, std::vector<int>{3});
    ASSERT_EQ(res.report.size(), 1u);

    // five A and three B pixels
    LabelMap big{Grid(g), {"A", "B"}};
    const double lb[] = {2, 1, 2, 1, 1, 2, 1, 1};
    for (int c = 0; c < 8; ++c) big.labels.at(0, c) = lb[c];
    crowns::Segmentation one{{}, Grid(g)};
    crowns::CrownRecord all;
    all.crown_id = 1;
    for (int c = 0; c < 8; ++c) all.cells.push_back({0, c});
    one.crowns.push_back(all);
    EXPECT_EQ(label_crowns_majority(big, one).labels.at(1), "A");
}
