#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "forestinv/chm.hpp"
#include "forestinv/common/random.hpp"

using namespace forestinv;
using namespace forestinv::chm;
using geodata::Grid;
using geodata::GridGeometry;
using geodata::LidarPoint;
using geodata::PointCloud;

namespace {

PointCloud with_heights(const std::vector<std::array<double, 3>>& xyh) {
    PointCloud pc;
    for (const auto& p : xyh) {
        LidarPoint lp;
        lp.x = p[0];
        lp.y = p[1];
        lp.z = p[2];
        lp.height_above_ground = p[2];
        pc.points.push_back(lp);
    }
    return pc;
}

PointCloud random_cone(double apex_x, double apex_y, double apex_h, double radius, double extent, int n,
                       std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(0, extent), y = rng.uniform(0, extent);
        const double r = std::hypot(x - apex_x, y - apex_y);
        pts.push_back({x, y, std::max(0.0, apex_h * (1.0 - r / radius))});
    }
    pts.push_back({apex_x, apex_y, apex_h});
    return with_heights(pts);
}

} // namespace

TEST(NormalizeHeights, Examples) {
    GridGeometry g{30, 30, 0, 0, 1.0};
    Grid flat(g, Grid::kDefaultNodata, 100.0);
    PointCloud pc;
    pc.points.push_back({5, 5, 105, std::nullopt, 1, false});
    pc.points.push_back({6, 6, 99.5, std::nullopt, 1, false});
    auto out = normalize_heights(pc, flat);
    EXPECT_DOUBLE_EQ(*out.points[0].height_above_ground, 5.0);
    EXPECT_DOUBLE_EQ(*out.points[1].height_above_ground, 0.0);
    EXPECT_EQ(out.points[0].z, 105.0);

    Grid plane(g);
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 30; ++c) plane.at(r, c) = g.center_x(c);
    PointCloud p2;
    p2.points.push_back({10, 7.3, 12, std::nullopt, 1, false});
    EXPECT_NEAR(*normalize_heights(p2, plane).points[0].height_above_ground, 2.0, 1e-12);
}

TEST(NormalizeHeights, OutsideHullNamesPoint) {
    GridGeometry g{4, 4, 0, 0, 1.0};
    Grid dtm(g, Grid::kDefaultNodata, 0.0);
    PointCloud pc;
    pc.points.push_back({2, 2, 1, std::nullopt, 1, false});
    pc.points.push_back({50, 2, 1, std::nullopt, 1, false});
    try {
        normalize_heights(pc, dtm);
        FAIL();
    } catch (const OutOfBoundsError& e) {
        EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
    }
}

TEST(Delaunay, SatisfiesEmptyCircumcircleBruteForce) {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 60 + 40 * trial;
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) xs[i] = rng.uniform(0, 50), ys[i] = rng.uniform(0, 50);
        Delaunay d(xs, ys);
        const auto& t = d.triangles();
        ASSERT_GT(d.triangle_count(), 0u);
        for (std::size_t k = 0; k < t.size(); k += 3) {
            const std::size_t a = t[k], b = t[k + 1], c = t[k + 2];
            const double ax = xs[a], ay = ys[a], bx = xs[b], by = ys[b], cx = xs[c], cy = ys[c];
            const double orient = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
            EXPECT_GT(orient, 0.0) << "triangles must be counter-clockwise";
            // circumcircle by direct formula
            const double dd = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
            const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
                               (cx * cx + cy * cy) * (ay - by)) / dd;
            const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
                               (cx * cx + cy * cy) * (bx - ax)) / dd;
            const double r2 = (ax - ux) * (ax - ux) + (ay - uy) * (ay - uy);
            for (int p = 0; p < n; ++p) {
                if (static_cast<std::size_t>(p) == a || static_cast<std::size_t>(p) == b ||
                    static_cast<std::size_t>(p) == c)
                    continue;
                const double d2 = (xs[p] - ux) * (xs[p] - ux) + (ys[p] - uy) * (ys[p] - uy);
                EXPECT_GE(d2, r2 * (1 - 1e-9)) << "point " << p << " inside circumcircle of triangle " << k / 3;
            }
        }
        // Euler: for points in general position, T = 2n - 2 - h
        EXPECT_EQ(d.triangle_count(), static_cast<std::size_t>(2 * n - 2) - d.hull().size());
    }
}

TEST(Delaunay, GridPointsAndDegenerateInput) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) xs.push_back(i), ys.push_back(j);
    Delaunay d(xs, ys);
    EXPECT_EQ(d.triangle_count(), 50u);
    std::vector<double> lx{0, 1, 2, 3}, ly{0, 1, 2, 3};
    EXPECT_THROW((Delaunay(lx, ly)), NumericalError);
}

TEST(Pitfree, FlatCanopy) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) pts.push_back({i * 0.25, j * 0.25, 10.0});
    PitfreeParams p;
    const auto chm = pitfree_chm(with_heights(pts), p);
    std::size_t interior = 0;
    for (int r = 1; r < chm.nrows() - 1; ++r)
        for (int c = 1; c < chm.ncols() - 1; ++c) {
            ASSERT_FALSE(chm.is_nodata(r, c));
            EXPECT_NEAR(chm.at(r, c), 10.0, 1e-6);
            ++interior;
        }
    EXPECT_GT(interior, 200u);
}

TEST(Pitfree, ConeApexWithinOneCell) {
    const double ax = 12.3, ay = 11.6;
    const auto cloud = random_cone(ax, ay, 20.0, 8.0, 25.0, 8000, 9);
    PitfreeParams p;
    const auto chm = pitfree_chm(cloud, p);
    double best = -1;
    geodata::Cell at{};
    for (int r = 0; r < chm.nrows(); ++r)
        for (int c = 0; c < chm.ncols(); ++c)
            if (!chm.is_nodata(r, c) && chm.at(r, c) > best) best = chm.at(r, c), at = {r, c};
    EXPECT_NEAR(best, 20.0, 20.0 * 0.5 / 8.0 + 1e-9);
    const auto apex_cell = *chm.geometry().cell_at(ax, ay);
    EXPECT_LE(std::abs(at.row - apex_cell.row), 1);
    EXPECT_LE(std::abs(at.col - apex_cell.col), 1);
}

TEST(Pitfree, EdgePruningLeavesGapNodata) {
    // two dense patches 10 m apart; the gap between them must stay uncovered
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            pts.push_back({i * 0.5, j * 0.5, 3.0});
            pts.push_back({12 + i * 0.5, j * 0.5, 3.0});
        }
    PitfreeParams p;
    const auto chm = pitfree_chm(with_heights(pts), p);
    const auto cell = *chm.geometry().cell_at(7.1, 1.1);
    EXPECT_TRUE(chm.is_nodata(cell));
    EXPECT_FALSE(chm.is_nodata(*chm.geometry().cell_at(1.1, 1.1)));

    const auto two = with_heights({{0, 0, 5}, {10, 0, 5}, {5, 0.001, 5}});
    const auto g2 = pitfree_chm(two, p);
    EXPECT_EQ(g2.count_valid(), 0u);
}

TEST(Pitfree, BoundsAndLayerMax) {
    const auto cloud = random_cone(15, 15, 25.0, 9.0, 30.0, 6000, 21);
    double max_h = 0;
    for (const auto& pt : cloud.points) max_h = std::max(max_h, *pt.height_above_ground);
    PitfreeParams p;
    const auto chm = pitfree_chm(cloud, p);
    PitfreeParams single = p;
    single.height_thresholds = {0.0};
    single.geometry = chm.geometry();
    const auto base = pitfree_chm(cloud, single);
    std::size_t both = 0;
    for (std::size_t i = 0; i < chm.size(); ++i) {
        const double v = chm.values()[i];
        if (chm.is_nodata_value(v)) continue;
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, max_h + 1e-9);
        const double b = base.values()[i];
        if (base.is_nodata_value(b)) continue;
        EXPECT_GE(v, b - 1e-12);
        ++both;
    }
    EXPECT_GT(both, 1000u);
}

TEST(Pitfree, AddingPointNeverLowersDefinedCells) {
    const auto cloud = random_cone(10, 10, 18.0, 7.0, 20.0, 3000, 33);
    PitfreeParams p;
    const auto before = pitfree_chm(cloud, p);
    p.geometry = before.geometry();
    auto more = cloud;
    LidarPoint extra;
    extra.x = 9.13;
    extra.y = 10.71;
    extra.z = extra.height_above_ground.emplace(18.5);
    more.points.push_back(extra);
    const auto after = pitfree_chm(more, p);
    // local check: cells near the added point only rise; far cells are untouched
    for (std::size_t i = 0; i < before.size(); ++i) {
        const double b = before.values()[i], a = after.values()[i];
        if (before.is_nodata_value(b) || after.is_nodata_value(a)) continue;
        const auto c = before.geometry().cell(i);
        const double dx = before.geometry().center_x(c.col) - extra.x;
        const double dy = before.geometry().center_y(c.row) - extra.y;
        if (std::hypot(dx, dy) < 1.5) {
            EXPECT_GE(a, b - 1e-9);
        }
    }
}

TEST(Pitfree, FirstReturnFilterAndErrors) {
    auto cloud = with_heights({{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}});
    cloud.points[3].return_number = 2;
    cloud.points[3].height_above_ground = 50.0;
    PitfreeParams p;
    p.max_edge = 5;
    const auto chm = pitfree_chm(cloud, p);
    for (double v : chm.values())
        if (!chm.is_nodata_value(v)) {
            EXPECT_LE(v, 1.0);
        }

    EXPECT_THROW(pitfree_chm(PointCloud{}, p), DataError);
    EXPECT_THROW(pitfree_chm(with_heights({{0, 0, 1}, {1, 1, 1}, {2, 2, 1}}), p), NumericalError);
    PointCloud no_hag;
    no_hag.points.push_back({0, 0, 1, std::nullopt, 1, false});
    EXPECT_THROW(pitfree_chm(no_hag, p), DataError);
    PitfreeParams bad;
    bad.height_thresholds = {1.0, 2.0};
    EXPECT_THROW(bad.validate(), DataError);
}

TEST(Pitfree, DeterministicAcrossThreads) {
    const auto cloud = random_cone(20, 20, 22.0, 10.0, 40.0, 20000, 77);
    PitfreeParams p;
    p.threads = 1;
    const auto a = pitfree_chm(cloud, p);
    p.threads = 4;
    const auto b = pitfree_chm(cloud, p);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.values()[i], y = b.values()[i];
        EXPECT_TRUE(x == y || (a.is_nodata_value(x) && b.is_nodata_value(y)));
    }
}
