#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "forestinv/common/error.hpp"

namespace forestinv::chm {

namespace detail {

inline constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();

// > 0 when (a, b, c) turns counter-clockwise.
inline double orient(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

// > 0 when p lies strictly inside the circumcircle of the counter-clockwise triangle (a, b, c).
inline double incircle(double ax, double ay, double bx, double by, double cx, double cy, double px, double py) {
    const double dx = ax - px, dy = ay - py;
    const double ex = bx - px, ey = by - py;
    const double fx = cx - px, fy = cy - py;
    const double ap = dx * dx + dy * dy;
    const double bp = ex * ex + ey * ey;
    const double cp = fx * fx + fy * fy;
    return dx * (ey * cp - bp * fy) - dy * (ex * cp - bp * fx) + ap * (ex * fy - ey * fx);
}

inline double circumradius2(double ax, double ay, double bx, double by, double cx, double cy) {
    const double dx = bx - ax, dy = by - ay;
    const double ex = cx - ax, ey = cy - ay;
    const double bl = dx * dx + dy * dy;
    const double cl = ex * ex + ey * ey;
    const double d = 0.5 / (dx * ey - dy * ex);
    const double x = (ey * bl - dy * cl) * d;
    const double y = (dx * cl - ex * bl) * d;
    return x * x + y * y;
}

inline void circumcenter(double ax, double ay, double bx, double by, double cx, double cy, double& ox, double& oy) {
    const double dx = bx - ax, dy = by - ay;
    const double ex = cx - ax, ey = cy - ay;
    const double bl = dx * dx + dy * dy;
    const double cl = ex * ex + ey * ey;
    const double d = 0.5 / (dx * ey - dy * ex);
    ox = ax + (ey * bl - dy * cl) * d;
    oy = ay + (dx * cl - ex * bl) * d;
}

// Monotone in the angle of (dx, dy), in [0, 1).
inline double pseudo_angle(double dx, double dy) {
    const double p = dx / (std::abs(dx) + std::abs(dy));
    return (dy > 0 ? 3.0 - p : 1.0 + p) / 4.0;
}

} // namespace detail

/// 2-D Delaunay triangulation by radial sweep with a hashed convex hull and
/// Lawson edge flips. Triangles are counter-clockwise vertex triples.
/// Exact duplicate points are dropped; an all-collinear input throws.
class Delaunay {
public:
    explicit Delaunay(std::span<const double> xs, std::span<const double> ys) : x_(xs), y_(ys) {
        if (xs.size() != ys.size()) throw DataError("Delaunay: coordinate arrays differ in length");
        build();
    }

    /// Vertex indices, three per triangle.
    const std::vector<std::size_t>& triangles() const { return triangles_; }
    /// Opposite half-edge per half-edge, kInvalid on the hull.
    const std::vector<std::size_t>& halfedges() const { return halfedges_; }
    /// Hull vertex indices in counter-clockwise order.
    const std::vector<std::size_t>& hull() const { return hull_; }
    std::size_t triangle_count() const { return triangles_.size() / 3; }

private:
    std::span<const double> x_, y_;
    std::vector<std::size_t> triangles_;
    std::vector<std::size_t> halfedges_;
    std::vector<std::size_t> hull_;

    std::vector<std::size_t> hull_prev_, hull_next_, hull_tri_, hull_hash_;
    std::size_t hull_start_ = 0;
    std::size_t hash_size_ = 0;
    double cx_ = 0.0, cy_ = 0.0;
    std::vector<std::size_t> edge_stack_;

    std::size_t hash_key(double x, double y) const {
        const auto k = static_cast<std::size_t>(std::floor(detail::pseudo_angle(x - cx_, y - cy_) *
                                                           static_cast<double>(hash_size_)));
        return k % hash_size_;
    }

    void link(std::size_t a, std::size_t b) {
        halfedges_[a] = b;
        if (b != detail::kInvalid) halfedges_[b] = a;
    }

    std::size_t add_triangle(std::size_t i0, std::size_t i1, std::size_t i2, std::size_t a, std::size_t b,
                             std::size_t c) {
        const std::size_t t = triangles_.size();
        triangles_.push_back(i0);
        triangles_.push_back(i1);
        triangles_.push_back(i2);
        halfedges_.resize(t + 3, detail::kInvalid);
        link(t, a);
        link(t + 1, b);
        link(t + 2, c);
        return t;
    }

    // Restores the Delaunay condition across half-edge a (opposite the newly
    // inserted point) and recursively across every edge created by a flip.
    // Returns the half-edge leaving the new point along the original hull edge.
    std::size_t legalize(std::size_t a) {
        std::size_t ar = 0;
        edge_stack_.clear();
        while (true) {
            const std::size_t b = halfedges_[a];
            const std::size_t a0 = a - a % 3;
            ar = a0 + (a + 2) % 3;
            if (b == detail::kInvalid) {
                if (edge_stack_.empty()) break;
                a = edge_stack_.back();
                edge_stack_.pop_back();
                continue;
            }
            const std::size_t b0 = b - b % 3;
            const std::size_t al = a0 + (a + 1) % 3;
            const std::size_t bl = b0 + (b + 2) % 3;
            const std::size_t p0 = triangles_[ar];
            const std::size_t pr = triangles_[a];
            const std::size_t pl = triangles_[al];
            const std::size_t p1 = triangles_[bl];
            const bool illegal =
                detail::incircle(x_[p0], y_[p0], x_[pr], y_[pr], x_[pl], y_[pl], x_[p1], y_[p1]) > 0.0;
            if (illegal) {
                triangles_[a] = p1;
                triangles_[b] = p0;
                const std::size_t hbl = halfedges_[bl];
                if (hbl == detail::kInvalid) {
                    std::size_t e = hull_start_;
                    do {
                        if (hull_tri_[e] == bl) {
                            hull_tri_[e] = a;
                            break;
                        }
                        e = hull_prev_[e];
                    } while (e != hull_start_);
                }
                link(a, hbl);
                link(b, halfedges_[ar]);
                link(ar, bl);
                edge_stack_.push_back(b0 + (b + 1) % 3);
            } else {
                if (edge_stack_.empty()) break;
                a = edge_stack_.back();
                edge_stack_.pop_back();
            }
        }
        return ar;
    }

    void build() {
        const std::size_t n = x_.size();
        if (n < 3) throw NumericalError("Delaunay: need at least 3 points");

        double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
        double max_x = -min_x, max_y = -min_x;
        for (std::size_t i = 0; i < n; ++i) {
            min_x = std::min(min_x, x_[i]);
            min_y = std::min(min_y, y_[i]);
            max_x = std::max(max_x, x_[i]);
            max_y = std::max(max_y, y_[i]);
        }
        const double mx = 0.5 * (min_x + max_x), my = 0.5 * (min_y + max_y);

        auto dist2 = [&](std::size_t i, double px, double py) {
            const double dx = x_[i] - px, dy = y_[i] - py;
            return dx * dx + dy * dy;
        };

        std::size_t i0 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = dist2(i, mx, my);
            if (d < best) best = d, i0 = i;
        }
        std::size_t i1 = detail::kInvalid;
        best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (i == i0) continue;
            const double d = dist2(i, x_[i0], y_[i0]);
            if (d < best && d > 0) best = d, i1 = i;
        }
        if (i1 == detail::kInvalid) throw NumericalError("Delaunay: all points coincide");
        std::size_t i2 = detail::kInvalid;
        double min_radius = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (i == i0 || i == i1) continue;
            const double r = detail::circumradius2(x_[i0], y_[i0], x_[i1], y_[i1], x_[i], y_[i]);
            if (r < min_radius) min_radius = r, i2 = i;
        }
        if (!std::isfinite(min_radius)) throw NumericalError("Delaunay: input points are collinear");
        if (detail::orient(x_[i0], y_[i0], x_[i1], y_[i1], x_[i2], y_[i2]) < 0) std::swap(i1, i2);

        detail::circumcenter(x_[i0], y_[i0], x_[i1], y_[i1], x_[i2], y_[i2], cx_, cy_);

        std::vector<double> dists(n);
        for (std::size_t i = 0; i < n; ++i) dists[i] = dist2(i, cx_, cy_);
        std::vector<std::size_t> ids(n);
        std::iota(ids.begin(), ids.end(), std::size_t{0});
        std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
            return dists[a] < dists[b] || (dists[a] == dists[b] && a < b);
        });

        hash_size_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        hull_prev_.assign(n, 0);
        hull_next_.assign(n, 0);
        hull_tri_.assign(n, 0);
        hull_hash_.assign(hash_size_, detail::kInvalid);

        const std::size_t max_tri = n > 2 ? 2 * n - 5 : 1;
        triangles_.reserve(max_tri * 3);
        halfedges_.reserve(max_tri * 3);

        hull_start_ = i0;
        hull_next_[i0] = hull_prev_[i2] = i1;
        hull_next_[i1] = hull_prev_[i0] = i2;
        hull_next_[i2] = hull_prev_[i1] = i0;
        hull_tri_[i0] = 0;
        hull_tri_[i1] = 1;
        hull_tri_[i2] = 2;
        hull_hash_[hash_key(x_[i0], y_[i0])] = i0;
        hull_hash_[hash_key(x_[i1], y_[i1])] = i1;
        hull_hash_[hash_key(x_[i2], y_[i2])] = i2;
        add_triangle(i0, i1, i2, detail::kInvalid, detail::kInvalid, detail::kInvalid);

        double xp = 0, yp = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = ids[k];
            const double x = x_[i], y = y_[i];
            if (k > 0 && x == xp && y == yp) continue;
            xp = x;
            yp = y;
            if (i == i0 || i == i1 || i == i2) continue;

            std::size_t start = 0;
            const std::size_t key = hash_key(x, y);
            for (std::size_t j = 0; j < hash_size_; ++j) {
                start = hull_hash_[(key + j) % hash_size_];
                if (start != detail::kInvalid && start != hull_next_[start]) break;
            }
            start = hull_prev_[start];
            std::size_t e = start;
            std::size_t q = hull_next_[e];
            // Find an edge of the hull visible from the point (point strictly to its right).
            while (!(detail::orient(x_[e], y_[e], x_[q], y_[q], x, y) < 0)) {
                e = q;
                if (e == start) {
                    e = detail::kInvalid;
                    break;
                }
                q = hull_next_[e];
            }
            if (e == detail::kInvalid) continue; // on the hull boundary or a near-duplicate

            std::size_t t = add_triangle(e, i, hull_next_[e], detail::kInvalid, detail::kInvalid, hull_tri_[e]);
            hull_tri_[i] = legalize(t + 2);
            hull_tri_[e] = t;

            std::size_t nn = hull_next_[e];
            q = hull_next_[nn];
            while (detail::orient(x_[nn], y_[nn], x_[q], y_[q], x, y) < 0) {
                t = add_triangle(nn, i, q, hull_tri_[i], detail::kInvalid, hull_tri_[nn]);
                hull_tri_[i] = legalize(t + 2);
                hull_next_[nn] = nn; // removed from hull
                nn = q;
                q = hull_next_[nn];
            }

            if (e == start) {
                q = hull_prev_[e];
                while (detail::orient(x_[q], y_[q], x_[e], y_[e], x, y) < 0) {
                    t = add_triangle(q, i, e, detail::kInvalid, hull_tri_[e], hull_tri_[q]);
                    legalize(t + 2);
                    hull_tri_[q] = t;
                    hull_next_[e] = e;
                    e = q;
                    q = hull_prev_[e];
                }
            }

            hull_start_ = hull_prev_[i] = e;
            hull_next_[e] = hull_prev_[nn] = i;
            hull_next_[i] = nn;

            hull_hash_[hash_key(x, y)] = i;
            hull_hash_[hash_key(x_[e], y_[e])] = e;
        }

        hull_.clear();
        std::size_t e = hull_start_;
        do {
            hull_.push_back(e);
            e = hull_next_[e];
        } while (e != hull_start_);
    }
};

} // namespace forestinv::chm
