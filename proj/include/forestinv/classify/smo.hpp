#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <span>
#include <vector>

#include "forestinv/common/error.hpp"

namespace forestinv::classify {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double rbf(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

/// Two-class RBF decision function f(x) = sum coef_s k(sv_s, x) - rho, positive for label +1.
struct BinarySvm {
    RowMatrix support;
    std::vector<double> coef; // alpha_s * y_s
    double rho = 0.0;
    double gamma = 1.0;

    double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < support.rows(); ++i)
            s += coef[static_cast<std::size_t>(i)] * rbf(support.row(i), x, gamma);
        return s - rho;
    }
};

struct SmoOptions {
    double C = 10.0;
    double gamma = 1.0;
    double eps = 1e-3;              // stop when the maximal violating pair gap drops below this
    std::size_t max_iter = 0;       // 0: max(10^7, 100 n)
    std::size_t cache_bytes = 64u << 20;
    bool record_trace = true;
};

struct SmoDiagnostics {
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace; // dual objective after each step
    double dual_objective = 0.0;         // sum(alpha) - 1/2 alpha'Q alpha
    double primal_objective = 0.0;       // 1/2 |w|^2 + C sum(hinge)
    double duality_gap = 0.0;
    double max_kkt_violation = 0.0;      // in functional-margin units
};

struct SmoResult {
    BinarySvm model;
    std::vector<double> alpha;
    SmoDiagnostics diagnostics;
};

namespace detail {

/// LRU cache of kernel rows K(i, .).
class KernelCache {
public:
    KernelCache(const RowMatrix& x, double gamma, std::size_t bytes)
        : x_(x), gamma_(gamma), rows_(static_cast<std::size_t>(x.rows())),
          where_(static_cast<std::size_t>(x.rows()), lru_.end()) {
        const std::size_t row_bytes = std::max<std::size_t>(1, rows_ * sizeof(double));
        capacity_ = std::max<std::size_t>(2, bytes / row_bytes);
    }

    const std::vector<double>& row(std::size_t i) {
        if (where_[i] != lru_.end()) {
            lru_.splice(lru_.begin(), lru_, where_[i]);
            return lru_.front().second;
        }
        if (lru_.size() >= capacity_) {
            where_[lru_.back().first] = lru_.end();
            lru_.pop_back();
        }
        std::vector<double> r(rows_);
        for (std::size_t j = 0; j < rows_; ++j)
            r[j] = rbf(x_.row(static_cast<Eigen::Index>(i)), x_.row(static_cast<Eigen::Index>(j)), gamma_);
        lru_.emplace_front(i, std::move(r));
        where_[i] = lru_.begin();
        return lru_.front().second;
    }

private:
    using Entry = std::pair<std::size_t, std::vector<double>>;
    const RowMatrix& x_;
    double gamma_;
    std::size_t rows_;
    std::size_t capacity_ = 2;
    std::list<Entry> lru_;
    std::vector<std::list<Entry>::iterator> where_;
};

} // namespace detail

/// Soft-margin RBF SVM dual solved by sequential minimal optimization with
/// maximal-violating-pair working set selection. y entries must be +1 or -1.
inline SmoResult train_binary_svm(const RowMatrix& x, std::span<const int> y, const SmoOptions& opt) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n != y.size()) throw DataError("sample and label counts differ");
    if (!(opt.C > 0)) throw ConfigError("SVM cost C must be > 0");
    if (!(opt.gamma > 0)) throw ConfigError("SVM gamma must be > 0");
    if (!(opt.eps > 0)) throw ConfigError("SMO tolerance must be > 0");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v != 1 && v != -1) throw DataError("binary labels must be +1 or -1");
        (v > 0 ? pos : neg) = true;
    }
    if (!pos || !neg) throw DataError("binary SVM needs samples of both classes");

    const double C = opt.C;
    constexpr double tau = 1e-12;
    detail::KernelCache cache(x, opt.gamma, opt.cache_bytes);
    std::vector<double> alpha(n, 0.0), G(n, -1.0);
    const std::vector<double> kdiag(n, 1.0); // rbf(x, x) == 1
    const std::size_t max_iter = opt.max_iter ? opt.max_iter : std::max<std::size_t>(10'000'000, 100 * n);

    SmoResult res;
    auto& diag = res.diagnostics;
    auto dual = [&] {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += alpha[t] * (G[t] - 1.0);
        return -0.5 * s;
    };

    while (true) {
        double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * G[t];
            const bool up = y[t] > 0 ? alpha[t] < C : alpha[t] > 0;
            const bool low = y[t] > 0 ? alpha[t] > 0 : alpha[t] < C;
            if (up && v > gmax) gmax = v, i = t;
            if (low && v < gmin) gmin = v, j = t;
        }
        if (i == n || j == n || gmax - gmin < opt.eps) {
            diag.converged = true;
            break;
        }
        if (diag.iterations >= max_iter) break;
        ++diag.iterations;

        const auto& Ki = cache.row(i);
        const auto& Kj = cache.row(j);
        const double Kij = Ki[j];
        const double ai_old = alpha[i], aj_old = alpha[j];
        double& ai = alpha[i];
        double& aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = kdiag[i] + kdiag[j] - 2.0 * Kij;
            if (quad <= 0) quad = tau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) aj = 0, ai = diff;
            } else if (ai < 0) {
                ai = 0, aj = -diff;
            }
            if (diff > 0) {
                if (ai > C) ai = C, aj = C - diff;
            } else if (aj > C) {
                aj = C, ai = C + diff;
            }
        } else {
            double quad = kdiag[i] + kdiag[j] - 2.0 * Kij;
            if (quad <= 0) quad = tau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) ai = C, aj = sum - C;
            } else if (aj < 0) {
                aj = 0, ai = sum;
            }
            if (sum > C) {
                if (aj > C) aj = C, ai = sum - C;
            } else if (ai < 0) {
                ai = 0, aj = sum;
            }
        }
        const double dai = ai - ai_old, daj = aj - aj_old;
        // Q_ts = y_t y_s K_ts
        for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (y[i] * Ki[t] * dai + y[j] * Kj[t] * daj);
        if (opt.record_trace) diag.objective_trace.push_back(dual());
    }

    // bias from free vectors, else the midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            sum_free += yg;
            ++n_free;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    double quad_term = 0.0, hinge = 0.0, sum_alpha = 0.0, kkt = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        quad_term += alpha[t] * (G[t] + 1.0);
        sum_alpha += alpha[t];
        const double margin = y[t] * (y[t] * (G[t] + 1.0) - rho); // y_t f(x_t)
        hinge += std::max(0.0, 1.0 - margin);
        double v = 0.0;
        if (alpha[t] <= 0) v = std::max(0.0, 1.0 - margin);
        else if (alpha[t] >= C) v = std::max(0.0, margin - 1.0);
        else v = std::abs(margin - 1.0);
        kkt = std::max(kkt, v);
    }
    diag.dual_objective = sum_alpha - 0.5 * quad_term;
    diag.primal_objective = 0.5 * quad_term + C * hinge;
    diag.duality_gap = diag.primal_objective - diag.dual_objective;
    diag.max_kkt_violation = kkt;

    std::size_t nsv = 0;
    for (double a : alpha) nsv += a > 0 ? 1 : 0;
    res.model.gamma = opt.gamma;
    res.model.rho = rho;
    res.model.support.resize(static_cast<Eigen::Index>(nsv), x.cols());
    for (std::size_t t = 0, k = 0; t < n; ++t) {
        if (alpha[t] <= 0) continue;
        res.model.support.row(static_cast<Eigen::Index>(k++)) = x.row(static_cast<Eigen::Index>(t));
        res.model.coef.push_back(alpha[t] * y[t]);
    }
    res.alpha = std::move(alpha);
    return res;
}

} // namespace forestinv::classify
