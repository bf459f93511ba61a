// Test-only helpers: seeded random instances and independent brute-force
// oracles. Nothing here may call the implementation paths it is used to
// check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "dimcert/correlation.hpp"

namespace testsupport {

// Dirichlet(1,...,1) outcome distribution per (x,y) slice.
inline dimcert::PMCorrelation random_pm(int n, int m, int k, std::mt19937_64& rng) {
    dimcert::PMCorrelation p;
    p.n_preparations = n;
    p.n_measurements = m;
    p.n_outcomes = k;
    p.probs.resize(static_cast<std::size_t>(n) * m * k);
    std::exponential_distribution<double> exp1(1.0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y) {
            double sum = 0.0;
            std::vector<double> v(k);
            for (int b = 0; b < k; ++b) {
                v[b] = exp1(rng);
                sum += v[b];
            }
            for (int b = 0; b < k; ++b) p.at(x, y, b) = v[b] / sum;
        }
    return p;
}

inline dimcert::SimplexWeights random_weights(int n, std::mt19937_64& rng) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = exp1(rng);
        sum += w[i];
    }
    for (int i = 0; i < n; ++i) w[i] /= sum;
    return dimcert::SimplexWeights{std::move(w)};
}

// Exact minimum of q^T A q over the grid {q : q_i = k_i/steps}. The first
// N-2 coordinates are enumerated recursively; along the final fiber the
// quadratic in the split between the last two coordinates is minimized in
// closed form over the admissible grid points, so the result equals the full
// grid scan.
inline double grid_min_quadratic(const Eigen::MatrixXd& a, int steps) {
    const int n = static_cast<int>(a.rows());
    const double h = 1.0 / steps;
    if (n == 1) return a(0, 0);

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> q(n, 0.0);
    std::vector<double> lin(n, 0.0);  // lin[j] = sum_{i fixed} q_i a(i,j)

    const int u = n - 2, v = n - 1;
    auto fiber = [&](double base, int units_left) {
        // q_u = t, q_v = r - t with t on the grid.
        double r = units_left * h;
        double c2 = a(u, u) + a(v, v) - 2.0 * a(u, v);
        double c1 = 2.0 * (lin[u] - lin[v]) + 2.0 * r * (a(u, v) - a(v, v));
        double c0 = base + 2.0 * r * lin[v] + r * r * a(v, v);
        auto eval = [&](int kk) {
            double t = kk * h;
            return c0 + c1 * t + c2 * t * t;
        };
        best = std::min(best, eval(0));
        best = std::min(best, eval(units_left));
        if (c2 > 0.0) {
            double tstar = -c1 / (2.0 * c2);
            int kk = static_cast<int>(std::lround(tstar / h));
            for (int dk = -1; dk <= 1; ++dk) {
                int cand = kk + dk;
                if (cand > 0 && cand < units_left) best = std::min(best, eval(cand));
            }
        }
    };

    std::function<void(int, int, double)> rec = [&](int i, int units_left, double base) {
        if (i == u) {
            fiber(base, units_left);
            return;
        }
        for (int kk = 0; kk <= units_left; ++kk) {
            double t = kk * h;
            q[i] = t;
            double new_base = base + t * t * a(i, i) + 2.0 * t * lin[i];
            std::vector<double> saved_lin = lin;
            for (int j = i + 1; j < n; ++j) lin[j] += t * a(i, j);
            rec(i + 1, units_left - kk, new_base);
            lin = saved_lin;
        }
        q[i] = 0.0;
    };
    rec(0, steps, 0.0);
    return best;
}

// Plain full-scan grid minimum, used to validate grid_min_quadratic itself
// on small instances.
inline double grid_min_quadratic_naive(const Eigen::MatrixXd& a, int steps) {
    const int n = static_cast<int>(a.rows());
    const double h = 1.0 / steps;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> k(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            k[i] = left;
            Eigen::VectorXd q(n);
            for (int j = 0; j < n; ++j) q[j] = k[j] * h;
            best = std::min(best, q.dot(a * q));
            return;
        }
        for (int kk = 0; kk <= left; ++kk) {
            k[i] = kk;
            rec(i + 1, left - kk);
        }
    };
    rec(0, steps);
    return best;
}

}  // namespace testsupport
