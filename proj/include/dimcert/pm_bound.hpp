#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "dimcert/bell_bounds.hpp"
#include "dimcert/correlation.hpp"

namespace dimcert {

/// N x N matrix of squared worst-case (over measurements) Bhattacharyya
/// coefficients between preparations: the quadratic form of the main
/// dimension bound. Diagonal entries are 1.
struct FidelityMatrix {
    Eigen::MatrixXd a;
    Eigen::MatrixXi argmin_y;  // minimizing measurement per pair, smallest y on ties
};

inline FidelityMatrix fidelity_matrix(const PMCorrelation& p) {
    const int n = p.n_preparations, m = p.n_measurements, k = p.n_outcomes;
    FidelityMatrix f;
    f.a.resize(n, n);
    f.argmin_y.resize(n, n);
    for (int x = 0; x < n; ++x) {
        for (int xp = x; xp < n; ++xp) {
            double best = std::numeric_limits<double>::infinity();
            int besty = 0;
            for (int y = 0; y < m; ++y) {
                double c = 0.0;
                for (int b = 0; b < k; ++b)
                    c += std::sqrt(p.p(x, y, b)) * std::sqrt(p.p(xp, y, b));
                double v = c * c;
                if (v < best) {
                    best = v;
                    besty = y;
                }
            }
            f.a(x, xp) = f.a(xp, x) = best;
            f.argmin_y(x, xp) = f.argmin_y(xp, x) = besty;
        }
    }
    return f;
}

enum class QSource { Uniform, User, Optimized };

inline const char* to_string(QSource s) {
    switch (s) {
        case QSource::Uniform: return "uniform";
        case QSource::User: return "user";
        case QSource::Optimized: return "optimized";
    }
    return "user";
}

struct PMBoundReport {
    SimplexWeights q_used;
    double raw_bound = 0.0;
    long long dimension_lb = 0;
    double denominator = 0.0;
    int trivial_ub = 0;  // any PM correlation has a dimension-N diagonal realization
    QSource q_source = QSource::User;

    nlohmann::json to_json() const {
        return {{"q_used", q_used.weights},
                {"raw_bound", raw_bound},
                {"dimension_lb", dimension_lb},
                {"denominator", denominator},
                {"trivial_ub", trivial_ub},
                {"q_source", to_string(q_source)}};
    }
};

inline PMBoundReport pm_bound(const FidelityMatrix& f, const SimplexWeights& q,
                              QSource source = QSource::User) {
    const int n = static_cast<int>(f.a.rows());
    if (q.size() != n)
        throw Error(ErrorKind::ShapeMismatch, "q length does not match N",
                    {{"N", n}, {"q_length", q.size()}});
    Eigen::Map<const Eigen::VectorXd> qv(q.weights.data(), n);
    double den = qv.dot(f.a * qv);
    if (den < kDegenerateDenominator)
        throw Error(ErrorKind::DegenerateDenominator, "q^T A q vanishes", {{"denominator", den}});
    double raw = 1.0 / den;
    if (raw > n + 1e-9)
        throw Error(ErrorKind::Internal, "bound exceeds trivial upper bound N",
                    {{"raw_bound", raw}, {"N", n}});
    PMBoundReport rep;
    rep.q_used = q;
    rep.raw_bound = raw;
    rep.dimension_lb = ceil_with_slack(raw);
    rep.denominator = den;
    rep.trivial_ub = n;
    rep.q_source = source;
    return rep;
}

inline PMBoundReport pm_bound(const PMCorrelation& p, const SimplexWeights& q,
                              QSource source = QSource::User) {
    return pm_bound(fidelity_matrix(p), q, source);
}

/// The proof construction: a one-setting Alice whose outcome reveals the
/// preparation choice drawn with probability q_x, Bob measuring as in the
/// PM scenario. r(x,b|y) = q_x p(b|x,y).
inline BellCorrelation pm_to_bell(const PMCorrelation& p, const SimplexWeights& q) {
    const int n = p.n_preparations, m = p.n_measurements, k = p.n_outcomes;
    if (q.size() != n)
        throw Error(ErrorKind::ShapeMismatch, "q length does not match N",
                    {{"N", n}, {"q_length", q.size()}});
    BellCorrelation r;
    r.n_settings_a = 1;
    r.n_settings_b = m;
    r.n_outcomes_a = n;
    r.n_outcomes_b = k;
    r.probs.resize(static_cast<std::size_t>(m) * n * k);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < n; ++x)
            for (int b = 0; b < k; ++b)
                r.at(0, y, x, b) = q[x] * p.p(x, y, b);
    return r;
}

}  // namespace dimcert
