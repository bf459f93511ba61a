#pragma once

#include <utility>
#include <vector>

#include "dimcert/correlation.hpp"
#include "dimcert/realization.hpp"

namespace dimcert {

// Bit convention: measurement y = 0 addresses the most significant of the
// m bits of the preparation index x.
inline int bit_of(int x, int y, int m) { return (x >> (m - 1 - y)) & 1; }

/// Perfect bit-retrieval correlation: N = 2^m preparations encode m bits,
/// measurement y reads bit y without error.
inline PMCorrelation gen_toy(int m) {
    if (m < 1 || m > 20)
        throw Error(ErrorKind::OutOfRange, "m must be in [1, 20]", {{"m", m}});
    const int n = 1 << m;
    PMCorrelation p;
    p.n_preparations = n;
    p.n_measurements = m;
    p.n_outcomes = 2;
    p.probs.assign(static_cast<std::size_t>(n) * m * 2, 0.0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y) p.at(x, y, bit_of(x, y, m)) = 1.0;
    return p;
}

/// Random access code correlation: any chosen bit is decoded correctly with
/// probability beta.
inline PMCorrelation gen_rac(int m, double beta) {
    if (m < 1 || m > 20)
        throw Error(ErrorKind::OutOfRange, "m must be in [1, 20]", {{"m", m}});
    if (beta < 0.5 || beta > 1.0)
        throw Error(ErrorKind::OutOfRange, "beta must be in [1/2, 1]", {{"beta", beta}});
    const int n = 1 << m;
    PMCorrelation p;
    p.n_preparations = n;
    p.n_measurements = m;
    p.n_outcomes = 2;
    p.probs.resize(static_cast<std::size_t>(n) * m * 2);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y) {
            int good = bit_of(x, y, m);
            p.at(x, y, good) = beta;
            p.at(x, y, 1 - good) = 1.0 - beta;
        }
    return p;
}

/// The two correlations whose even mixture escapes the qubit set: the
/// preparer holds two bits, measurement y = i decodes bit i perfectly and
/// the other measurement answers "not certain" (outcome 2).
inline std::pair<PMCorrelation, PMCorrelation> gen_nonconvexity_pair() {
    auto make = [](int i) {
        PMCorrelation p;
        p.n_preparations = 4;
        p.n_measurements = 2;
        p.n_outcomes = 3;
        p.probs.assign(4 * 2 * 3, 0.0);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 2; ++y) {
                int b = (y == i) ? bit_of(x, y, 2) : 2;
                p.at(x, y, b) = 1.0;
            }
        return p;
    };
    return {make(0), make(1)};
}

/// Entrywise convex combination of same-shape correlations.
inline PMCorrelation mix(const std::vector<PMCorrelation>& ps, const SimplexWeights& weights) {
    if (ps.empty() || weights.size() != static_cast<int>(ps.size()))
        throw Error(ErrorKind::ShapeMismatch, "weights length does not match correlation count");
    const auto& first = ps.front();
    for (const auto& p : ps)
        if (p.n_preparations != first.n_preparations || p.n_measurements != first.n_measurements ||
            p.n_outcomes != first.n_outcomes)
            throw Error(ErrorKind::ShapeMismatch, "correlations have mismatched shapes");
    PMCorrelation out = first;
    for (auto& v : out.probs) v = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = 0; j < out.probs.size(); ++j)
            out.probs[j] += weights[static_cast<int>(i)] * ps[i].probs[j];
    return out;
}

/// The trivial dimension-N diagonal realization: rho_x = |x><x| and
/// Pi_b^y = sum_z p(b|z,y) |z><z|. Reproduces p exactly.
inline Realization classical_realization(const PMCorrelation& p) {
    const int n = p.n_preparations;
    Realization r;
    r.dim = n;
    for (int x = 0; x < n; ++x) {
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
        rho(x, x) = 1.0;
        r.states.push_back(std::move(rho));
    }
    for (int y = 0; y < p.n_measurements; ++y) {
        std::vector<Eigen::MatrixXcd> meas;
        for (int b = 0; b < p.n_outcomes; ++b) {
            Eigen::MatrixXcd pi = Eigen::MatrixXcd::Zero(n, n);
            for (int z = 0; z < n; ++z) pi(z, z) = p.p(z, y, b);
            meas.push_back(std::move(pi));
        }
        r.povms.push_back(std::move(meas));
    }
    return r;
}

}  // namespace dimcert
