#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "dimcert/correlation.hpp"
#include "dimcert/parallel.hpp"

namespace dimcert {

enum class StQPMethod { FaceEnumeration, MultistartPGD };

inline const char* to_string(StQPMethod m) {
    return m == StQPMethod::FaceEnumeration ? "face_enumeration" : "multistart_pgd";
}

/// Result of minimizing q^T A q over the probability simplex.
struct StQPResult {
    SimplexWeights q_star;
    double value = 0.0;
    bool certified_global = false;
    StQPMethod method = StQPMethod::FaceEnumeration;
    long long stationary_points_examined = 0;
    int restarts = 0;

    nlohmann::json to_json() const {
        return {{"q_star", q_star.weights},
                {"value", value},
                {"certified_global", certified_global},
                {"method", to_string(method)},
                {"stationary_points_examined", stationary_points_examined},
                {"restarts", restarts}};
    }
};

namespace detail {

// Total order for the minimum reduction: value ascending, then larger
// support, then lexicographically smallest q. Order-independent, so the
// face/restart loops can be evaluated in any order.
struct StQPCandidate {
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd q;

    bool valid() const { return q.size() > 0; }

    int support() const {
        int s = 0;
        for (Eigen::Index i = 0; i < q.size(); ++i)
            if (q[i] > 1e-9) ++s;
        return s;
    }

    bool better_than(const StQPCandidate& other) const {
        if (!other.valid()) return true;
        constexpr double tie = 1e-12;
        if (value < other.value - tie) return true;
        if (value > other.value + tie) return false;
        int s = support(), so = other.support();
        if (s != so) return s > so;
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            if (q[i] < other.q[i] - tie) return true;
            if (q[i] > other.q[i] + tie) return false;
        }
        return false;
    }
};

inline double quad_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& q) {
    return q.dot(a * q);
}

}  // namespace detail

/// Exhaustive KKT enumeration over all 2^N - 1 faces of the simplex.
/// On each face the stationarity system (A restricted to the support) q = λ1,
/// sum q = 1 is solved via the bordered KKT system; singular systems take the
/// least-norm solution and inconsistent or infeasible ones are covered by
/// their sub-faces. Exact for every N, at 2^N cost.
inline StQPResult optimize_q_exact(const Eigen::MatrixXd& a, int max_n = 20) {
    const int n = static_cast<int>(a.rows());
    if (n > max_n)
        throw Error(ErrorKind::TooLarge, "N exceeds the exact-enumeration threshold",
                    {{"N", n}, {"max_n", max_n}});

    detail::StQPCandidate best;
    long long examined = 0;
    const std::uint64_t full = (n >= 64) ? ~0ull : ((1ull << n) - 1);
    for (std::uint64_t mask = 1; mask <= full; ++mask) {
        const int k = std::popcount(mask);
        std::vector<int> idx;
        idx.reserve(k);
        for (int i = 0; i < n; ++i)
            if (mask & (1ull << i)) idx.push_back(i);

        Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
        if (k == 1) {
            q[idx[0]] = 1.0;
        } else {
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) kkt(i, j) = a(idx[i], idx[j]);
            kkt.block(0, k, k, 1).setConstant(-1.0);
            kkt.block(k, 0, 1, k).setConstant(1.0);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
            rhs[k] = 1.0;
            Eigen::VectorXd z = kkt.completeOrthogonalDecomposition().solve(rhs);
            double scale = 1.0 + a.cwiseAbs().maxCoeff();
            if ((kkt * z - rhs).cwiseAbs().maxCoeff() > 1e-8 * scale) continue;  // inconsistent
            bool feasible = true;
            for (int i = 0; i < k; ++i)
                if (z[i] < -1e-12) {
                    feasible = false;
                    break;
                }
            if (!feasible) continue;
            double sum = 0.0;
            for (int i = 0; i < k; ++i) sum += std::max(z[i], 0.0);
            for (int i = 0; i < k; ++i) q[idx[i]] = std::max(z[i], 0.0) / sum;
        }
        ++examined;
        detail::StQPCandidate cand{detail::quad_form(a, q), std::move(q)};
        if (cand.better_than(best)) best = std::move(cand);
    }

    StQPResult res;
    res.q_star = SimplexWeights{{best.q.data(), best.q.data() + n}};
    res.value = best.value;
    res.certified_global = true;
    res.method = StQPMethod::FaceEnumeration;
    res.stationary_points_examined = examined;
    res.restarts = 0;
    return res;
}

/// Euclidean projection onto the probability simplex, O(N log N).
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        css += u[i];
        double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    return (v.array() - theta).cwiseMax(0.0);
}

/// Multistart projected gradient descent: uniform start, the N vertices,
/// and `restarts` Dirichlet(1,...,1) samples, each from its own seeded
/// stream. Not globally certified.
inline StQPResult optimize_q_heuristic(const Eigen::MatrixXd& a, int restarts,
                                       std::uint64_t seed, int threads = 1) {
    const int n = static_cast<int>(a.rows());
    if (restarts < 1)
        throw Error(ErrorKind::OutOfRange, "restarts must be >= 1", {{"restarts", restarts}});

    const double lipschitz = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double step = lipschitz > 0 ? 1.0 / (2.0 * lipschitz) : 1.0;
    const int n_starts = 1 + n + restarts;

    std::vector<detail::StQPCandidate> cands(n_starts);
    parallel_for(n_starts, threads, [&](int s) {
        Eigen::VectorXd q(n);
        if (s == 0) {
            q.setConstant(1.0 / n);
        } else if (s <= n) {
            q.setZero();
            q[s - 1] = 1.0;
        } else {
            std::seed_seq sq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s)};
            std::mt19937_64 rng(sq);
            std::exponential_distribution<double> exp1(1.0);
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                q[i] = exp1(rng);
                sum += q[i];
            }
            q /= sum;
        }
        for (int it = 0; it < 100000; ++it) {
            Eigen::VectorXd next = project_to_simplex(q - step * 2.0 * (a * q));
            double disp = (next - q).norm();
            q = next;
            if (disp < 1e-12) break;
        }
        cands[s] = detail::StQPCandidate{detail::quad_form(a, q), std::move(q)};
    });

    detail::StQPCandidate best;
    for (auto& c : cands)
        if (c.better_than(best)) best = std::move(c);

    StQPResult res;
    res.q_star = SimplexWeights{{best.q.data(), best.q.data() + n}};
    res.value = best.value;
    res.certified_global = false;
    res.method = StQPMethod::MultistartPGD;
    res.stationary_points_examined = n_starts;
    res.restarts = restarts;
    return res;
}

}  // namespace dimcert
