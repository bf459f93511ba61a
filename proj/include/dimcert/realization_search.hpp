#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dimcert/generators.hpp"
#include "dimcert/parallel.hpp"
#include "dimcert/realization.hpp"

namespace dimcert {

// Unconstrained parametrization of a candidate realization:
//   rho_x   = G_x G_x^dag / Tr(G_x G_x^dag)
//   B_b^y   = F_b^y (F_b^y)^dag,  S_y = sum_b B_b^y + reg*I
//   Pi_b^y  = S_y^{-1/2} B_b^y S_y^{-1/2}
struct SearchParams {
    std::vector<Eigen::MatrixXcd> states;               // G_x
    std::vector<std::vector<Eigen::MatrixXcd>> povms;   // F_b^y
};

inline constexpr double kPovmReg = 1e-12;

struct SearchOutcome {
    enum class Status { Found, NotFound };
    Status status = Status::NotFound;
    std::optional<Realization> realization;
    double residual = std::numeric_limits<double>::infinity();
    int restarts_used = 0;
    std::uint64_t seed = 0;
};

namespace detail {

struct MeasurementOps {
    std::vector<Eigen::MatrixXcd> b;   // outer products B_b
    Eigen::MatrixXcd u;                // eigenvectors of S
    Eigen::VectorXd s;                 // eigenvalues of S (>= reg)
    Eigen::MatrixXcd t;                // S^{-1/2}
    std::vector<Eigen::MatrixXcd> pi;  // normalized effects
};

inline MeasurementOps build_measurement(const std::vector<Eigen::MatrixXcd>& f, int d) {
    MeasurementOps ops;
    Eigen::MatrixXcd s_mat = kPovmReg * Eigen::MatrixXcd::Identity(d, d);
    for (const auto& fb : f) {
        ops.b.push_back(fb * fb.adjoint());
        s_mat += ops.b.back();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s_mat);
    ops.u = es.eigenvectors();
    ops.s = es.eigenvalues();
    ops.t = ops.u * ops.s.cwiseSqrt().cwiseInverse().asDiagonal() * ops.u.adjoint();
    for (const auto& bb : ops.b) ops.pi.push_back(ops.t * bb * ops.t);
    return ops;
}

}  // namespace detail

/// Squared-residual objective sum_{x,y,b} (Tr(rho_x Pi_b^y) - p(b|x,y))^2
/// on the regularized parametrization.
inline double search_objective(const PMCorrelation& p, const SearchParams& params) {
    const int d = static_cast<int>(params.states[0].rows());
    std::vector<Eigen::MatrixXcd> rho;
    for (const auto& g : params.states) {
        Eigen::MatrixXcd w = g * g.adjoint();
        double tr = std::max(w.trace().real(), 1e-300);
        rho.push_back(w / tr);
    }
    double f = 0.0;
    for (int y = 0; y < p.n_measurements; ++y) {
        auto ops = detail::build_measurement(params.povms[y], d);
        for (int x = 0; x < p.n_preparations; ++x)
            for (int b = 0; b < p.n_outcomes; ++b) {
                double e = (rho[x] * ops.pi[b]).trace().real() - p.p(x, y, b);
                f += e * e;
            }
    }
    return f;
}

/// Objective and its analytic gradient with respect to the real and
/// imaginary parts of every factor, packed as matrices G with
/// dL = Re Tr(G^dag dParam). The derivative through S^{-1/2} is taken in
/// the eigenbasis of S via divided differences of s -> s^{-1/2}.
inline double search_objective_and_gradient(const PMCorrelation& p, const SearchParams& params,
                                            SearchParams& grad) {
    const int n = p.n_preparations, m = p.n_measurements, k = p.n_outcomes;
    const int d = static_cast<int>(params.states[0].rows());

    std::vector<Eigen::MatrixXcd> rho(n);
    std::vector<double> tr(n);
    for (int x = 0; x < n; ++x) {
        Eigen::MatrixXcd w = params.states[x] * params.states[x].adjoint();
        tr[x] = std::max(w.trace().real(), 1e-300);
        rho[x] = w / tr[x];
    }

    std::vector<detail::MeasurementOps> meas;
    meas.reserve(m);
    for (int y = 0; y < m; ++y) meas.push_back(detail::build_measurement(params.povms[y], d));

    // Residuals.
    std::vector<double> err(static_cast<std::size_t>(n) * m * k);
    double f = 0.0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y)
            for (int b = 0; b < k; ++b) {
                double e = (rho[x] * meas[y].pi[b]).trace().real() - p.p(x, y, b);
                err[(static_cast<std::size_t>(x) * m + y) * k + b] = e;
                f += e * e;
            }

    grad.states.assign(n, Eigen::MatrixXcd());
    grad.povms.assign(m, std::vector<Eigen::MatrixXcd>(k));

    // States: dL/drho = sum_{y,b} 2 e Pi; pull back through the trace
    // normalization and the factor G.
    for (int x = 0; x < n; ++x) {
        Eigen::MatrixXcd p_rho = Eigen::MatrixXcd::Zero(d, d);
        for (int y = 0; y < m; ++y)
            for (int b = 0; b < k; ++b)
                p_rho += 2.0 * err[(static_cast<std::size_t>(x) * m + y) * k + b] * meas[y].pi[b];
        double inner = (p_rho * rho[x]).trace().real();
        Eigen::MatrixXcd e_rho = (p_rho - inner * Eigen::MatrixXcd::Identity(d, d)) / tr[x];
        grad.states[x] = 2.0 * e_rho * params.states[x];
    }

    // Measurements: dL/dPi = sum_x 2 e rho_x. The S^{-1/2} term mixes all
    // outcomes of the same measurement.
    for (int y = 0; y < m; ++y) {
        const auto& ops = meas[y];
        std::vector<Eigen::MatrixXcd> p_pi(k, Eigen::MatrixXcd::Zero(d, d));
        for (int b = 0; b < k; ++b)
            for (int x = 0; x < n; ++x)
                p_pi[b] += 2.0 * err[(static_cast<std::size_t>(x) * m + y) * k + b] * rho[x];

        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
        for (int b = 0; b < k; ++b)
            c += ops.b[b] * ops.t * p_pi[b] + p_pi[b] * ops.t * ops.b[b];

        // Divided differences of s^{-1/2} in the eigenbasis of S.
        Eigen::MatrixXcd c_tilde = ops.u.adjoint() * c * ops.u;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double si = std::sqrt(ops.s[i]), sj = std::sqrt(ops.s[j]);
                c_tilde(i, j) *= -1.0 / (si * sj * (si + sj));
            }
        Eigen::MatrixXcd d_mat = ops.u * c_tilde * ops.u.adjoint();

        for (int b = 0; b < k; ++b) {
            Eigen::MatrixXcd e_b = ops.t * p_pi[b] * ops.t + d_mat;
            grad.povms[y][b] = 2.0 * e_b * params.povms[y][b];
        }
    }
    return f;
}

namespace detail {

inline double params_dot(const SearchParams& a, const SearchParams& b) {
    double s = 0.0;
    for (std::size_t x = 0; x < a.states.size(); ++x)
        s += (a.states[x].conjugate().cwiseProduct(b.states[x])).sum().real();
    for (std::size_t y = 0; y < a.povms.size(); ++y)
        for (std::size_t o = 0; o < a.povms[y].size(); ++o)
            s += (a.povms[y][o].conjugate().cwiseProduct(b.povms[y][o])).sum().real();
    return s;
}

inline void params_axpy(SearchParams& a, double alpha, const SearchParams& b) {
    for (std::size_t x = 0; x < a.states.size(); ++x) a.states[x] += alpha * b.states[x];
    for (std::size_t y = 0; y < a.povms.size(); ++y)
        for (std::size_t o = 0; o < a.povms[y].size(); ++o)
            a.povms[y][o] += alpha * b.povms[y][o];
}

inline SearchParams random_params(const PMCorrelation& p, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_matrix = [&] {
        Eigen::MatrixXcd m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
        return m;
    };
    SearchParams params;
    for (int x = 0; x < p.n_preparations; ++x) params.states.push_back(random_matrix());
    for (int y = 0; y < p.n_measurements; ++y) {
        std::vector<Eigen::MatrixXcd> f;
        for (int b = 0; b < p.n_outcomes; ++b) f.push_back(random_matrix());
        params.povms.push_back(std::move(f));
    }
    return params;
}

// Factors reproducing the diagonal classical construction when d >= N. The
// extra dimensions (if any) are absorbed into outcome 0 so the effects still
// resolve the identity.
inline SearchParams classical_params(const PMCorrelation& p, int d) {
    const int n = p.n_preparations;
    SearchParams params;
    for (int x = 0; x < n; ++x) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(d, d);
        g(x, x) = 1.0;
        params.states.push_back(std::move(g));
    }
    for (int y = 0; y < p.n_measurements; ++y) {
        std::vector<Eigen::MatrixXcd> f;
        for (int b = 0; b < p.n_outcomes; ++b) {
            Eigen::MatrixXcd fb = Eigen::MatrixXcd::Zero(d, d);
            for (int z = 0; z < n; ++z) fb(z, z) = std::sqrt(p.p(z, y, b));
            if (b == 0)
                for (int z = n; z < d; ++z) fb(z, z) = 1.0;
            f.push_back(std::move(fb));
        }
        params.povms.push_back(std::move(f));
    }
    return params;
}

}  // namespace detail

/// Converts factors into a Realization with exactly normalized POVMs: the
/// inverse square root is taken on the unregularized S (pseudo-inverse on
/// near-null directions) and any null space is assigned to outcome 0, so the
/// completeness invariant holds to machine precision.
inline Realization package_realization(const SearchParams& params) {
    const int d = static_cast<int>(params.states[0].rows());
    Realization r;
    r.dim = d;
    for (const auto& g : params.states) {
        Eigen::MatrixXcd w = g * g.adjoint();
        double tr = std::max(w.trace().real(), 1e-300);
        Eigen::MatrixXcd rho = w / tr;
        r.states.push_back((rho + rho.adjoint()) / 2.0);
    }
    for (const auto& f : params.povms) {
        Eigen::MatrixXcd s_mat = Eigen::MatrixXcd::Zero(d, d);
        std::vector<Eigen::MatrixXcd> b_ops;
        for (const auto& fb : f) {
            b_ops.push_back(fb * fb.adjoint());
            s_mat += b_ops.back();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s_mat);
        double thresh = 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
        Eigen::VectorXd inv_sqrt(d), null_mask(d);
        for (int i = 0; i < d; ++i) {
            bool null = es.eigenvalues()[i] <= thresh;
            inv_sqrt[i] = null ? 0.0 : 1.0 / std::sqrt(es.eigenvalues()[i]);
            null_mask[i] = null ? 1.0 : 0.0;
        }
        Eigen::MatrixXcd t =
            es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
        std::vector<Eigen::MatrixXcd> meas;
        for (std::size_t b = 0; b < b_ops.size(); ++b) {
            Eigen::MatrixXcd pi = t * b_ops[b] * t;
            if (b == 0)
                pi += es.eigenvectors() * null_mask.asDiagonal() * es.eigenvectors().adjoint();
            meas.push_back((pi + pi.adjoint()) / 2.0);
        }
        r.povms.push_back(std::move(meas));
    }
    return r;
}

inline double realization_residual(const Realization& r, const PMCorrelation& p) {
    double residual = 0.0;
    for (int x = 0; x < p.n_preparations; ++x)
        for (int y = 0; y < p.n_measurements; ++y)
            for (int b = 0; b < p.n_outcomes; ++b) {
                double v = (r.states[x] * r.povms[y][b]).trace().real();
                residual = std::max(residual, std::abs(v - p.p(x, y, b)));
            }
    return residual;
}

/// Multistart gradient descent with backtracking line search. When d >= N,
/// restart 0 is the classical diagonal construction, which already matches
/// p exactly. Deterministic for a fixed (seed, restarts) and independent of
/// the thread count.
inline SearchOutcome search_realization(const PMCorrelation& p, int d, int restarts,
                                        std::uint64_t seed, double tol_target = 1e-6,
                                        int threads = 1) {
    if (d < 1) throw Error(ErrorKind::OutOfRange, "dimension must be >= 1", {{"dim", d}});
    if (restarts < 1)
        throw Error(ErrorKind::OutOfRange, "restarts must be >= 1", {{"restarts", restarts}});
    if (tol_target <= 0.0)
        throw Error(ErrorKind::OutOfRange, "tol_target must be positive",
                    {{"tol_target", tol_target}});

    struct PerStart {
        double residual = std::numeric_limits<double>::infinity();
        Realization realization;
    };
    std::vector<PerStart> results(restarts);

    parallel_for(restarts, threads, [&](int s) {
        SearchParams params;
        if (s == 0 && d >= p.n_preparations) {
            params = detail::classical_params(p, d);
        } else {
            std::seed_seq sq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s)};
            std::mt19937_64 rng(sq);
            params = detail::random_params(p, d, rng);
        }

        SearchParams grad;
        double f = search_objective_and_gradient(p, params, grad);
        double alpha = 0.05;
        SearchParams prev_params, prev_grad;
        bool have_prev = false;
        for (int it = 0; it < 20000; ++it) {
            double gnorm2 = detail::params_dot(grad, grad);
            if (std::sqrt(gnorm2) < 1e-12) break;
            if (have_prev) {
                // Barzilai-Borwein step from the last displacement.
                SearchParams ds = params, dy = grad;
                detail::params_axpy(ds, -1.0, prev_params);
                detail::params_axpy(dy, -1.0, prev_grad);
                double sy = detail::params_dot(ds, dy);
                if (sy > 1e-300) {
                    double ss = detail::params_dot(ds, ds);
                    alpha = std::min(std::max(ss / sy, 1e-10), 1e3);
                }
            }
            // Armijo backtracking from the BB guess.
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                SearchParams trial = params;
                detail::params_axpy(trial, -alpha, grad);
                double ft = search_objective(p, trial);
                if (ft <= f - 1e-4 * alpha * gnorm2) {
                    prev_params = std::move(params);
                    prev_grad = grad;
                    have_prev = true;
                    params = std::move(trial);
                    f = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;  // stalled
            f = search_objective_and_gradient(p, params, grad);
        }

        results[s].realization = package_realization(params);
        results[s].residual = realization_residual(results[s].realization, p);
    });

    // Best-of reduction in restart order.
    SearchOutcome out;
    out.seed = seed;
    out.restarts_used = restarts;
    int best = 0;
    for (int s = 1; s < restarts; ++s)
        if (results[s].residual < results[best].residual) best = s;
    out.residual = results[best].residual;
    out.realization = std::move(results[best].realization);
    out.status = out.residual <= tol_target ? SearchOutcome::Status::Found
                                            : SearchOutcome::Status::NotFound;
    return out;
}

}  // namespace dimcert
