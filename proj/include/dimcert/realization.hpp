#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dimcert/correlation.hpp"

namespace dimcert {

/// Explicit quantum model of a PM correlation: density matrices rho_x and
/// POVMs {Pi_b^y} on dimension d.
struct Realization {
    int dim = 0;
    std::vector<Eigen::MatrixXcd> states;               // N matrices, d x d
    std::vector<std::vector<Eigen::MatrixXcd>> povms;   // [y][b], d x d

    int n_preparations() const { return static_cast<int>(states.size()); }
    int n_measurements() const { return static_cast<int>(povms.size()); }
    int n_outcomes() const { return povms.empty() ? 0 : static_cast<int>(povms[0].size()); }
};

inline constexpr double kRealizationTol = 1e-10;

/// Checks the Realization invariants (hermiticity, positivity, unit trace,
/// POVM completeness) and throws InvalidRealization listing every violation.
inline void check_realization(const Realization& r) {
    nlohmann::json violations = nlohmann::json::array();
    auto check_herm = [&](const Eigen::MatrixXcd& m, const std::string& what) {
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kRealizationTol)
            violations.push_back({{"what", what}, {"violation", "not hermitian"}});
    };
    auto min_eig = [](const Eigen::MatrixXcd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            (m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    };

    for (std::size_t x = 0; x < r.states.size(); ++x) {
        const auto& rho = r.states[x];
        std::string what = "state " + std::to_string(x);
        if (rho.rows() != r.dim || rho.cols() != r.dim) {
            violations.push_back({{"what", what}, {"violation", "wrong shape"}});
            continue;
        }
        check_herm(rho, what);
        if (min_eig(rho) < -kRealizationTol)
            violations.push_back({{"what", what}, {"violation", "not positive semidefinite"}});
        if (std::abs(rho.trace().real() - 1.0) > kRealizationTol ||
            std::abs(rho.trace().imag()) > kRealizationTol)
            violations.push_back({{"what", what}, {"violation", "trace not 1"},
                                  {"trace", rho.trace().real()}});
    }
    for (std::size_t y = 0; y < r.povms.size(); ++y) {
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(r.dim, r.dim);
        for (std::size_t b = 0; b < r.povms[y].size(); ++b) {
            const auto& pi = r.povms[y][b];
            std::string what = "povm (" + std::to_string(y) + "," + std::to_string(b) + ")";
            if (pi.rows() != r.dim || pi.cols() != r.dim) {
                violations.push_back({{"what", what}, {"violation", "wrong shape"}});
                continue;
            }
            check_herm(pi, what);
            if (min_eig(pi) < -kRealizationTol)
                violations.push_back({{"what", what}, {"violation", "not positive semidefinite"}});
            sum += pi;
        }
        if ((sum - Eigen::MatrixXcd::Identity(r.dim, r.dim)).cwiseAbs().maxCoeff() >
            kRealizationTol)
            violations.push_back({{"what", "measurement " + std::to_string(y)},
                                  {"violation", "does not sum to identity"}});
    }
    if (!violations.empty())
        throw Error(ErrorKind::InvalidRealization, "realization violates invariants",
                    {{"violations", violations}});
}

/// Max over (x,y,b) of |Tr(rho_x Pi_b^y) - p(b|x,y)|. Re-checks the
/// Realization invariants and fails loudly if they are violated.
inline double verify_realization(const Realization& r, const PMCorrelation& p) {
    if (r.n_preparations() != p.n_preparations || r.n_measurements() != p.n_measurements ||
        r.n_outcomes() != p.n_outcomes)
        throw Error(ErrorKind::ShapeMismatch, "realization shape does not match correlation");
    check_realization(r);
    double residual = 0.0;
    for (int x = 0; x < p.n_preparations; ++x)
        for (int y = 0; y < p.n_measurements; ++y)
            for (int b = 0; b < p.n_outcomes; ++b) {
                double v = (r.states[x] * r.povms[y][b]).trace().real();
                residual = std::max(residual, std::abs(v - p.p(x, y, b)));
            }
    return residual;
}

// Complex matrices serialize as interleaved [re, im] pairs, row-major.
inline nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
    nlohmann::json flat = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            flat.push_back(m(i, j).real());
            flat.push_back(m(i, j).imag());
        }
    return flat;
}

inline Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != 2 * d * d)
        throw Error(ErrorKind::ShapeMismatch, "matrix entry count does not match 2*d*d");
    Eigen::MatrixXcd m(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < d; ++c) {
            double re = j[k++].get<double>();
            double im = j[k++].get<double>();
            m(i, c) = std::complex<double>(re, im);
        }
    return m;
}

inline nlohmann::json to_json(const Realization& r) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& rho : r.states) states.push_back(matrix_to_json(rho));
    nlohmann::json povms = nlohmann::json::array();
    for (const auto& meas : r.povms) {
        nlohmann::json ops = nlohmann::json::array();
        for (const auto& pi : meas) ops.push_back(matrix_to_json(pi));
        povms.push_back(std::move(ops));
    }
    return {{"type", "realization"},
            {"dim", r.dim},
            {"N", r.n_preparations()},
            {"M", r.n_measurements()},
            {"K", r.n_outcomes()},
            {"states", std::move(states)},
            {"povms", std::move(povms)}};
}

inline Realization realization_from_json(const nlohmann::json& j) {
    Realization r;
    r.dim = detail::require_int(j, "dim");
    if (r.dim < 1) throw Error(ErrorKind::ShapeMismatch, "dim must be positive");
    if (!j.contains("states") || !j.contains("povms"))
        throw Error(ErrorKind::ParseError, "missing 'states' or 'povms'");
    for (const auto& s : j["states"]) r.states.push_back(matrix_from_json(s, r.dim));
    for (const auto& meas : j["povms"]) {
        std::vector<Eigen::MatrixXcd> ops;
        for (const auto& pi : meas) ops.push_back(matrix_from_json(pi, r.dim));
        r.povms.push_back(std::move(ops));
    }
    return r;
}

}  // namespace dimcert
