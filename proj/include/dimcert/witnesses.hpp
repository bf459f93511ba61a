#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dimcert/generators.hpp"
#include "dimcert/pm_bound.hpp"

namespace dimcert {

enum class WitnessKind { Compressibility, Quadratic, DetW2, PsdRankLb, Nayak };

inline const char* to_string(WitnessKind k) {
    switch (k) {
        case WitnessKind::Compressibility: return "compressibility";
        case WitnessKind::Quadratic: return "quadratic";
        case WitnessKind::DetW2: return "det_w2";
        case WitnessKind::PsdRankLb: return "psd_rank_lb";
        case WitnessKind::Nayak: return "nayak";
    }
    return "unknown";
}

struct WitnessReport {
    WitnessKind witness_kind = WitnessKind::Compressibility;
    std::optional<double> value;
    std::optional<long long> implied_dimension_lb;
    bool triggered = false;
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["witness_kind"] = to_string(witness_kind);
        j["value"] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
        j["implied_dimension_lb"] =
            implied_dimension_lb ? nlohmann::json(*implied_dimension_lb) : nlohmann::json(nullptr);
        j["triggered"] = triggered;
        j["details"] = details;
        return j;
    }
};

inline constexpr double kZeroProductThreshold = 1e-12;

/// Non-compressibility test: every pair of distinct preparations must be
/// perfectly distinguished by some measurement (disjoint outcome supports).
/// When it holds, the dimension equals N.
inline WitnessReport check_incompressible(const PMCorrelation& p) {
    const int n = p.n_preparations;
    nlohmann::json failing = nlohmann::json::array();
    int pairs_met = 0, pairs_total = 0;
    for (int x = 0; x < n; ++x)
        for (int xp = x + 1; xp < n; ++xp) {
            ++pairs_total;
            bool pair_ok = false;
            for (int y = 0; y < p.n_measurements && !pair_ok; ++y) {
                bool disjoint = true;
                for (int b = 0; b < p.n_outcomes; ++b)
                    if (p.p(x, y, b) * p.p(xp, y, b) > kZeroProductThreshold) {
                        disjoint = false;
                        break;
                    }
                pair_ok = disjoint;
            }
            if (pair_ok)
                ++pairs_met;
            else
                failing.push_back({{"x", x}, {"x_prime", xp}});
        }
    WitnessReport rep;
    rep.witness_kind = WitnessKind::Compressibility;
    rep.triggered = failing.empty();
    rep.value = static_cast<double>(pairs_met);
    if (rep.triggered) rep.implied_dimension_lb = n;
    rep.details = {{"pairs_total", pairs_total},
                   {"pairs_disjoint", pairs_met},
                   {"failing_pairs", failing}};
    return rep;
}

/// Quadratic witness for binary outcomes:
///   sum_{x,x'} max_y |p(1|x,y) - p(1|x',y)|^2 <= (1 - 1/d) N^2
/// holds for every dimension-d model; exceeding the right side rules d out.
inline WitnessReport quadratic_witness(const PMCorrelation& p, int d) {
    if (p.n_outcomes != 2)
        throw Error(ErrorKind::NotBinary, "quadratic witness requires K = 2",
                    {{"K", p.n_outcomes}});
    if (d < 1) throw Error(ErrorKind::OutOfRange, "d must be >= 1", {{"d", d}});
    const int n = p.n_preparations;
    double value = 0.0;
    for (int x = 0; x < n; ++x)
        for (int xp = 0; xp < n; ++xp) {
            double mx = 0.0;
            for (int y = 0; y < p.n_measurements; ++y)
                mx = std::max(mx, std::abs(p.p(x, y, 1) - p.p(xp, y, 1)));
            value += mx * mx;
        }
    const double nn = static_cast<double>(n) * n;
    WitnessReport rep;
    rep.witness_kind = WitnessKind::Quadratic;
    rep.value = value;
    rep.triggered = value > (1.0 - 1.0 / d) * nn + 1e-9;
    // Smallest d' not ruled out.
    long long lb = 1;
    if (nn - value > 1e-15)
        lb = std::max<long long>(1, ceil_with_slack(nn / (nn - value)));
    else
        lb = n;
    rep.implied_dimension_lb = std::min<long long>(lb, n);
    rep.details = {{"d_tested", d}, {"threshold", (1.0 - 1.0 / d) * nn}};
    return rep;
}

/// Determinant witness for the N=4, M=2, K=2 scenario. det(W2) = 2 forces
/// all entries of W2 to be +-1, which meets the non-compressibility
/// condition, hence dimension 4.
inline WitnessReport det_w2_witness(const PMCorrelation& p) {
    if (p.n_preparations != 4 || p.n_measurements != 2 || p.n_outcomes != 2)
        throw Error(ErrorKind::WrongScenario, "det_w2 requires N=4, M=2, K=2",
                    {{"N", p.n_preparations}, {"M", p.n_measurements}, {"K", p.n_outcomes}});
    Eigen::Matrix2d w2;
    for (int y = 0; y < 2; ++y) {
        w2(y, 0) = p.p(0, y, 0) - p.p(1, y, 0);
        w2(y, 1) = p.p(2, y, 0) - p.p(3, y, 0);
    }
    double det = w2.determinant();
    WitnessReport rep;
    rep.witness_kind = WitnessKind::DetW2;
    rep.value = det;
    rep.triggered = std::abs(det - 2.0) <= 1e-9;
    rep.details = {{"w2", {{w2(0, 0), w2(0, 1)}, {w2(1, 0), w2(1, 1)}}}};
    if (rep.triggered) {
        rep.implied_dimension_lb = 4;
        bool incompressible = check_incompressible(p).triggered;
        rep.details["incompressible_confirmed"] = incompressible;
        if (!incompressible)
            throw Error(ErrorKind::Internal,
                        "det(W2) = 2 without the non-compressibility condition");
    }
    return rep;
}

/// PSD-rank based bound: max_y sum_b max_x p(b|x,y). Never exceeds K.
inline WitnessReport psd_rank_lower_bound(const PMCorrelation& p) {
    double value = 0.0;
    int arg_y = 0;
    for (int y = 0; y < p.n_measurements; ++y) {
        double s = 0.0;
        for (int b = 0; b < p.n_outcomes; ++b) {
            double mx = 0.0;
            for (int x = 0; x < p.n_preparations; ++x) mx = std::max(mx, p.p(x, y, b));
            s += mx;
        }
        if (s > value) {
            value = s;
            arg_y = y;
        }
    }
    WitnessReport rep;
    rep.witness_kind = WitnessKind::PsdRankLb;
    rep.value = value;
    rep.implied_dimension_lb = std::max<long long>(1, ceil_with_slack(value));
    rep.triggered = *rep.implied_dimension_lb > 1;
    rep.details = {{"argmax_y", arg_y}};
    return rep;
}

inline double binary_entropy(double beta) {
    double h = 0.0;
    if (beta > 0.0) h -= beta * std::log2(beta);
    if (beta < 1.0) h -= (1.0 - beta) * std::log2(1.0 - beta);
    return h;
}

/// Information-theoretic RAC bound: ceil(2^((1 - H(beta)) m)).
inline long long nayak_bound(double beta, int m) {
    if (beta < 0.5 || beta > 1.0)
        throw Error(ErrorKind::OutOfRange, "beta must be in [1/2, 1]", {{"beta", beta}});
    if (m < 1) throw Error(ErrorKind::OutOfRange, "m must be >= 1", {{"m", m}});
    double exponent = (1.0 - binary_entropy(beta)) * m;
    return std::max<long long>(1, ceil_with_slack(std::exp2(exponent)));
}

inline WitnessReport nayak_witness(double beta, int m) {
    WitnessReport rep;
    rep.witness_kind = WitnessKind::Nayak;
    long long lb = nayak_bound(beta, m);
    rep.value = std::exp2((1.0 - binary_entropy(beta)) * m);
    rep.implied_dimension_lb = lb;
    rep.triggered = lb > 1;
    rep.details = {{"beta", beta}, {"m", m}, {"binary_entropy", binary_entropy(beta)}};
    return rep;
}

struct RacScanRow {
    double beta;
    double fidelity_raw;
    long long fidelity_lb;
    long long nayak_lb;
    std::string winner;  // "fidelity", "nayak" or "tie"
};

/// Scans beta and compares the main bound (uniform q) against Nayak's bound
/// for the m-bit RAC family.
inline std::vector<RacScanRow> compare_rac_bounds(int m, double beta_min, double beta_max,
                                                  double step) {
    if (step <= 0.0)
        throw Error(ErrorKind::OutOfRange, "step must be positive", {{"step", step}});
    if (beta_min < 0.5 || beta_max > 1.0 || beta_min > beta_max)
        throw Error(ErrorKind::OutOfRange, "scan range must lie in [1/2, 1]",
                    {{"beta_min", beta_min}, {"beta_max", beta_max}});
    std::vector<RacScanRow> rows;
    const int n = 1 << m;
    for (long long i = 0;; ++i) {
        double beta = beta_min + static_cast<double>(i) * step;
        if (beta > beta_max + step * 0.5) break;
        beta = std::min(beta, 1.0);
        // Closed form of the uniform-q denominator for the RAC family: all
        // distinct preparations differ in some addressed bit, so every
        // off-diagonal fidelity entry is 4*beta*(1-beta).
        double den = 1.0 / n + (1.0 - 1.0 / n) * 4.0 * beta * (1.0 - beta);
        double raw = 1.0 / den;
        RacScanRow row;
        row.beta = beta;
        row.fidelity_raw = raw;
        row.fidelity_lb = ceil_with_slack(raw);
        row.nayak_lb = nayak_bound(beta, m);
        row.winner = row.nayak_lb > row.fidelity_lb ? "nayak"
                     : row.fidelity_lb > row.nayak_lb ? "fidelity"
                                                 : "tie";
        rows.push_back(row);
        if (beta >= 1.0) break;
    }
    return rows;
}

}  // namespace dimcert
