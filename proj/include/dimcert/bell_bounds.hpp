#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "dimcert/correlation.hpp"

namespace dimcert {

inline constexpr double kDegenerateDenominator = 1e-15;
inline constexpr double kCeilSlack = 1e-9;

inline long long ceil_with_slack(double v) {
    return static_cast<long long>(std::ceil(v - kCeilSlack));
}

/// One of the two Bell-scenario dimension lower bounds. `unbounded` flags
/// a vanishing denominator (disjoint supports): the data admits no
/// finite-dimensional realization under exact arithmetic.
struct BellBoundValue {
    bool unbounded = false;
    double value = 0.0;                 // meaningful only when !unbounded
    std::array<int, 2> argmax{0, 0};    // setting pair attaining the outer max

    nlohmann::json to_json() const {
        nlohmann::json j{{"unbounded", unbounded}, {"argmax", argmax}};
        if (unbounded)
            j["value"] = nullptr;
        else
            j["value"] = value;
        return j;
    }
};

namespace detail {

inline std::vector<double> sqrt_tensor(const std::vector<double>& t) {
    std::vector<double> s(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) s[i] = std::sqrt(t[i]);
    return s;
}

}  // namespace detail

// max over Bob setting pairs (y,y') of the inverse of
//   sum_{b,b'} min_x ( sum_a sqrt(r(a,b|x,y)) sqrt(r(a,b'|x,y')) )^2.
// Ties in the outer max go to the lowest (y,y') pair.
inline BellBoundValue bell_bound_a(const BellCorrelation& r) {
    const int nx = r.n_settings_a, ny = r.n_settings_b;
    const int na = r.n_outcomes_a, nb = r.n_outcomes_b;
    const auto s = detail::sqrt_tensor(r.probs);
    auto sv = [&](int x, int y, int a, int b) {
        return s[((static_cast<std::size_t>(x) * ny + y) * na + a) * nb + b];
    };

    double best_den = std::numeric_limits<double>::infinity();
    std::array<int, 2> arg{0, 0};
    for (int y = 0; y < ny; ++y) {
        for (int yp = 0; yp < ny; ++yp) {
            double den = 0.0;
            for (int b = 0; b < nb; ++b) {
                for (int bp = 0; bp < nb; ++bp) {
                    double mn = std::numeric_limits<double>::infinity();
                    for (int x = 0; x < nx; ++x) {
                        double inner = 0.0;
                        for (int a = 0; a < na; ++a)
                            inner += sv(x, y, a, b) * sv(x, yp, a, bp);
                        mn = std::min(mn, inner);
                    }
                    den += mn * mn;
                }
            }
            if (den < best_den) {
                best_den = den;
                arg = {y, yp};
            }
        }
    }
    if (best_den < kDegenerateDenominator) return {true, 0.0, arg};
    return {false, 1.0 / best_den, arg};
}

// Mirror of bell_bound_a with the roles of (a,x) and (b,y) swapped.
inline BellBoundValue bell_bound_b(const BellCorrelation& r) {
    const int nx = r.n_settings_a, ny = r.n_settings_b;
    const int na = r.n_outcomes_a, nb = r.n_outcomes_b;
    const auto s = detail::sqrt_tensor(r.probs);
    auto sv = [&](int x, int y, int a, int b) {
        return s[((static_cast<std::size_t>(x) * ny + y) * na + a) * nb + b];
    };

    double best_den = std::numeric_limits<double>::infinity();
    std::array<int, 2> arg{0, 0};
    for (int x = 0; x < nx; ++x) {
        for (int xp = 0; xp < nx; ++xp) {
            double den = 0.0;
            for (int a = 0; a < na; ++a) {
                for (int ap = 0; ap < na; ++ap) {
                    double mn = std::numeric_limits<double>::infinity();
                    for (int y = 0; y < ny; ++y) {
                        double inner = 0.0;
                        for (int b = 0; b < nb; ++b)
                            inner += sv(x, y, a, b) * sv(xp, y, ap, b);
                        mn = std::min(mn, inner);
                    }
                    den += mn * mn;
                }
            }
            if (den < best_den) {
                best_den = den;
                arg = {x, xp};
            }
        }
    }
    if (best_den < kDegenerateDenominator) return {true, 0.0, arg};
    return {false, 1.0 / best_den, arg};
}

struct BellBoundReport {
    BellBoundValue bound_a;
    BellBoundValue bound_b;

    bool best_unbounded() const { return bound_a.unbounded || bound_b.unbounded; }
    double best() const {
        return std::max(bound_a.value, bound_b.value);
    }
    // Which bound wins (the A-side bound on ties; both unbounded counts as A).
    const BellBoundValue& winner() const {
        if (bound_a.unbounded) return bound_a;
        if (bound_b.unbounded) return bound_b;
        return bound_a.value >= bound_b.value ? bound_a : bound_b;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["bound_a"] = bound_a.to_json();
        j["bound_b"] = bound_b.to_json();
        if (best_unbounded()) {
            j["best"] = {{"unbounded", true}, {"value", nullptr}};
            j["best_integer"] = nullptr;
        } else {
            j["best"] = {{"unbounded", false}, {"value", best()}};
            j["best_integer"] = ceil_with_slack(best());
        }
        j["argmax_settings"] = winner().argmax;
        return j;
    }
};

inline BellBoundReport bell_bound(const BellCorrelation& r) {
    return BellBoundReport{bell_bound_a(r), bell_bound_b(r)};
}

}  // namespace dimcert
