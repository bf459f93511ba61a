#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dimcert/error.hpp"

namespace dimcert {

inline constexpr double kDefaultTol = 1e-9;

/// A probability distribution q over the preparations.
struct SimplexWeights {
    std::vector<double> weights;

    int size() const { return static_cast<int>(weights.size()); }
    double operator[](int i) const { return weights[i]; }

    static SimplexWeights uniform(int n) {
        return SimplexWeights{std::vector<double>(n, 1.0 / n)};
    }

    static SimplexWeights validated(std::vector<double> w, double tol = kDefaultTol) {
        if (w.empty())
            throw Error(ErrorKind::ShapeMismatch, "simplex weights must be non-empty");
        double sum = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] < -tol)
                throw Error(ErrorKind::NegativeProbability,
                            "negative weight at index " + std::to_string(i),
                            {{"index", i}, {"value", w[i]}});
            if (w[i] < 0.0) w[i] = 0.0;
            sum += w[i];
        }
        if (std::abs(sum - 1.0) > tol)
            throw Error(ErrorKind::NormalizationError, "weights sum to " + std::to_string(sum),
                        {{"sum", sum}});
        return SimplexWeights{std::move(w)};
    }
};

/// Conditional probabilities p(b|x,y) of a prepare-and-measure scenario,
/// stored row-major over [preparation][measurement][outcome].
struct PMCorrelation {
    int n_preparations = 0;  // N
    int n_measurements = 0;  // M
    int n_outcomes = 0;      // K
    std::vector<double> probs;
    std::optional<std::vector<std::string>> labels_x, labels_y, labels_b;

    double p(int x, int y, int b) const {
        return probs[(static_cast<std::size_t>(x) * n_measurements + y) * n_outcomes + b];
    }
    double& at(int x, int y, int b) {
        return probs[(static_cast<std::size_t>(x) * n_measurements + y) * n_outcomes + b];
    }
};

/// Joint conditional probabilities r(a,b|x,y) of a bipartite Bell scenario,
/// stored row-major over [setting_a][setting_b][outcome_a][outcome_b].
struct BellCorrelation {
    int n_settings_a = 0;  // |X|
    int n_settings_b = 0;  // |Y|
    int n_outcomes_a = 0;  // |A|
    int n_outcomes_b = 0;  // |B|
    std::vector<double> probs;

    double r(int x, int y, int a, int b) const {
        return probs[((static_cast<std::size_t>(x) * n_settings_b + y) * n_outcomes_a + a) *
                         n_outcomes_b +
                     b];
    }
    double& at(int x, int y, int a, int b) {
        return probs[((static_cast<std::size_t>(x) * n_settings_b + y) * n_outcomes_a + a) *
                         n_outcomes_b +
                     b];
    }
};

namespace detail {

// Clamp tiny negatives first, then check per-slice normalization, so float
// dust is not reported twice.
inline void clamp_and_collect(std::vector<double>& t, double tol, nlohmann::json& negatives,
                              const std::function<nlohmann::json(std::size_t)>& locate) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < -tol) {
            nlohmann::json v = locate(i);
            v["value"] = t[i];
            negatives.push_back(v);
        } else if (t[i] < 0.0) {
            t[i] = 0.0;
        }
    }
}

}  // namespace detail

inline PMCorrelation validate_pm(std::vector<double> probs, int n, int m, int k,
                                 double tol = kDefaultTol) {
    if (n < 1 || m < 1 || k < 1)
        throw Error(ErrorKind::ShapeMismatch, "dimensions must be positive",
                    {{"N", n}, {"M", m}, {"K", k}});
    if (probs.size() != static_cast<std::size_t>(n) * m * k)
        throw Error(ErrorKind::ShapeMismatch, "tensor size does not match N*M*K",
                    {{"expected", static_cast<std::size_t>(n) * m * k}, {"got", probs.size()}});

    nlohmann::json negatives = nlohmann::json::array();
    detail::clamp_and_collect(probs, tol, negatives, [&](std::size_t i) {
        int b = static_cast<int>(i % k);
        int y = static_cast<int>((i / k) % m);
        int x = static_cast<int>(i / (static_cast<std::size_t>(k) * m));
        return nlohmann::json{{"x", x}, {"y", y}, {"b", b}};
    });
    if (!negatives.empty())
        throw Error(ErrorKind::NegativeProbability, "negative probabilities beyond tolerance",
                    {{"violations", negatives}});

    nlohmann::json bad_sums = nlohmann::json::array();
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < m; ++y) {
            double sum = 0.0;
            for (int b = 0; b < k; ++b)
                sum += probs[(static_cast<std::size_t>(x) * m + y) * k + b];
            if (std::abs(sum - 1.0) > tol)
                bad_sums.push_back({{"x", x}, {"y", y}, {"sum", sum}});
        }
    }
    if (!bad_sums.empty())
        throw Error(ErrorKind::NormalizationError, "outcome distributions do not sum to 1",
                    {{"violations", bad_sums}});

    PMCorrelation out;
    out.n_preparations = n;
    out.n_measurements = m;
    out.n_outcomes = k;
    out.probs = std::move(probs);
    return out;
}

inline BellCorrelation validate_bell(std::vector<double> probs, int xa, int yb, int na, int nb,
                                     double tol = kDefaultTol) {
    if (xa < 1 || yb < 1 || na < 1 || nb < 1)
        throw Error(ErrorKind::ShapeMismatch, "dimensions must be positive",
                    {{"XA", xa}, {"YB", yb}, {"A", na}, {"B", nb}});
    if (probs.size() != static_cast<std::size_t>(xa) * yb * na * nb)
        throw Error(ErrorKind::ShapeMismatch, "tensor size does not match XA*YB*A*B",
                    {{"expected", static_cast<std::size_t>(xa) * yb * na * nb},
                     {"got", probs.size()}});

    nlohmann::json negatives = nlohmann::json::array();
    detail::clamp_and_collect(probs, tol, negatives, [&](std::size_t i) {
        int b = static_cast<int>(i % nb);
        int a = static_cast<int>((i / nb) % na);
        int y = static_cast<int>((i / (static_cast<std::size_t>(nb) * na)) % yb);
        int x = static_cast<int>(i / (static_cast<std::size_t>(nb) * na * yb));
        return nlohmann::json{{"x", x}, {"y", y}, {"a", a}, {"b", b}};
    });
    if (!negatives.empty())
        throw Error(ErrorKind::NegativeProbability, "negative probabilities beyond tolerance",
                    {{"violations", negatives}});

    nlohmann::json bad_sums = nlohmann::json::array();
    for (int x = 0; x < xa; ++x) {
        for (int y = 0; y < yb; ++y) {
            double sum = 0.0;
            for (int a = 0; a < na; ++a)
                for (int b = 0; b < nb; ++b)
                    sum += probs[((static_cast<std::size_t>(x) * yb + y) * na + a) * nb + b];
            if (std::abs(sum - 1.0) > tol)
                bad_sums.push_back({{"x", x}, {"y", y}, {"sum", sum}});
        }
    }
    if (!bad_sums.empty())
        throw Error(ErrorKind::NormalizationError, "joint distributions do not sum to 1",
                    {{"violations", bad_sums}});

    BellCorrelation out;
    out.n_settings_a = xa;
    out.n_settings_b = yb;
    out.n_outcomes_a = na;
    out.n_outcomes_b = nb;
    out.probs = std::move(probs);
    return out;
}

// No-signaling is not needed by any of the bounds; this is an advisory
// report only.
inline nlohmann::json check_no_signaling(const BellCorrelation& r, double tol = kDefaultTol) {
    nlohmann::json violations = nlohmann::json::array();
    // Alice's marginal must not depend on y.
    for (int x = 0; x < r.n_settings_a; ++x)
        for (int a = 0; a < r.n_outcomes_a; ++a) {
            double ref = 0.0;
            for (int b = 0; b < r.n_outcomes_b; ++b) ref += r.r(x, 0, a, b);
            for (int y = 1; y < r.n_settings_b; ++y) {
                double s = 0.0;
                for (int b = 0; b < r.n_outcomes_b; ++b) s += r.r(x, y, a, b);
                if (std::abs(s - ref) > tol)
                    violations.push_back({{"party", "a"}, {"x", x}, {"a", a}, {"y", y},
                                          {"deviation", s - ref}});
            }
        }
    // Bob's marginal must not depend on x.
    for (int y = 0; y < r.n_settings_b; ++y)
        for (int b = 0; b < r.n_outcomes_b; ++b) {
            double ref = 0.0;
            for (int a = 0; a < r.n_outcomes_a; ++a) ref += r.r(0, y, a, b);
            for (int x = 1; x < r.n_settings_a; ++x) {
                double s = 0.0;
                for (int a = 0; a < r.n_outcomes_a; ++a) s += r.r(x, y, a, b);
                if (std::abs(s - ref) > tol)
                    violations.push_back({{"party", "b"}, {"y", y}, {"b", b}, {"x", x},
                                          {"deviation", s - ref}});
            }
        }
    return {{"signaling", !violations.empty()}, {"violations", violations}};
}

// ---------------------------------------------------------------------------
// JSON / CSV I/O
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const PMCorrelation& p) {
    nlohmann::json t = nlohmann::json::array();
    for (int x = 0; x < p.n_preparations; ++x) {
        nlohmann::json tx = nlohmann::json::array();
        for (int y = 0; y < p.n_measurements; ++y) {
            nlohmann::json ty = nlohmann::json::array();
            for (int b = 0; b < p.n_outcomes; ++b) ty.push_back(p.p(x, y, b));
            tx.push_back(std::move(ty));
        }
        t.push_back(std::move(tx));
    }
    return {{"type", "pm"},
            {"N", p.n_preparations},
            {"M", p.n_measurements},
            {"K", p.n_outcomes},
            {"p", std::move(t)}};
}

inline nlohmann::json to_json(const BellCorrelation& r) {
    nlohmann::json t = nlohmann::json::array();
    for (int x = 0; x < r.n_settings_a; ++x) {
        nlohmann::json tx = nlohmann::json::array();
        for (int y = 0; y < r.n_settings_b; ++y) {
            nlohmann::json ty = nlohmann::json::array();
            for (int a = 0; a < r.n_outcomes_a; ++a) {
                nlohmann::json ta = nlohmann::json::array();
                for (int b = 0; b < r.n_outcomes_b; ++b) ta.push_back(r.r(x, y, a, b));
                ty.push_back(std::move(ta));
            }
            tx.push_back(std::move(ty));
        }
        t.push_back(std::move(tx));
    }
    return {{"type", "bell"},
            {"XA", r.n_settings_a},
            {"YB", r.n_settings_b},
            {"A", r.n_outcomes_a},
            {"B", r.n_outcomes_b},
            {"r", std::move(t)}};
}

namespace detail {

inline nlohmann::json parse_json(std::istream& in) {
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, e.what(), {{"byte", e.byte}});
    }
}

inline int require_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw Error(ErrorKind::ParseError, std::string("missing or non-integer field '") + key + "'");
    return j[key].get<int>();
}

}  // namespace detail

inline PMCorrelation pm_from_json(const nlohmann::json& j, double tol = kDefaultTol) {
    if (j.contains("type") && j["type"] != "pm")
        throw Error(ErrorKind::ParseError, "expected a correlation of type 'pm'",
                    {{"type", j["type"]}});
    int n = detail::require_int(j, "N");
    int m = detail::require_int(j, "M");
    int k = detail::require_int(j, "K");
    if (n < 1 || m < 1 || k < 1)
        throw Error(ErrorKind::ShapeMismatch, "dimensions must be positive",
                    {{"N", n}, {"M", m}, {"K", k}});
    if (!j.contains("p") || !j["p"].is_array())
        throw Error(ErrorKind::ParseError, "missing tensor field 'p'");
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(n) * m * k);
    const auto& t = j["p"];
    if (static_cast<int>(t.size()) != n)
        throw Error(ErrorKind::ShapeMismatch, "tensor 'p' has wrong first dimension",
                    {{"expected", n}, {"got", t.size()}});
    for (const auto& tx : t) {
        if (!tx.is_array() || static_cast<int>(tx.size()) != m)
            throw Error(ErrorKind::ShapeMismatch, "tensor 'p' has wrong second dimension");
        for (const auto& ty : tx) {
            if (!ty.is_array() || static_cast<int>(ty.size()) != k)
                throw Error(ErrorKind::ShapeMismatch, "tensor 'p' has wrong third dimension");
            for (const auto& v : ty) {
                if (!v.is_number())
                    throw Error(ErrorKind::ParseError, "non-numeric tensor entry");
                probs.push_back(v.get<double>());
            }
        }
    }
    return validate_pm(std::move(probs), n, m, k, tol);
}

inline BellCorrelation bell_from_json(const nlohmann::json& j, double tol = kDefaultTol) {
    if (j.contains("type") && j["type"] != "bell")
        throw Error(ErrorKind::ParseError, "expected a correlation of type 'bell'",
                    {{"type", j["type"]}});
    int xa = detail::require_int(j, "XA");
    int yb = detail::require_int(j, "YB");
    int na = detail::require_int(j, "A");
    int nb = detail::require_int(j, "B");
    if (xa < 1 || yb < 1 || na < 1 || nb < 1)
        throw Error(ErrorKind::ShapeMismatch, "dimensions must be positive");
    if (!j.contains("r") || !j["r"].is_array())
        throw Error(ErrorKind::ParseError, "missing tensor field 'r'");
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(xa) * yb * na * nb);
    const auto& t = j["r"];
    if (static_cast<int>(t.size()) != xa)
        throw Error(ErrorKind::ShapeMismatch, "tensor 'r' has wrong first dimension");
    for (const auto& tx : t) {
        if (!tx.is_array() || static_cast<int>(tx.size()) != yb)
            throw Error(ErrorKind::ShapeMismatch, "tensor 'r' has wrong second dimension");
        for (const auto& ty : tx) {
            if (!ty.is_array() || static_cast<int>(ty.size()) != na)
                throw Error(ErrorKind::ShapeMismatch, "tensor 'r' has wrong third dimension");
            for (const auto& ta : ty) {
                if (!ta.is_array() || static_cast<int>(ta.size()) != nb)
                    throw Error(ErrorKind::ShapeMismatch, "tensor 'r' has wrong fourth dimension");
                for (const auto& v : ta) {
                    if (!v.is_number())
                        throw Error(ErrorKind::ParseError, "non-numeric tensor entry");
                    probs.push_back(v.get<double>());
                }
            }
        }
    }
    return validate_bell(std::move(probs), xa, yb, na, nb, tol);
}

// CSV schema: header "x,y,b,p", one row per entry; unlisted entries are 0.
// Dimensions are inferred from the largest indices seen.
inline PMCorrelation pm_from_csv(std::istream& in, double tol = kDefaultTol) {
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::ParseError, "empty CSV input");
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                s.end());
        return s;
    };
    if (strip(line) != "x,y,b,p")
        throw Error(ErrorKind::ParseError, "expected CSV header 'x,y,b,p'", {{"line", 1}});

    struct Row {
        int x, y, b;
        double p;
    };
    std::vector<Row> rows;
    int n = 0, m = 0, k = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        std::istringstream ss(line);
        std::string f[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(ss, f[i], ','))
                throw Error(ErrorKind::ParseError, "expected 4 comma-separated fields",
                            {{"line", lineno}});
        }
        Row row{};
        try {
            row.x = std::stoi(f[0]);
            row.y = std::stoi(f[1]);
            row.b = std::stoi(f[2]);
            row.p = std::stod(f[3]);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "malformed CSV field", {{"line", lineno}});
        }
        if (row.x < 0 || row.y < 0 || row.b < 0)
            throw Error(ErrorKind::ParseError, "negative index", {{"line", lineno}});
        n = std::max(n, row.x + 1);
        m = std::max(m, row.y + 1);
        k = std::max(k, row.b + 1);
        rows.push_back(row);
    }
    if (rows.empty())
        throw Error(ErrorKind::ParseError, "CSV contains no data rows");

    std::vector<double> probs(static_cast<std::size_t>(n) * m * k, 0.0);
    std::vector<bool> seen(probs.size(), false);
    for (const auto& row : rows) {
        std::size_t idx = (static_cast<std::size_t>(row.x) * m + row.y) * k + row.b;
        if (seen[idx])
            throw Error(ErrorKind::ParseError, "duplicate (x,y,b) entry",
                        {{"x", row.x}, {"y", row.y}, {"b", row.b}});
        seen[idx] = true;
        probs[idx] = row.p;
    }
    return validate_pm(std::move(probs), n, m, k, tol);
}

enum class FileFormat { Auto, Json, Csv };

inline PMCorrelation load_pm(std::istream& in, FileFormat fmt = FileFormat::Auto,
                             double tol = kDefaultTol) {
    if (fmt == FileFormat::Auto) {
        // Sniff: JSON input starts with '{'.
        int c = in.peek();
        while (c != EOF && std::isspace(c)) {
            in.get();
            c = in.peek();
        }
        fmt = (c == '{') ? FileFormat::Json : FileFormat::Csv;
    }
    if (fmt == FileFormat::Json) return pm_from_json(detail::parse_json(in), tol);
    return pm_from_csv(in, tol);
}

inline PMCorrelation load_pm(const std::string& path, double tol = kDefaultTol) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::ParseError, "cannot open file", {{"path", path}});
    FileFormat fmt = FileFormat::Auto;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") fmt = FileFormat::Csv;
    return load_pm(in, fmt, tol);
}

inline BellCorrelation load_bell(std::istream& in, double tol = kDefaultTol) {
    return bell_from_json(detail::parse_json(in), tol);
}

inline BellCorrelation load_bell(const std::string& path, double tol = kDefaultTol) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::ParseError, "cannot open file", {{"path", path}});
    return load_bell(in, tol);
}

}  // namespace dimcert
