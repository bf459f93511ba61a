// dimcert: device-independent dimension certification for
// prepare-and-measure correlations.
//
// Every subcommand prints a deterministic JSON report on stdout; errors are
// reported on stderr and mapped to exit codes (2 validation, 3 parse,
// 4 degenerate, 1 internal).

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "dimcert/dimcert.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
    double tol = dimcert::kDefaultTol;
    bool verbose = false;
    bool json_errors = false;
    bool timestamps = false;
    int threads = 0;  // 0 = all available cores

    int effective_threads() const {
        return threads > 0 ? threads : dimcert::default_threads();
    }
};

std::string read_all(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in)
        throw dimcert::Error(dimcert::ErrorKind::ParseError, "cannot open file",
                             {{"path", path}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dimcert::PMCorrelation load_pm_arg(const std::string& path, double tol) {
    std::istringstream in(read_all(path));
    auto fmt = dimcert::FileFormat::Auto;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        fmt = dimcert::FileFormat::Csv;
    return dimcert::load_pm(in, fmt, tol);
}

dimcert::BellCorrelation load_bell_arg(const std::string& path, double tol) {
    std::istringstream in(read_all(path));
    return dimcert::load_bell(in, tol);
}

void emit(const json& report, const GlobalOpts& g) {
    json out = report;
    if (g.timestamps) out["timestamp"] = static_cast<long long>(std::time(nullptr));
    std::cout << dimcert::dump_deterministic(out) << "\n";
}

void write_output(const json& doc, const std::string& path, const GlobalOpts& g) {
    if (path.empty() || path == "-") {
        emit(doc, g);
        return;
    }
    std::ofstream out(path);
    out << dimcert::dump_deterministic(doc) << "\n";
}

// Resolves the --q flag: "uniform", "optimize" or "@file" holding either a
// plain JSON array or {"q": [...]}.
struct QChoice {
    dimcert::SimplexWeights q;
    dimcert::QSource source = dimcert::QSource::Uniform;
    json optimizer_info;  // present only when optimized
};

QChoice resolve_q(const std::string& spec, const dimcert::FidelityMatrix& fid, int n,
                  double tol, int exact_threshold, int restarts, std::uint64_t seed,
                  int threads) {
    QChoice c;
    if (spec == "uniform") {
        c.q = dimcert::SimplexWeights::uniform(n);
        c.source = dimcert::QSource::Uniform;
    } else if (spec == "optimize") {
        dimcert::StQPResult res =
            n <= exact_threshold
                ? dimcert::optimize_q_exact(fid.a, exact_threshold)
                : dimcert::optimize_q_heuristic(fid.a, restarts, seed, threads);
        c.q = res.q_star;
        c.source = dimcert::QSource::Optimized;
        c.optimizer_info = res.to_json();
        c.optimizer_info["seed"] = seed;
    } else if (!spec.empty() && spec[0] == '@') {
        json j = json::parse(read_all(spec.substr(1)));
        std::vector<double> w;
        if (j.is_array())
            w = j.get<std::vector<double>>();
        else if (j.contains("q"))
            w = j["q"].get<std::vector<double>>();
        else
            throw dimcert::Error(dimcert::ErrorKind::ParseError,
                                 "q file must be an array or contain a 'q' field");
        c.q = dimcert::SimplexWeights::validated(std::move(w), tol);
        c.source = dimcert::QSource::User;
    } else {
        throw dimcert::Error(dimcert::ErrorKind::ParseError,
                             "--q must be uniform, optimize or @file", {{"q", spec}});
    }
    return c;
}

json witness_to_json_or_error(const std::function<dimcert::WitnessReport()>& run) {
    try {
        return run().to_json();
    } catch (const dimcert::Error& e) {
        return {{"error", e.to_json()}};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"device-independent dimension bounds for prepare-and-measure correlations"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--tol", g.tol, "validation tolerance")->capture_default_str();
    app.add_flag("--verbose", g.verbose, "human-readable summary on stderr");
    app.add_flag("--json-errors", g.json_errors, "errors as JSON objects on stderr");
    app.add_flag("--timestamps", g.timestamps, "include a timestamp in reports");
    app.add_option("--threads", g.threads, "parallelism degree (0 = all cores)");

    // ---- bound ----
    auto* bound = app.add_subcommand("bound", "dimension lower bound for a PM correlation");
    std::string bound_file, bound_q = "uniform";
    int bound_exact_threshold = 20, bound_restarts = 64;
    std::uint64_t bound_seed = 1;
    bound->add_option("file", bound_file, "PM correlation (JSON/CSV), '-' for stdin")->required();
    bound->add_option("--q", bound_q, "uniform | optimize | @qfile.json")->capture_default_str();
    bound->add_option("--exact-threshold", bound_exact_threshold,
                      "largest N solved by exact face enumeration")->capture_default_str();
    bound->add_option("--restarts", bound_restarts, "heuristic optimizer restarts")
        ->capture_default_str();
    bound->add_option("--seed", bound_seed, "heuristic optimizer seed")->capture_default_str();

    // ---- bell ----
    auto* bell = app.add_subcommand("bell", "dimension lower bounds for a Bell correlation");
    std::string bell_file;
    bell->add_option("file", bell_file, "Bell correlation JSON, '-' for stdin")->required();

    // ---- transform ----
    auto* transform =
        app.add_subcommand("transform", "map a PM correlation to its Bell-scenario form");
    std::string tr_file, tr_q = "uniform";
    int tr_exact_threshold = 20, tr_restarts = 64;
    std::uint64_t tr_seed = 1;
    transform->add_option("file", tr_file, "PM correlation, '-' for stdin")->required();
    transform->add_option("--q", tr_q, "uniform | optimize | @qfile.json")->capture_default_str();
    transform->add_option("--exact-threshold", tr_exact_threshold, "")->capture_default_str();
    transform->add_option("--restarts", tr_restarts, "")->capture_default_str();
    transform->add_option("--seed", tr_seed, "")->capture_default_str();

    // ---- witness ----
    auto* witness = app.add_subcommand("witness", "evaluate dimension witnesses");
    std::string wit_file, wit_kind = "all";
    int wit_d = 2;
    witness->add_option("file", wit_file, "PM correlation, '-' for stdin")->required();
    witness->add_option("--kind", wit_kind, "compressibility|quadratic|det-w2|psdrank|all")
        ->capture_default_str();
    witness->add_option("--d", wit_d, "dimension tested by the quadratic witness")
        ->capture_default_str();

    // ---- generate ----
    auto* generate = app.add_subcommand("generate", "construct named correlation families");
    generate->require_subcommand(1);
    std::string gen_out;
    generate->add_option("-o,--output", gen_out, "output file (default stdout)");

    auto* gen_toy_cmd = generate->add_subcommand("toy", "perfect bit-retrieval family");
    gen_toy_cmd->fallthrough();
    int toy_m = 1;
    gen_toy_cmd->add_option("--m", toy_m, "number of bits")->required();

    auto* gen_rac_cmd = generate->add_subcommand("rac", "random access code family");
    gen_rac_cmd->fallthrough();
    int rac_m = 1;
    double rac_beta = 1.0;
    gen_rac_cmd->add_option("--m", rac_m, "number of bits")->required();
    gen_rac_cmd->add_option("--beta", rac_beta, "per-bit success probability")->required();

    auto* gen_nc_cmd =
        generate->add_subcommand("nonconvexity", "the pair whose mixture needs dimension 3");
    gen_nc_cmd->fallthrough();
    std::string nc_mix = "0.5,0.5";
    int nc_which = 0;
    gen_nc_cmd->add_option("--mix", nc_mix, "mixture weights w1,w2")->capture_default_str();
    gen_nc_cmd->add_option("--which", nc_which, "emit p_1 or p_2 instead of the mixture (1|2)");

    // ---- realize ----
    auto* realize = app.add_subcommand("realize", "search for a d-dimensional realization");
    std::string rz_file, rz_out;
    int rz_dim = 1, rz_restarts = 50;
    std::uint64_t rz_seed = 1;
    double rz_tol = 1e-6;
    bool rz_force = false;
    realize->add_option("file", rz_file, "PM correlation, '-' for stdin")->required();
    realize->add_option("--dim", rz_dim, "target dimension")->required();
    realize->add_option("--restarts", rz_restarts, "search restarts")->capture_default_str();
    realize->add_option("--seed", rz_seed, "search seed")->capture_default_str();
    realize->add_option("--tol", rz_tol, "residual target for 'found'")->capture_default_str();
    realize->add_flag("--force", rz_force, "search even when the lower bound rules d out");
    realize->add_option("-o,--output", rz_out, "write the realization JSON to this file");

    // ---- rac-scan ----
    auto* rac_scan = app.add_subcommand("rac-scan", "compare the main bound against Nayak's");
    int scan_m = 2;
    double scan_min = 0.5, scan_max = 1.0, scan_step = 1e-3;
    std::string scan_csv;
    rac_scan->add_option("--m", scan_m, "number of bits")->required();
    rac_scan->add_option("--beta-min", scan_min, "scan start")->capture_default_str();
    rac_scan->add_option("--beta-max", scan_max, "scan end")->capture_default_str();
    rac_scan->add_option("--step", scan_step, "scan step")->capture_default_str();
    rac_scan->add_option("--csv", scan_csv, "also write beta,fidelity_raw,fidelity_lb,nayak_lb,winner CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bound) {
            auto p = load_pm_arg(bound_file, g.tol);
            auto fid = dimcert::fidelity_matrix(p);
            auto qc = resolve_q(bound_q, fid, p.n_preparations, g.tol, bound_exact_threshold,
                                bound_restarts, bound_seed, g.effective_threads());
            auto rep = dimcert::pm_bound(fid, qc.q, qc.source);
            json out = rep.to_json();
            out["command"] = "bound";
            if (!qc.optimizer_info.is_null()) out["optimizer"] = qc.optimizer_info;
            emit(out, g);
            if (g.verbose)
                std::cerr << "dimension >= " << rep.dimension_lb << " (raw " << rep.raw_bound
                          << ", q " << to_string(rep.q_source) << ")\n";
        } else if (*bell) {
            auto r = load_bell_arg(bell_file, g.tol);
            auto rep = dimcert::bell_bound(r);
            json out = rep.to_json();
            out["command"] = "bell";
            out["no_signaling_advisory"] = dimcert::check_no_signaling(r, g.tol);
            emit(out, g);
            if (g.verbose) {
                if (rep.best_unbounded())
                    std::cerr << "no finite-dimensional realization of this data under exact "
                                 "arithmetic\n";
                else
                    std::cerr << "local dimension >= " << dimcert::ceil_with_slack(rep.best())
                              << "\n";
            }
        } else if (*transform) {
            auto p = load_pm_arg(tr_file, g.tol);
            auto fid = dimcert::fidelity_matrix(p);
            auto qc = resolve_q(tr_q, fid, p.n_preparations, g.tol, tr_exact_threshold,
                                tr_restarts, tr_seed, g.effective_threads());
            emit(dimcert::to_json(dimcert::pm_to_bell(p, qc.q)), g);
        } else if (*witness) {
            auto p = load_pm_arg(wit_file, g.tol);
            json out{{"command", "witness"}};
            if (wit_kind == "all") {
                json reports = json::array();
                reports.push_back(witness_to_json_or_error(
                    [&] { return dimcert::check_incompressible(p); }));
                reports.push_back(witness_to_json_or_error(
                    [&] { return dimcert::quadratic_witness(p, wit_d); }));
                reports.push_back(
                    witness_to_json_or_error([&] { return dimcert::det_w2_witness(p); }));
                reports.push_back(witness_to_json_or_error(
                    [&] { return dimcert::psd_rank_lower_bound(p); }));
                out["reports"] = reports;
            } else if (wit_kind == "compressibility") {
                out["report"] = dimcert::check_incompressible(p).to_json();
            } else if (wit_kind == "quadratic") {
                out["report"] = dimcert::quadratic_witness(p, wit_d).to_json();
            } else if (wit_kind == "det-w2") {
                out["report"] = dimcert::det_w2_witness(p).to_json();
            } else if (wit_kind == "psdrank") {
                out["report"] = dimcert::psd_rank_lower_bound(p).to_json();
            } else {
                throw dimcert::Error(dimcert::ErrorKind::ParseError, "unknown witness kind",
                                     {{"kind", wit_kind}});
            }
            emit(out, g);
        } else if (*generate) {
            dimcert::PMCorrelation p;
            if (*gen_toy_cmd) {
                p = dimcert::gen_toy(toy_m);
            } else if (*gen_rac_cmd) {
                p = dimcert::gen_rac(rac_m, rac_beta);
            } else {
                auto [p1, p2] = dimcert::gen_nonconvexity_pair();
                if (nc_which == 1) {
                    p = p1;
                } else if (nc_which == 2) {
                    p = p2;
                } else {
                    double w1 = 0.5, w2 = 0.5;
                    if (std::sscanf(nc_mix.c_str(), "%lf,%lf", &w1, &w2) != 2)
                        throw dimcert::Error(dimcert::ErrorKind::ParseError,
                                             "--mix expects w1,w2", {{"mix", nc_mix}});
                    auto w = dimcert::SimplexWeights::validated({w1, w2}, g.tol);
                    p = dimcert::mix({p1, p2}, w);
                }
            }
            write_output(dimcert::to_json(p), gen_out, g);
        } else if (*realize) {
            auto p = load_pm_arg(rz_file, g.tol);
            auto fid = dimcert::fidelity_matrix(p);
            // Lower bounds already rule out some dimensions; only search past
            // them when forced.
            long long lb = dimcert::pm_bound(fid, dimcert::SimplexWeights::uniform(
                                                      p.n_preparations),
                                             dimcert::QSource::Uniform)
                               .dimension_lb;
            if (p.n_preparations <= 20) {
                auto opt = dimcert::optimize_q_exact(fid.a);
                lb = std::max(lb, dimcert::pm_bound(fid, opt.q_star,
                                                    dimcert::QSource::Optimized)
                                      .dimension_lb);
            }
            json out{{"command", "realize"}, {"dim", rz_dim},
                     {"seed", rz_seed},      {"lower_bound", lb},
                     {"note", "not_found is advisory only; impossibility is certified by lower "
                              "bounds, never by search failure"}};
            if (lb > rz_dim && !rz_force) {
                out["status"] = "skipped";
                out["impossible_by_lower_bound"] = true;
                emit(out, g);
                return 0;
            }
            out["impossible_by_lower_bound"] = lb > rz_dim;
            auto res = dimcert::search_realization(p, rz_dim, rz_restarts, rz_seed, rz_tol,
                                                   g.effective_threads());
            out["status"] =
                res.status == dimcert::SearchOutcome::Status::Found ? "found" : "not_found";
            out["residual"] = res.residual;
            out["restarts_used"] = res.restarts_used;
            json rj = dimcert::to_json(*res.realization);
            out["realization"] = rj;
            if (!rz_out.empty()) {
                std::ofstream f(rz_out);
                f << dimcert::dump_deterministic(rj) << "\n";
            }
            emit(out, g);
            if (g.verbose)
                std::cerr << out["status"].get<std::string>() << " at residual " << res.residual
                          << "\n";
        } else if (*rac_scan) {
            auto rows = dimcert::compare_rac_bounds(scan_m, scan_min, scan_max, scan_step);
            json jrows = json::array();
            for (const auto& r : rows)
                jrows.push_back({{"beta", r.beta},
                                 {"fidelity_raw", r.fidelity_raw},
                                 {"fidelity_lb", r.fidelity_lb},
                                 {"nayak_lb", r.nayak_lb},
                                 {"winner", r.winner}});
            json out{{"command", "rac-scan"}, {"m", scan_m}, {"rows", jrows}};
            if (!scan_csv.empty()) {
                std::ofstream f(scan_csv);
                f << "beta,fidelity_raw,fidelity_lb,nayak_lb,winner\n";
                char buf[160];
                for (const auto& r : rows) {
                    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%lld,%lld,%s\n", r.beta,
                                  r.fidelity_raw, r.fidelity_lb, r.nayak_lb, r.winner.c_str());
                    f << buf;
                }
            }
            emit(out, g);
        }
    } catch (const dimcert::Error& e) {
        if (g.json_errors)
            std::cerr << dimcert::dump_deterministic(json{{"error", e.to_json()}}) << "\n";
        else
            std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        if (g.json_errors)
            std::cerr << dimcert::dump_deterministic(json{
                             {"error", {{"kind", "Internal"}, {"message", e.what()}}}})
                      << "\n";
        else
            std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
