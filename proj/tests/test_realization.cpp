#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "dimcert/generators.hpp"
#include "dimcert/realization.hpp"
#include "dimcert/realization_search.hpp"
#include "support.hpp"

using namespace dimcert;

namespace {

const double kBeta2 = std::cos(M_PI / 8) * std::cos(M_PI / 8);

// Qubit encoding of two bits: Bloch vectors in the x-z plane at odd
// multiples of pi/4, measured along z and along x.
Realization qubit_rac2_realization() {
    using cd = std::complex<double>;
    auto bloch_state = [](double phi) {
        Eigen::MatrixXcd rho(2, 2);
        rho << cd(0.5 * (1 + std::cos(phi)), 0), cd(0.5 * std::sin(phi), 0),
            cd(0.5 * std::sin(phi), 0), cd(0.5 * (1 - std::cos(phi)), 0);
        return rho;
    };
    Realization r;
    r.dim = 2;
    for (double phi : {M_PI / 4, 7 * M_PI / 4, 3 * M_PI / 4, 5 * M_PI / 4})
        r.states.push_back(bloch_state(phi));
    Eigen::MatrixXcd z0(2, 2), z1(2, 2), x0(2, 2), x1(2, 2);
    z0 << 1, 0, 0, 0;
    z1 << 0, 0, 0, 1;
    x0 << 0.5, 0.5, 0.5, 0.5;
    x1 << 0.5, -0.5, -0.5, 0.5;
    r.povms = {{z0, z1}, {x0, x1}};
    return r;
}

SearchParams random_params_for(const PMCorrelation& p, int d, std::uint64_t seed) {
    std::seed_seq sq{seed};
    std::mt19937_64 rng(sq);
    return detail::random_params(p, d, rng);
}

}  // namespace

TEST_CASE("verify_realization on the classical construction") {
    auto p = gen_rac(2, 0.77);
    CHECK(verify_realization(classical_realization(p), p) <= 1e-12);
}

TEST_CASE("the known qubit realization matches the two-bit RAC") {
    auto r = qubit_rac2_realization();
    CHECK(verify_realization(r, gen_rac(2, kBeta2)) <= 1e-10);
    // Against the wrong beta the residual is the entrywise gap.
    CHECK(verify_realization(r, gen_rac(2, 0.9)) ==
          Catch::Approx(0.9 - kBeta2).margin(1e-10));
}

TEST_CASE("verify_realization fails loudly on invariant violations") {
    auto r = qubit_rac2_realization();
    r.povms[0][0](0, 0) = 1.5;  // breaks completeness
    try {
        verify_realization(r, gen_rac(2, kBeta2));
        FAIL("expected InvalidRealization");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidRealization);
    }
    Realization bad = qubit_rac2_realization();
    bad.states[0] *= 2.0;  // trace 2
    CHECK_THROWS_AS(verify_realization(bad, gen_rac(2, kBeta2)), Error);
}

TEST_CASE("realization JSON round-trips") {
    auto r = qubit_rac2_realization();
    auto j = to_json(r);
    auto back = realization_from_json(j);
    CHECK(back.dim == 2);
    CHECK(verify_realization(back, gen_rac(2, kBeta2)) <= 1e-10);
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        int m = 1 + static_cast<int>(rng() % 2);
        int k = 2 + static_cast<int>(rng() % 2);
        int d = 2 + static_cast<int>(rng() % 2);
        auto p = testsupport::random_pm(n, m, k, rng);
        auto params = random_params_for(p, d, 1000 + trial);

        SearchParams grad;
        search_objective_and_gradient(p, params, grad);

        const double h = 1e-6;
        double max_rel = 0.0;
        double gnorm = std::sqrt(detail::params_dot(grad, grad));
        auto probe = [&](Eigen::MatrixXcd& entry, const Eigen::MatrixXcd& gmat, int i, int j,
                         bool imag_part) {
            std::complex<double> delta = imag_part ? std::complex<double>(0, h)
                                                   : std::complex<double>(h, 0);
            auto orig = entry(i, j);
            entry(i, j) = orig + delta;
            double fp = search_objective(p, params);
            entry(i, j) = orig - delta;
            double fm = search_objective(p, params);
            entry(i, j) = orig;
            double fd = (fp - fm) / (2 * h);
            double an = imag_part ? gmat(i, j).imag() : gmat(i, j).real();
            max_rel = std::max(max_rel, std::abs(fd - an) / std::max(gnorm, 1e-8));
        };
        for (int x = 0; x < n; ++x)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    probe(params.states[x], grad.states[x], i, j, false);
                    probe(params.states[x], grad.states[x], i, j, true);
                }
        for (int y = 0; y < m; ++y)
            for (int b = 0; b < k; ++b)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        probe(params.povms[y][b], grad.povms[y][b], i, j, false);
                        probe(params.povms[y][b], grad.povms[y][b], i, j, true);
                    }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("classical warm start succeeds immediately at d = N") {
    auto p = gen_toy(2);
    auto out = search_realization(p, 4, 1, 3);
    CHECK(out.status == SearchOutcome::Status::Found);
    CHECK(out.residual <= 1e-10);
    CHECK(verify_realization(*out.realization, p) <= out.residual + 1e-14);
}

TEST_CASE("search finds a qubit model of the two-bit RAC") {
    auto p = gen_rac(2, kBeta2);
    auto out = search_realization(p, 2, 12, 7);
    CHECK(out.status == SearchOutcome::Status::Found);
    CHECK(out.residual <= 1e-6);
    CHECK(verify_realization(*out.realization, p) <= out.residual + 1e-12);
}

TEST_CASE("search is deterministic and thread-count independent") {
    auto p = gen_toy(1);
    auto a = search_realization(p, 2, 4, 5, 1e-6, 1);
    auto b = search_realization(p, 2, 4, 5, 1e-6, 4);
    CHECK(a.residual == b.residual);
    CHECK(a.realization->states[0] == b.realization->states[0]);
}

TEST_CASE("packaged realizations always satisfy the invariants") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = testsupport::random_pm(3, 2, 3, rng);
        auto params = random_params_for(p, 2, 5000 + trial);
        auto r = package_realization(params);
        CHECK_NOTHROW(check_realization(r));
    }
}
