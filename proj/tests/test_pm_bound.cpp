#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dimcert/bell_bounds.hpp"
#include "dimcert/generators.hpp"
#include "dimcert/pm_bound.hpp"
#include "support.hpp"

using namespace dimcert;

namespace {
const double kBeta2 = std::cos(M_PI / 8) * std::cos(M_PI / 8);
}

TEST_CASE("identical preparations give the all-ones fidelity matrix") {
    PMCorrelation p;
    p.n_preparations = 3;
    p.n_measurements = 2;
    p.n_outcomes = 2;
    p.probs.assign(3 * 2 * 2, 0.0);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 2; ++y) {
            p.at(x, y, 0) = 0.3;
            p.at(x, y, 1) = 0.7;
        }
    auto f = fidelity_matrix(p);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(f.a(i, j) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("perfect bit retrieval gives the identity fidelity matrix") {
    auto f = fidelity_matrix(gen_toy(2));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(f.a(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
}

TEST_CASE("two-bit RAC fidelity matrix has off-diagonal 1/2") {
    auto f = fidelity_matrix(gen_rac(2, kBeta2));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(f.a(i, j) == Catch::Approx(i == j ? 1.0 : 0.5).margin(1e-12));
    // Ties in the minimizing measurement go to the smallest y.
    CHECK(f.argmin_y(0, 3) == 0);  // differs in both bits
}

TEST_CASE("perfect bit retrieval saturates the trivial bound for every m") {
    for (int m = 1; m <= 6; ++m) {
        auto rep = pm_bound(gen_toy(m), SimplexWeights::uniform(1 << m), QSource::Uniform);
        CHECK(rep.raw_bound == Catch::Approx(std::pow(2.0, m)).margin(1e-9));
        CHECK(rep.dimension_lb == (1 << m));
        CHECK(rep.trivial_ub == (1 << m));
    }
}

TEST_CASE("two-bit RAC bound is 8/5 and certifies a qubit floor") {
    auto rep = pm_bound(gen_rac(2, kBeta2), SimplexWeights::uniform(4), QSource::Uniform);
    CHECK(rep.raw_bound == Catch::Approx(8.0 / 5.0).margin(1e-9));
    CHECK(rep.denominator == Catch::Approx(5.0 / 8.0).margin(1e-9));
    CHECK(rep.dimension_lb == 2);
    CHECK(rep.raw_bound * rep.denominator == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("three-bit RAC bound is 24/17") {
    double beta = 0.5 + 0.5 / std::sqrt(3.0);
    auto rep = pm_bound(gen_rac(3, beta), SimplexWeights::uniform(8), QSource::Uniform);
    CHECK(rep.raw_bound == Catch::Approx(24.0 / 17.0).margin(1e-9));
    CHECK(rep.dimension_lb == 2);
}

TEST_CASE("the even nonconvexity mixture needs three dimensions") {
    auto [p1, p2] = gen_nonconvexity_pair();
    auto mixture = mix({p1, p2}, SimplexWeights::validated({0.5, 0.5}));
    auto rep = pm_bound(mixture, SimplexWeights::uniform(4), QSource::Uniform);
    CHECK(rep.raw_bound == Catch::Approx(16.0 / 7.0).margin(1e-9));
    CHECK(rep.dimension_lb == 3);
}

TEST_CASE("pm_to_bell substitutes q into the joint table") {
    auto p = gen_toy(1);
    auto r = pm_to_bell(p, SimplexWeights::uniform(2));
    CHECK(r.n_settings_a == 1);
    CHECK(r.n_outcomes_a == 2);
    for (int x = 0; x < 2; ++x)
        for (int b = 0; b < 2; ++b)
            CHECK(r.r(0, 0, x, b) == Catch::Approx(x == b ? 0.5 : 0.0).margin(1e-15));

    // Point mass selects a single preparation.
    std::mt19937_64 rng(7);
    auto pr = testsupport::random_pm(3, 2, 2, rng);
    auto rp = pm_to_bell(pr, SimplexWeights{{0.0, 1.0, 0.0}});
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x)
            for (int b = 0; b < 2; ++b)
                CHECK(rp.r(0, y, x, b) ==
                      Catch::Approx(x == 1 ? pr.p(1, y, b) : 0.0).margin(1e-15));
}

TEST_CASE("the transform cross-check identity holds on random instances") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int m = 1 + static_cast<int>(rng() % 4);
        int k = 2 + static_cast<int>(rng() % 4);
        auto p = testsupport::random_pm(n, m, k, rng);
        auto q = testsupport::random_weights(n, rng);
        auto rep = pm_bound(p, q);
        auto b2 = bell_bound_b(pm_to_bell(p, q));
        REQUIRE_FALSE(b2.unbounded);
        CHECK(b2.value == Catch::Approx(rep.raw_bound).margin(1e-9));
    }
}

TEST_CASE("deleting a measurement never increases the bound") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        int m = 2 + static_cast<int>(rng() % 3);
        auto p = testsupport::random_pm(n, m, 3, rng);
        auto q = testsupport::random_weights(n, rng);
        double full = pm_bound(p, q).raw_bound;

        int drop = static_cast<int>(rng() % m);
        PMCorrelation smaller;
        smaller.n_preparations = n;
        smaller.n_measurements = m - 1;
        smaller.n_outcomes = 3;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < m; ++y) {
                if (y == drop) continue;
                for (int b = 0; b < 3; ++b) smaller.probs.push_back(p.p(x, y, b));
            }
        CHECK(pm_bound(smaller, q).raw_bound <= full + 1e-9);
    }
}

TEST_CASE("uniform q with zero off-diagonal fidelity saturates at N") {
    // The diagonal alone contributes 1/N to the denominator.
    auto f = fidelity_matrix(gen_toy(3));
    double diag = 0.0;
    int n = 8;
    for (int x = 0; x < n; ++x) diag += (1.0 / n) * (1.0 / n) * f.a(x, x);
    CHECK(diag == Catch::Approx(1.0 / n).margin(1e-12));
    auto rep = pm_bound(f, SimplexWeights::uniform(n));
    CHECK(rep.raw_bound == Catch::Approx(static_cast<double>(n)).margin(1e-9));
}

TEST_CASE("relabeling preparations with a matching q permutation is invariant") {
    std::mt19937_64 rng(123);
    auto p = testsupport::random_pm(4, 2, 3, rng);
    auto q = testsupport::random_weights(4, rng);
    double base = pm_bound(p, q).raw_bound;

    std::vector<int> perm{2, 0, 3, 1};
    PMCorrelation pp = p;
    SimplexWeights qp = q;
    for (int x = 0; x < 4; ++x) {
        qp.weights[perm[x]] = q[x];
        for (int y = 0; y < 2; ++y)
            for (int b = 0; b < 3; ++b) pp.at(perm[x], y, b) = p.p(x, y, b);
    }
    CHECK(pm_bound(pp, qp).raw_bound == Catch::Approx(base).margin(1e-12));
}

TEST_CASE("degenerate q is rejected") {
    auto f = fidelity_matrix(gen_toy(1));
    CHECK_THROWS_AS(pm_bound(f, SimplexWeights{{0.0, 0.0}}), Error);
}
