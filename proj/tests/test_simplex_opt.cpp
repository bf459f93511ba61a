#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dimcert/generators.hpp"
#include "dimcert/pm_bound.hpp"
#include "dimcert/simplex_opt.hpp"
#include "support.hpp"

using namespace dimcert;

TEST_CASE("identity form is minimized at the uniform distribution") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    auto res = optimize_q_exact(a);
    CHECK(res.certified_global);
    CHECK(res.value == Catch::Approx(0.5).margin(1e-12));
    CHECK(res.q_star[0] == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("constant form returns uniform by the larger-support tie-break") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
    auto res = optimize_q_exact(a);
    CHECK(res.value == Catch::Approx(1.0).margin(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(res.q_star[i] == Catch::Approx(1.0 / 3).margin(1e-10));
}

TEST_CASE("two-bit RAC optimum is the uniform distribution at value 5/8") {
    double beta = std::cos(M_PI / 8) * std::cos(M_PI / 8);
    auto f = fidelity_matrix(gen_rac(2, beta));
    auto res = optimize_q_exact(f.a);
    CHECK(res.value == Catch::Approx(5.0 / 8.0).margin(1e-10));
    for (int i = 0; i < 4; ++i) CHECK(res.q_star[i] == Catch::Approx(0.25).margin(1e-9));
    // Independent oracle: dense simplex grid at step 0.01.
    double grid = testsupport::grid_min_quadratic(f.a, 100);
    CHECK(res.value <= grid + 1e-9);
}

TEST_CASE("fast grid oracle agrees with the naive full scan") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        auto f = fidelity_matrix(testsupport::random_pm(n, 2, 3, rng));
        double fast = testsupport::grid_min_quadratic(f.a, 20);
        double naive = testsupport::grid_min_quadratic_naive(f.a, 20);
        CHECK(fast == Catch::Approx(naive).margin(1e-12));
    }
}

TEST_CASE("exact solver rejects oversized problems") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6);
    CHECK_THROWS_AS(optimize_q_exact(a, 5), Error);
}

TEST_CASE("heuristic finds the identity-form optimum with one restart") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
    auto res = optimize_q_heuristic(a, 1, 1);
    CHECK_FALSE(res.certified_global);
    CHECK(res.value == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("heuristic matches the exact solver on the 8-state retrieval family") {
    auto f = fidelity_matrix(gen_toy(3));
    auto heur = optimize_q_heuristic(f.a, 4, 7);
    CHECK(heur.value == Catch::Approx(1.0 / 8.0).margin(1e-9));
    auto exact = optimize_q_exact(f.a);
    CHECK(heur.value >= exact.value - 1e-9);
}

TEST_CASE("heuristic never beats the exact solver on random instances") {
    std::mt19937_64 rng(42);
    auto f = fidelity_matrix(testsupport::random_pm(6, 3, 3, rng));
    auto exact = optimize_q_exact(f.a);
    auto heur = optimize_q_heuristic(f.a, 16, 42);
    CHECK(heur.value >= exact.value - 1e-9);
}

TEST_CASE("heuristic is deterministic for a fixed seed and thread count independent") {
    std::mt19937_64 rng(8);
    auto f = fidelity_matrix(testsupport::random_pm(5, 2, 3, rng));
    auto r1 = optimize_q_heuristic(f.a, 8, 3, 1);
    auto r2 = optimize_q_heuristic(f.a, 8, 3, 4);
    CHECK(r1.value == r2.value);
    CHECK(r1.q_star.weights == r2.q_star.weights);
}

TEST_CASE("scaling the matrix scales the value and keeps the argmin") {
    std::mt19937_64 rng(15);
    auto f = fidelity_matrix(testsupport::random_pm(4, 2, 2, rng));
    auto base = optimize_q_exact(f.a);
    auto scaled = optimize_q_exact(Eigen::MatrixXd(3.0 * f.a));
    CHECK(scaled.value == Catch::Approx(3.0 * base.value).margin(1e-9));
    for (int i = 0; i < 4; ++i)
        CHECK(scaled.q_star[i] == Catch::Approx(base.q_star[i]).margin(1e-8));
}

TEST_CASE("optimizer outputs are valid simplex weights") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);
        auto f = fidelity_matrix(testsupport::random_pm(n, 2, 3, rng));
        auto exact = optimize_q_exact(f.a);
        auto heur = optimize_q_heuristic(f.a, 4, trial);
        CHECK_NOTHROW(SimplexWeights::validated(exact.q_star.weights, 1e-10));
        CHECK_NOTHROW(SimplexWeights::validated(heur.q_star.weights, 1e-10));
        // The optimizer value matches the quadratic form of its argmin.
        Eigen::Map<const Eigen::VectorXd> q(exact.q_star.weights.data(), n);
        CHECK(exact.value == Catch::Approx(q.dot(f.a * q)).margin(1e-10));
    }
}
