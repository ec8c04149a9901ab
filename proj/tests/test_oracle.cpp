#include <doctest.h>

#include <cmath>

#include "dabp/oracle.hpp"
#include "test_util.hpp"

using namespace dabp;

TEST_CASE("exact solve of a single unary function") {
    COPInstance inst;
    inst.domains = {3};
    inst.functions.push_back({{0}, {3, 1, 2}});
    const auto res = oracle::solve_exact(inst);
    CHECK(res.assignment == Assignment{1});
    CHECK(res.cost == 1.0);
    CHECK(res.enumerated == 3);
}

TEST_CASE("ties resolve to the lexicographically first assignment") {
    COPInstance inst;
    inst.domains = {2, 2};
    inst.functions.push_back({{0, 1}, {7, 7, 7, 7}});
    const auto res = oracle::solve_exact(inst);
    CHECK(res.assignment == Assignment{0, 0});
}

TEST_CASE("exact solver agrees with tree dynamic programming") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(700 + seed);
        const COPInstance inst = testutil::random_tree(8, 3, rng);
        const auto res = oracle::solve_exact(inst);
        CHECK(std::abs(res.cost - testutil::tree_dp_optimum(inst)) <= 1e-9);
        CHECK(std::abs(total_cost(inst, res.assignment) - res.cost) <= 1e-12);
    }
}

TEST_CASE("search-space cap") {
    COPInstance inst;
    inst.domains.assign(30, 2); // 2^30 > default cap
    CHECK_THROWS_AS(oracle::solve_exact(inst), std::runtime_error);
    CHECK_NOTHROW(oracle::solve_exact(inst, std::uint64_t{1} << 31));
}

TEST_CASE("expected cost: one-hot and uniform special cases") {
    COPInstance inst;
    inst.domains = {2, 2};
    inst.functions.push_back({{0, 1}, {1, 5, 3, 2}});

    SUBCASE("one-hot picks a single entry") {
        const std::vector<std::vector<double>> probs = {{0, 1}, {1, 0}};
        CHECK(oracle::enumerate_expected_cost(inst, probs) == doctest::Approx(3.0));
    }
    SUBCASE("uniform gives the table mean") {
        const std::vector<std::vector<double>> probs = {{0.5, 0.5}, {0.5, 0.5}};
        CHECK(oracle::enumerate_expected_cost(inst, probs) == doctest::Approx(11.0 / 4));
    }
    SUBCASE("probability vectors must match domains") {
        const std::vector<std::vector<double>> probs = {{0.5, 0.5}, {1.0}};
        CHECK_THROWS_AS(oracle::enumerate_expected_cost(inst, probs),
                        std::invalid_argument);
    }
}

TEST_CASE("oracle optimum lower-bounds random assignments") {
    Rng rng(800);
    const COPInstance inst = testutil::random_cyclic(7, 3, 6, rng);
    const auto res = oracle::solve_exact(inst);
    Rng arng(801);
    for (int rep = 0; rep < 200; ++rep) {
        Assignment a(7);
        for (int i = 0; i < 7; ++i) a[i] = arng.uniform_int(3);
        CHECK(res.cost <= total_cost(inst, a) + 1e-9);
    }
}
