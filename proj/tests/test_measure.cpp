#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "jumpbsde/measure.hpp"
#include "jumpbsde/scenarios.hpp"

using namespace jumpbsde;

namespace {

ScenarioModel constant_model(std::size_t steps, std::size_t marks, double jump) {
    return deterministic_grid(steps, marks, {jump});
}

}  // namespace

TEST_CASE("outcome indexing puts NoJump last") {
    CHECK(Outcome::jump(2).index(3) == 2);
    CHECK(Outcome::no_jump().index(3) == 3);
    CHECK_THROWS_AS(Outcome::no_jump().mark(), std::logic_error);
    CHECK(Outcome::jump(1) == Outcome::jump(1));
    CHECK_FALSE(Outcome::jump(1) == Outcome::no_jump());
}

TEST_CASE("mark space rejects duplicates and empty sets") {
    CHECK_THROWS_AS(MarkSpace({}), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({"a", "a"}), std::invalid_argument);
    CHECK(MarkSpace::indexed(3).size() == 3);
}

TEST_CASE("tree enumerates every history with positive probability") {
    const ScenarioTree tree(constant_model(2, 2, 0.5));
    CHECK(tree.node_count() == 1 + 3 + 9);
    CHECK(tree.slot_count() == 1 + 3);
    for (std::size_t k = 0; k <= tree.horizon(); ++k) {
        const auto [first, last] = tree.depth_range(k);
        double mass = 0.0;
        for (std::size_t n = first; n < last; ++n) {
            mass += tree.node(n).probability;
            CHECK(tree.node(n).depth == k);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
    }
    // Jump of mark 0 then no jump.
    const auto [first, last] = tree.leaf_range();
    std::size_t found = 0;
    for (std::size_t n = first; n < last; ++n) {
        const History h = tree.history(n);
        if (h == History{Outcome::jump(0), Outcome::no_jump()}) {
            ++found;
            CHECK(tree.node(n).probability == doctest::Approx(0.25 * 0.5));
            CHECK(tree.node(n).compensator == doctest::Approx(1.0));
            CHECK(tree.path_slots(n).size() == 2);
        }
    }
    CHECK(found == 1);
}

TEST_CASE("full jumps and zero jumps prune unreachable children") {
    SUBCASE("Delta A = 1 removes NoJump") {
        const ScenarioTree tree(constant_model(2, 2, 1.0));
        CHECK(tree.node_count() == 1 + 2 + 4);
        CHECK_FALSE(tree.slot(0).has_child(2));
    }
    SUBCASE("Delta A = 0 keeps only NoJump") {
        const ScenarioTree tree(constant_model(3, 2, 0.0));
        CHECK(tree.node_count() == 4);
        CHECK(tree.purely_discrete());
    }
    SUBCASE("a mark with zero weight is skipped") {
        const ScenarioTree tree(deterministic_grid(1, 3, {0.5}, {0.5, 0.0, 0.5}));
        CHECK(tree.node_count() == 1 + 3);
        CHECK_FALSE(tree.slot(0).has_child(1));
    }
}

TEST_CASE("history-dependent jumps stay predictable") {
    const ScenarioTree tree(predictable_random_jumps(3, 1, two_state_rule(0.5, 0.2, 0.7), {}));
    for (const Slot& s : tree.slots()) {
        const History past = tree.history(s.parent);
        const double expected = past.empty() ? 0.5 : (past.back().is_jump() ? 0.2 : 0.7);
        CHECK(s.jump == expected);
    }
}

TEST_CASE("invalid models are rejected") {
    ScenarioModel bad = constant_model(2, 1, 0.5);
    SUBCASE("jump above one") {
        bad.jump_size = [](std::size_t, const History&) { return 1.2; };
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
    SUBCASE("negative jump") {
        bad.jump_size = [](std::size_t, const History&) { return -0.1; };
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
    SUBCASE("mark law off the simplex") {
        bad.mark_law = [](std::size_t, const History&) { return std::vector<double>{0.9}; };
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
    SUBCASE("mark law of the wrong size") {
        bad.mark_law = [](std::size_t, const History&) { return std::vector<double>{0.5, 0.5}; };
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
    SUBCASE("non-increasing grid") {
        bad.grid = {0.0, 0.5, 0.5};
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
    SUBCASE("negative continuous part") {
        bad.continuous_increments = {0.1, -0.1};
        CHECK_THROWS_AS(ScenarioTree{bad}, std::invalid_argument);
    }
}

TEST_CASE("Doleans exponential on hand paths") {
    const std::vector<Increment> path{{0.0, 0.5}, {1.0, 0.0}, {0.5, 1.0}};
    const auto e = doleans_exponential(path, 2.0);
    REQUIRE(e.size() == 4);
    CHECK(e[0] == 1.0);
    CHECK(e[1] == doctest::Approx(2.0));
    CHECK(e[2] == doctest::Approx(2.0 * std::exp(2.0)));
    CHECK(e[3] == doctest::Approx(2.0 * std::exp(3.0) * 3.0));
    CHECK_THROWS_AS(doleans_exponential(path, -1.0), std::invalid_argument);

    const auto plain = stochastic_exponential(std::vector<Increment>{{0.0, -1.0}, {0.3, 0.2}});
    CHECK(plain[1] == 0.0);
    CHECK(plain[2] == 0.0);
}

TEST_CASE("square-root factorization on random paths") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Increment> path(1 + trial % 7);
        for (Increment& inc : path)
            inc = {u(rng) < 0.5 ? 0.0 : u(rng), u(rng) < 0.2 ? 1.0 : u(rng)};
        const double beta = 0.05 + 5.0 * u(rng);
        const auto e = doleans_exponential(path, beta);
        const auto f = doleans_sqrt_factorization(path, beta);
        for (std::size_t k = 0; k < e.size(); ++k) {
            CHECK(std::abs(f.upper[k] * f.upper[k] - e[k]) <= 1e-12 * e[k]);
            CHECK(std::abs(f.upper[k] * f.lower[k] - 1.0) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(doleans_sqrt_factorization(std::vector<Increment>{{0.0, 0.5}}, 0.0),
                    std::invalid_argument);
}

TEST_CASE("Doleans path on a tree matches the path formula") {
    ScenarioModel model = constant_model(3, 2, 0.4);
    model.continuous_increments = {0.2, 0.0, 0.3};
    const ScenarioTree tree(model);
    const double beta = 1.7;
    const DoleansPath e(tree, beta);
    const auto [first, last] = tree.leaf_range();
    for (std::size_t leaf = first; leaf < last; ++leaf) {
        std::vector<Increment> path;
        for (std::size_t j : tree.path_slots(leaf))
            path.push_back({tree.slot(j).continuous, tree.slot(j).jump});
        const auto ref = doleans_exponential(path, beta);
        CHECK(e.at_node(leaf) == doctest::Approx(ref.back()).epsilon(1e-14));
    }
    // Integral of E over a continuous stretch: E_{t-} (e^{beta c} - 1) / beta.
    const Slot& s0 = tree.slot(0);
    CHECK(e.continuous_integral(0) == doctest::Approx(std::expm1(beta * 0.2) / beta));
    CHECK(e.at_slot(0) == doctest::Approx(std::exp(beta * 0.2) * (1.0 + beta * s0.jump)));
    CHECK_FALSE(tree.purely_discrete());

    const DoleansPath flat(tree, 0.0);
    CHECK(flat.continuous_integral(0) == doctest::Approx(0.2));
    CHECK(flat.at_node(last - 1) == 1.0);
}
