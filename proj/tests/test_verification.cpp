#include <doctest.h>

#include <cmath>
#include <random>

#include "jumpbsde/scenarios.hpp"
#include "jumpbsde/solver.hpp"
#include "jumpbsde/verification.hpp"

using namespace jumpbsde;

TEST_CASE("result helpers") {
    const auto id = identity_result("x", 1.0, 1.0 + 1e-11);
    CHECK(id.pass);
    CHECK_FALSE(identity_result("x", 1.0, 1.0 + 1e-9).pass);
    CHECK(identity_result("x", 0.0, 0.0).pass);
    CHECK(inequality_result("x", 1.0, 1.0 - 5e-13).pass);
    CHECK_FALSE(inequality_result("x", 1.0, 1.0 - 5e-12).pass);
    CHECK_FALSE(inequality_result("x", std::nan(""), 1.0).pass);
}

TEST_CASE("energy identity on a single coin flip") {
    // One step, Delta A = 1/2, xi = 1{jump}, f = 0, beta = 1.
    const ScenarioModel model = deterministic_grid(1, 1, {0.5});
    const auto problem = make_problem(model, 1.0, jump_count_terminal(1.0), zero_generator());
    const Solution sol = solve_linear(problem);
    const auto r = check_identity_lemma(problem, sol, 0);
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(0.75));
    CHECK(r.rhs == doctest::Approx(0.75));
    const auto at_end = check_identity_lemma(problem, sol, 1);
    CHECK(at_end.pass);
    CHECK_THROWS_AS(check_identity_lemma(problem, sol, 2), std::out_of_range);
}

TEST_CASE("energy identity on random linear problems") {
    RandomProblemLimits lim;
    lim.linear_only = true;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto inst = random_problem(seed, lim);
        inst.problem.beta = 5.0 * u(rng);
        const Solution sol = solve_linear(inst.problem);
        for (std::size_t k = 0; k <= inst.problem.tree->horizon(); ++k)
            CHECK(check_identity_lemma(inst.problem, sol, k).rel_gap <= 1e-10);
    }
}

TEST_CASE("a wrong solution breaks the identity") {
    const ScenarioModel model = deterministic_grid(2, 2, {0.5});
    const auto problem = make_problem(model, 1.0, jump_count_terminal(1.0), path_generator({0.3, 0.0}));
    Solution sol = solve_linear(problem);
    sol.y[0] += 0.01;
    CHECK_FALSE(check_identity_lemma(problem, sol, 0).pass);
    const auto nonlinear = make_problem(model, 1.0, jump_count_terminal(1.0), seminorm_generator({}, 0.2, 0.2));
    CHECK_THROWS_AS(check_identity_lemma(nonlinear, sol, 0), std::invalid_argument);
}

TEST_CASE("integral inequality on hand paths") {
    SUBCASE("continuous only: 1 <= e - 1") {
        const std::vector<Increment> path{{1.0, 0.0}};
        const std::vector<double> f{1.0};
        const auto r = check_integral_inequality(path, f, 1.0, 0);
        CHECK(r.lhs == doctest::Approx(1.0));
        CHECK(r.rhs == doctest::Approx(std::exp(1.0) - 1.0));
        CHECK(r.pass);
    }
    SUBCASE("single jump with beta = 1 / c: c^2 <= 4 c^2") {
        const double c = 0.3;
        const std::vector<Increment> path{{0.0, c}};
        const std::vector<double> f{1.0};
        const auto r = check_integral_inequality(path, f, 1.0 / c, 0);
        CHECK(r.lhs == doctest::Approx(c * c));
        CHECK(r.rhs == doctest::Approx(4.0 * c * c));
    }
    SUBCASE("empty tail") {
        const std::vector<Increment> path{{0.5, 0.5}};
        const std::vector<double> f{2.0};
        const auto r = check_integral_inequality(path, f, 1.0, 1);
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs == 0.0);
        CHECK(r.pass);
    }
    const std::vector<Increment> path{{1.0, 0.0}};
    const std::vector<double> f{1.0};
    CHECK_THROWS_AS(check_integral_inequality(path, f, 0.0, 0), std::invalid_argument);
}

TEST_CASE("a priori estimate") {
    CHECK(apriori_constant(2.0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(apriori_constant(0.0), std::invalid_argument);

    const ScenarioModel model = deterministic_grid(3, 2, {0.6});
    const auto problem = make_problem(model, 1.5, jump_count_terminal(1.0, -1.0), path_generator({0.4, 0.3}));
    const Solution sol = solve_linear(problem);
    std::vector<double> path(problem.tree->slot_count());
    const std::vector<double> zeros(2, 0.0);
    for (std::size_t j = 0; j < path.size(); ++j)
        path[j] = problem.generator(*problem.tree, j, 0.0, zeros);
    CHECK(check_apriori_estimate(*problem.tree, problem.terminal, path, sol, 1.5).pass);

    // A constant far below c(beta) is a negative control.
    const auto failing = check_apriori_estimate(*problem.tree, problem.terminal, path, sol, 1.5, 0.01);
    CHECK_FALSE(failing.pass);
    CHECK_FALSE(failing.note.empty());
}

TEST_CASE("norm equivalence") {
    SUBCASE("boundary case is tight from below") {
        const ScenarioTree tree(deterministic_grid(1, 1, {0.5}));
        PredictableField z(1, 1);
        z.at(0)[0] = 1.0;
        const auto r = check_norm_equivalence(z, DoleansPath(tree, 0.0), 0.5);
        CHECK(r.lower == doctest::Approx(0.25));
        CHECK(r.lhs == doctest::Approx(0.25));
        CHECK(r.rhs == doctest::Approx(0.5));
        CHECK(r.pass);
    }
    SUBCASE("gamma must cover every jump") {
        const ScenarioTree tree(deterministic_grid(1, 1, {0.7}));
        PredictableField z(1, 1);
        CHECK_THROWS_AS(check_norm_equivalence(z, DoleansPath(tree, 0.0), 0.5), std::invalid_argument);
    }
}

TEST_CASE("Lipschitz checks on presets and a lying driver") {
    const ScenarioTree tree(deterministic_grid(2, 3, {0.7}, {0.2, 0.3, 0.5}));
    std::mt19937_64 rng(9);
    const Generator presets[] = {
        affine_generator({0.1, 0.2}, 0.4, 0.6, -0.8),
        seminorm_generator({}, -0.5, 1.3),
        saturating_generator({}, 0.6, 2.0),
    };
    for (const Generator& f : presets)
        for (std::size_t j = 0; j < tree.slot_count(); ++j)
            CHECK(check_lipschitz(f, tree, j, 500, f.lipschitz_z() * f.lipschitz_z() + 0.1, rng).pass);

    const Generator liar([](const ScenarioTree&, std::size_t, double y, std::span<const double>) {
        return 3.0 * y;
    }, 1.0, 0.0);
    CHECK_FALSE(check_lipschitz(liar, tree, 0, 100, 0.1, rng).pass);
    CHECK_THROWS_AS(check_lipschitz(liar, tree, 0, 10, 0.0, rng), std::invalid_argument);
}

TEST_CASE("expanded seminorm matches the compact form") {
    Slot s;
    s.jump = 0.4;
    s.mark_law = {0.5, 0.5};
    s.children = {0, 0, 0};
    const std::vector<double> dz{1.0, -3.0};
    const double sn = lipschitz_seminorm(dz, s);
    CHECK(expanded_seminorm_sq(dz, s) == doctest::Approx(sn * sn));
}
