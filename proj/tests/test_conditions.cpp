#include <doctest.h>

#include <cmath>
#include <random>

#include "jumpbsde/conditions.hpp"
#include "jumpbsde/errors.hpp"
#include "jumpbsde/scenarios.hpp"

using namespace jumpbsde;

TEST_CASE("main hypothesis and counterexample detection") {
    const ScenarioTree tree(deterministic_grid(3, 1, {0.2, 0.5, 0.1}));
    CHECK(check_main_hypothesis(tree, 1.0) == doctest::Approx(1.0 - 2.0 * 0.25));
    CHECK(check_main_hypothesis(tree, 0.0) == 1.0);
    CHECK(detect_counterexample(tree, 1.0).empty());

    // Both step-2 slots (after a jump and after none) are flagged.
    const auto flagged = detect_counterexample(tree, 2.0);
    REQUIRE(flagged.size() == 2);
    for (const FlaggedSlot& f : flagged) {
        CHECK(f.step == 2);
        CHECK(f.value == doctest::Approx(2.0));
    }

    const double ly = 1.0 / (std::sqrt(2.0) * 0.5);
    CHECK(detect_counterexample(tree, ly * (1.0 + 1e-12)).size() == 2);
    CHECK(detect_counterexample(tree, ly * (1.0 - 1e-12)).empty());
}

TEST_CASE("hat L_z on hand values") {
    CHECK(hat_lz_sq(0.1, 1.0, 1.0, 0.0) == doctest::Approx(1.1));
    // Second branch wins: 0.9 * 0.5 / (sqrt(1.8) - 1).
    CHECK(hat_lz_sq(0.1, 0.5, 0.0, 1.0) == doctest::Approx(0.45 / (std::sqrt(1.8) - 1.0)));
    CHECK(hat_lz_sq(0.1, 0.0, 2.0, 1.0) == doctest::Approx(4.1));
    CHECK_THROWS_AS(hat_lz_sq(0.0, 1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(hat_lz_sq(0.5, 1.0, 1.0, 0.6), std::domain_error);
}

TEST_CASE("proof weights keep a = 1 - delta") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double delta = 0.05 + 0.9 * u(rng);
        const double jump = u(rng);
        const double l2 = 0.1 + 3.0 * u(rng);
        const double beta = 10.0 * u(rng);
        const auto w = proof_weights(beta, delta, jump, l2);
        CHECK(w.c == doctest::Approx((1.0 - delta) / (2.0 * l2)));
        CHECK(w.d == doctest::Approx(w.c + jump));
        CHECK(w.a == doctest::Approx(1.0 - delta));
        CHECK(w.b == doctest::Approx(std::min(beta - 1.0 / w.c, beta / (1.0 + beta * jump) - 1.0 / w.d)));
    }
}

TEST_CASE("beta threshold on the full-jump example") {
    CHECK(std::abs(beta_threshold_at(0.0, 1.0, 0.1, 1.0) - 2.2 / 0.9) <= 1e-12);
    const ScenarioTree tree(deterministic_grid(4, 2, {1.0}));
    CHECK(std::abs(beta_threshold(tree, 0.0, 1.0, 0.1) - 2.2 / 0.9) <= 1e-12);
}

TEST_CASE("contraction curve") {
    SUBCASE("closed-form minimizer without jumps") {
        const ContractionCurve c(0.0 + 1e-300, 1.0, 0.0);
        CHECK(c.minimizer() == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(c.h(c.minimizer()) == doctest::Approx(2.0 * std::sqrt(2.0)));
    }
    SUBCASE("L_y = 0 puts the minimizer at zero") {
        const ContractionCurve c(0.2, 0.0, 0.5);
        CHECK(c.minimizer() == 0.0);
    }
    SUBCASE("minimizer beats a grid search") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const double delta = 0.05 + 0.5 * u(rng);
            const double jump = u(rng);
            const double ly_cap = std::sqrt((1.0 - delta) / 2.0) / std::max(jump, 1e-9);
            const double ly = std::min(2.0, 0.9 * ly_cap) * (0.05 + 0.95 * u(rng));
            const ContractionCurve c(delta, ly, jump);
            const double star = c.minimizer();
            REQUIRE(c.in_domain(star));
            double best = std::numeric_limits<double>::infinity();
            double arg = 0.0;
            for (int g = 1; g <= 20000; ++g) {
                const double ell = 5.0 * star * g / 10000.0;
                if (!c.in_domain(ell))
                    continue;
                if (c.H(ell) < best) {
                    best = c.H(ell);
                    arg = ell;
                }
            }
            CHECK(c.H(star) <= best * (1.0 + 1e-12));
            CHECK(std::abs(arg - star) <= 1e-3 * star + 5.0 * star / 10000.0);
        }
    }
    SUBCASE("H outside its domain throws") {
        const ContractionCurve c(0.1, 0.5, 1.0);
        CHECK_FALSE(c.in_domain(0.01));
        CHECK(c.in_domain(c.minimizer()));
        CHECK_THROWS(c.H(0.01));
    }
}

TEST_CASE("contraction profile") {
    const ScenarioTree tree(deterministic_grid(3, 2, {0.3, 0.6, 0.0}));
    const double ly = 0.5, lz = 1.0;
    const double eps = check_main_hypothesis(tree, ly);
    const auto prof = contraction_profile(tree, ly, lz, 10.0);
    CHECK(prof.epsilon_star == doctest::Approx(eps));
    CHECK(prof.delta == doctest::Approx(default_delta(eps)));
    CHECK(prof.alpha == prof.delta);
    CHECK(prof.max_a() == doctest::Approx(1.0 - prof.delta));
    CHECK(prof.beta_min == doctest::Approx(beta_threshold(tree, ly, lz, prof.delta)));
    for (double b : prof.b_weights())
        CHECK(b > 0.0);

    CHECK_THROWS_AS(contraction_profile(tree, 3.0, lz, 1.0), ConditionViolated);
    CHECK_THROWS_AS(contraction_profile(tree, ly, lz, 1.0, eps), std::domain_error);
    CHECK_THROWS_AS(beta_threshold(tree, ly, lz, eps + 0.01), std::domain_error);
}
