#include <doctest.h>

#include <cmath>
#include <random>

#include "jumpbsde/norms.hpp"
#include "jumpbsde/scenarios.hpp"
#include "jumpbsde/solver.hpp"
#include "oracle.hpp"

using namespace jumpbsde;

namespace {

Slot make_slot(double jump, std::vector<double> law) {
    Slot s;
    s.jump = jump;
    s.mark_law = std::move(law);
    s.children.assign(s.mark_law.size() + 1, 0);
    return s;
}

}  // namespace

TEST_CASE("slot quantities on a hand example") {
    const Slot s = make_slot(0.5, {0.25, 0.75});
    const std::vector<double> zeta{2.0, -1.0};
    CHECK(mark_mean(zeta, s) == doctest::Approx(-0.25));
    CHECK(hat_z(zeta, s) == doctest::Approx(-0.125));
    // 0.5 * (sum zeta^2 phi - 0.5 * mean^2) = 0.5 * (1.75 - 0.03125)
    CHECK(z_slot_integrand(zeta, s) == doctest::Approx(0.859375));
    // E[(g(o))^2] over o = marks and NoJump equals the slot integrand.
    CHECK(jump_second_moment(zeta, s) == doctest::Approx(0.859375));
    CHECK(lipschitz_seminorm(zeta, s) == doctest::Approx(std::sqrt(0.859375 / 0.5)));

    const Slot none = make_slot(0.0, {1.0});
    const std::vector<double> one{3.0};
    CHECK(hat_z(one, none) == 0.0);
    CHECK(z_slot_integrand(one, none) == 0.0);
}

TEST_CASE("slot integrand equals the centered second moment") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + trial % 4;
        std::vector<double> law(m);
        double total = 0.0;
        for (double& p : law)
            total += (p = 0.05 + u(rng));
        for (double& p : law)
            p /= total;
        const double jump = trial % 5 == 0 ? 1.0 : u(rng);
        const Slot s = make_slot(jump, law);
        std::vector<double> zeta(m);
        for (double& z : zeta)
            z = 4.0 * u(rng) - 2.0;
        const double zh = jump * mark_mean(zeta, s);
        double expected = (1.0 - jump) * zh * zh;
        for (std::size_t x = 0; x < m; ++x)
            expected += jump * law[x] * (zeta[x] - zh) * (zeta[x] - zh);
        CHECK(std::abs(z_slot_integrand(zeta, s) - expected) <= 1e-13 * (1.0 + expected));
        CHECK(std::abs(jump_second_moment(zeta, s) - expected) <= 1e-13 * (1.0 + expected));
    }
}

TEST_CASE("full jump: constant shifts of zeta carry no norm") {
    const Slot s = make_slot(1.0, {0.3, 0.7});
    const std::vector<double> flat{5.0, 5.0};
    CHECK(z_slot_integrand(flat, s) == doctest::Approx(0.0).epsilon(1e-15));

    const ScenarioTree tree(deterministic_grid(2, 2, {1.0}, {0.3, 0.7}));
    PredictableField z(tree.slot_count(), 2);
    PredictableField shifted(tree.slot_count(), 2);
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        z.at(j)[0] = 1.0 + j;
        z.at(j)[1] = -2.0;
        shifted.at(j)[0] = z.at(j)[0] + 7.0;
        shifted.at(j)[1] = z.at(j)[1] + 7.0;
    }
    const DoleansPath e(tree, 1.0);
    CHECK(z_norm_sq(z, e) == doctest::Approx(z_norm_sq(shifted, e)));
    canonicalize(shifted, tree);
    for (std::size_t j = 0; j < tree.slot_count(); ++j)
        CHECK(mark_mean(shifted.at(j), tree.slot(j)) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(z_norm_sq(z, e) == doctest::Approx(z_norm_sq(shifted, e)));
}

TEST_CASE("weighted norms agree with the path-wise oracle") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto inst = random_problem(seed);
        const Solution sol = backward_oracle(inst.problem);
        oracle::Brute brute(inst.model, inst.problem);
        const auto ref = brute.solve();
        for (double beta : {0.0, 0.7, 4.0}) {
            const DoleansPath e(*inst.problem.tree, beta);
            const auto [ny, nz] = brute.norms(ref, beta);
            CHECK(y_norm_sq(sol.y, e) == doctest::Approx(ny).epsilon(1e-10));
            CHECK(z_norm_sq(sol.z, e) == doctest::Approx(nz).epsilon(1e-10));
            const std::vector<double> b(inst.problem.tree->slot_count(), 2.5);
            CHECK(mixed_norm_sq(sol.y, sol.z, e, b) == doctest::Approx(2.5 * ny + nz).epsilon(1e-10));
        }
    }
}

TEST_CASE("mixed norm checks its weight vector") {
    const ScenarioTree tree(deterministic_grid(2, 1, {0.5}));
    const DoleansPath e(tree, 1.0);
    const AdaptedProcess y(tree.node_count());
    const PredictableField z(tree.slot_count(), 1);
    const std::vector<double> short_b(1, 1.0);
    CHECK_THROWS_AS(mixed_norm_sq(y, z, e, short_b), std::invalid_argument);
}
