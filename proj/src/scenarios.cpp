#include "jumpbsde/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "jumpbsde/norms.hpp"

namespace jumpbsde {

std::vector<double> uniform_grid(std::size_t steps, double horizon_time) {
    if (!(horizon_time > 0.0))
        throw std::invalid_argument("horizon time must be positive");
    std::vector<double> grid(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        grid[k] = horizon_time * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(steps, 1));
    return grid;
}

std::vector<double> uniform_law(std::size_t marks) {
    if (marks == 0)
        throw std::invalid_argument("mark space needs at least one mark");
    return std::vector<double>(marks, 1.0 / static_cast<double>(marks));
}

std::size_t jump_count(const History& past) {
    std::size_t n = 0;
    for (const Outcome& o : past)
        n += o.is_jump() ? 1 : 0;
    return n;
}

namespace {

void require_unit_interval(double a, const char* what) {
    if (!std::isfinite(a) || a < 0.0 || a > 1.0)
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

std::vector<double> law_or_uniform(std::vector<double> law, std::size_t marks) {
    if (law.empty())
        return uniform_law(marks);
    if (law.size() != marks)
        throw std::invalid_argument("mark law has wrong dimension");
    return law;
}

ScenarioModel skeleton(std::size_t steps, std::size_t marks, double horizon_time) {
    ScenarioModel model;
    model.grid = uniform_grid(steps, horizon_time);
    model.marks = MarkSpace::indexed(marks);
    return model;
}

}  // namespace

ScenarioModel deterministic_grid(std::size_t steps, std::size_t marks, std::vector<double> jumps,
                                 std::vector<double> mark_law, double horizon_time) {
    if (jumps.size() != 1 && jumps.size() != steps)
        throw std::invalid_argument("deterministic grid needs one jump size or one per step");
    for (double a : jumps)
        require_unit_interval(a, "jump size");
    ScenarioModel model = skeleton(steps, marks, horizon_time);
    model.jump_size = [jumps = std::move(jumps)](std::size_t step, const History&) {
        return jumps.size() == 1 ? jumps.front() : jumps[step - 1];
    };
    model.mark_law = [law = law_or_uniform(std::move(mark_law), marks)](std::size_t,
                                                                        const History&) {
        return law;
    };
    return model;
}

ScenarioModel predictable_random_jumps(std::size_t steps, std::size_t marks, JumpRule rule,
                                       std::vector<double> mark_law, double horizon_time) {
    if (!rule)
        throw std::invalid_argument("jump rule is empty");
    ScenarioModel model = skeleton(steps, marks, horizon_time);
    model.jump_size = [rule = std::move(rule)](std::size_t step, const History& past) {
        const double a = rule(step, past);
        require_unit_interval(a, "jump rule value");
        return a;
    };
    model.mark_law = [law = law_or_uniform(std::move(mark_law), marks)](std::size_t,
                                                                        const History&) {
        return law;
    };
    return model;
}

JumpRule two_state_rule(double initial, double after_jump, double after_no_jump) {
    require_unit_interval(initial, "initial jump size");
    require_unit_interval(after_jump, "jump size after a jump");
    require_unit_interval(after_no_jump, "jump size after no jump");
    return [=](std::size_t, const History& past) {
        if (past.empty())
            return initial;
        return past.back().is_jump() ? after_jump : after_no_jump;
    };
}

JumpRule run_length_rule(double initial, double after_jump, double after_no_jump,
                         double after_two_jumps) {
    require_unit_interval(after_two_jumps, "jump size after two jumps");
    auto base = two_state_rule(initial, after_jump, after_no_jump);
    return [=](std::size_t step, const History& past) {
        const std::size_t n = past.size();
        if (n >= 2 && past[n - 1].is_jump() && past[n - 2].is_jump())
            return after_two_jumps;
        return base(step, past);
    };
}

ScenarioModel pdmp_like(std::size_t steps, std::size_t marks, MarkLawRule law,
                        double horizon_time) {
    ScenarioModel model = skeleton(steps, marks, horizon_time);
    model.jump_size = [](std::size_t, const History&) { return 1.0; };
    if (law) {
        model.mark_law = std::move(law);
    } else {
        model.mark_law = [u = uniform_law(marks)](std::size_t, const History&) { return u; };
    }
    return model;
}

ScenarioModel discretized_intensity(double lambda, std::size_t steps, std::size_t marks,
                                    std::vector<double> mark_law, double horizon_time) {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw std::invalid_argument("intensity must be nonnegative");
    const auto grid = uniform_grid(steps, horizon_time);
    std::vector<double> jumps(steps, 0.0);
    for (std::size_t k = 1; k <= steps; ++k)
        jumps[k - 1] = -std::expm1(-lambda * (grid[k] - grid[k - 1]));
    if (jumps.empty())
        jumps.push_back(0.0);
    return deterministic_grid(steps, marks, std::move(jumps), std::move(mark_law), horizon_time);
}

CounterexampleSetup counterexample_model(double p, std::size_t jump_step, std::size_t steps) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("counter-example jump size p must lie in (0, 1)");
    if (jump_step < 1 || jump_step > steps)
        throw std::invalid_argument("counter-example jump step must lie in [1, K]");
    std::vector<double> jumps(steps, 0.0);
    jumps[jump_step - 1] = p;
    CounterexampleSetup setup{deterministic_grid(steps, 1, std::move(jumps)), Generator{},
                              jump_step};
    setup.generator = Generator(
        [p](const ScenarioTree&, std::size_t, double y, std::span<const double>) { return y / p; },
        1.0 / p, 0.0, "counterexample");
    return setup;
}

ScenarioModel make_model(const ModelSpec& spec) {
    if (spec.marks == 0)
        throw std::invalid_argument("model needs at least one mark");
    if (spec.name == "deterministic_grid")
        return deterministic_grid(spec.steps, spec.marks, spec.jumps, spec.mark_law,
                                  spec.horizon_time);
    if (spec.name == "predictable_random_jumps") {
        JumpRule rule = spec.after_two_jumps >= 0.0
                            ? run_length_rule(spec.initial, spec.after_jump, spec.after_no_jump,
                                              spec.after_two_jumps)
                            : two_state_rule(spec.initial, spec.after_jump, spec.after_no_jump);
        return predictable_random_jumps(spec.steps, spec.marks, std::move(rule), spec.mark_law,
                                        spec.horizon_time);
    }
    if (spec.name == "pdmp_like") {
        MarkLawRule law;
        if (!spec.mark_law.empty())
            law = [l = law_or_uniform(spec.mark_law, spec.marks)](std::size_t, const History&) {
                return l;
            };
        return pdmp_like(spec.steps, spec.marks, std::move(law), spec.horizon_time);
    }
    if (spec.name == "discretized_intensity")
        return discretized_intensity(spec.intensity, spec.steps, spec.marks, spec.mark_law,
                                     spec.horizon_time);
    if (spec.name == "counterexample")
        return counterexample_model(spec.p, spec.jump_step, spec.steps).model;
    throw std::invalid_argument("unknown model preset '" + spec.name + "'");
}

// ---------------------------------------------------------------------------

namespace {

double path_value(const PathCoefficients& path, const ScenarioTree& tree, std::size_t slot) {
    if (path.per_jump == 0.0)
        return path.constant;
    const auto past = tree.history(tree.slot(slot).parent);
    return path.constant + path.per_jump * static_cast<double>(jump_count(past));
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

double centered_projection(std::span<const double> zeta, const Slot& slot) {
    const std::size_t m = slot.mark_count();
    // Direction w(x) = x, centered and normalized in L^2(phi).
    double wbar = 0.0;
    for (std::size_t x = 0; x < m; ++x)
        wbar += static_cast<double>(x) * slot.mark_law[x];
    double norm_sq = 0.0, proj = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
        const double w = static_cast<double>(x) - wbar;
        norm_sq += w * w * slot.mark_law[x];
        proj += w * zeta[x] * slot.mark_law[x];
    }
    if (norm_sq <= 1e-300)
        return 0.0;
    return proj / std::sqrt(norm_sq);
}

double scaled_mean(std::span<const double> zeta, const Slot& slot) {
    return std::sqrt(1.0 - slot.jump) * mark_mean(zeta, slot);
}

Generator zero_generator() {
    return Generator([](const ScenarioTree&, std::size_t, double, std::span<const double>) {
        return 0.0;
    }, 0.0, 0.0, "zero");
}

Generator path_generator(PathCoefficients path) {
    require_finite(path.constant, "path constant");
    require_finite(path.per_jump, "path jump coefficient");
    return Generator(
        [path](const ScenarioTree& tree, std::size_t slot, double, std::span<const double>) {
            return path_value(path, tree, slot);
        },
        0.0, 0.0, "path");
}

Generator affine_generator(PathCoefficients path, double ky, double kc, double km) {
    return Generator(
        [=](const ScenarioTree& tree, std::size_t slot, double y, std::span<const double> zeta) {
            const Slot& s = tree.slot(slot);
            return path_value(path, tree, slot) + ky * y + kc * centered_projection(zeta, s) +
                   km * scaled_mean(zeta, s);
        },
        std::abs(ky), std::hypot(kc, km), "affine");
}

Generator seminorm_generator(PathCoefficients path, double ky, double kz) {
    return Generator(
        [=](const ScenarioTree& tree, std::size_t slot, double y, std::span<const double> zeta) {
            return path_value(path, tree, slot) + ky * y +
                   kz * lipschitz_seminorm(zeta, tree.slot(slot));
        },
        std::abs(ky), std::abs(kz), "seminorm");
}

Generator saturating_generator(PathCoefficients path, double ky, double kz) {
    return Generator(
        [=](const ScenarioTree& tree, std::size_t slot, double y, std::span<const double> zeta) {
            const Slot& s = tree.slot(slot);
            const double u =
                (centered_projection(zeta, s) + scaled_mean(zeta, s)) / std::numbers::sqrt2;
            return path_value(path, tree, slot) + ky * std::sin(y) + kz * std::tanh(u);
        },
        std::abs(ky), std::abs(kz), "saturating");
}

TerminalFn constant_terminal(double value) {
    return [value](const History&) { return value; };
}

TerminalFn jump_count_terminal(double scale, double offset) {
    return [=](const History& h) { return offset + scale * static_cast<double>(jump_count(h)); };
}

TerminalFn last_mark_terminal(std::size_t mark, double scale) {
    return [=](const History& h) {
        for (auto it = h.rbegin(); it != h.rend(); ++it)
            if (it->is_jump())
                return it->mark() == mark ? scale : 0.0;
        return 0.0;
    };
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double history_uniform(std::uint64_t seed, std::size_t step, const History& past,
                       std::uint64_t salt) {
    std::uint64_t h = mix64(seed ^ mix64(salt + 0x51ed270b27a3d5ULL));
    h = mix64(h ^ static_cast<std::uint64_t>(step));
    for (const Outcome& o : past)
        h = mix64(h ^ (o.is_jump() ? o.mark() + 2 : 1));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

double categorical_jump(double u, double v, bool allow_full) {
    if (allow_full && u < 0.15)
        return 1.0;
    if (u < 0.25)
        return 0.0;
    return 0.05 + 0.9 * v;
}

std::vector<double> hashed_law(std::uint64_t seed, std::size_t step, const History& past,
                               std::size_t marks) {
    std::vector<double> law(marks);
    double total = 0.0;
    for (std::size_t x = 0; x < marks; ++x) {
        law[x] = 0.1 + history_uniform(seed, step, past, 100 + x);
        total += law[x];
    }
    for (double& v : law)
        v /= total;
    return law;
}

}  // namespace

RandomInstance random_problem(std::uint64_t seed, const RandomProblemLimits& limits) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> steps_dist(1, limits.max_steps);
    std::uniform_int_distribution<std::size_t> marks_dist(1, limits.max_marks);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t steps = steps_dist(rng);
    const std::size_t marks = marks_dist(rng);
    const int regime = std::uniform_int_distribution<int>(0, 3)(rng);
    const std::uint64_t model_seed = rng();
    const bool full = limits.allow_full_jumps;

    RandomInstance out;
    ScenarioModel model;
    model.grid = uniform_grid(steps);
    model.marks = MarkSpace::indexed(marks);
    model.mark_law = [model_seed, marks](std::size_t step, const History& past) {
        return hashed_law(model_seed, step, past, marks);
    };
    switch (regime) {
    case 0: {
        out.regime = "deterministic";
        std::vector<double> jumps(steps);
        for (double& a : jumps)
            a = categorical_jump(unit(rng), unit(rng), full);
        model.jump_size = [jumps](std::size_t step, const History&) { return jumps[step - 1]; };
        break;
    }
    case 1:
        out.regime = "predictable";
        model.jump_size = [model_seed](std::size_t step, const History& past) {
            return 0.05 + 0.9 * history_uniform(model_seed, step, past, 1);
        };
        break;
    case 2:
        out.regime = full ? "pdmp" : "predictable";
        model.jump_size = [model_seed, full](std::size_t step, const History& past) {
            return full ? 1.0 : 0.05 + 0.9 * history_uniform(model_seed, step, past, 1);
        };
        break;
    default:
        out.regime = "mixed";
        model.jump_size = [model_seed, full](std::size_t step, const History& past) {
            return categorical_jump(history_uniform(model_seed, step, past, 2),
                                    history_uniform(model_seed, step, past, 3), full);
        };
        break;
    }

    const std::uint64_t xi_seed = rng();
    auto terminal = [xi_seed, steps](const History& h) {
        return -2.0 + 4.0 * history_uniform(xi_seed, steps + 1, h, 7);
    };

    PathCoefficients path{-1.0 + 2.0 * unit(rng), unit(rng) < 0.5 ? 0.0 : -0.5 + unit(rng)};
    const double ky = limits.max_lipschitz_y * (2.0 * unit(rng) - 1.0);
    const double kz = limits.max_lipschitz_z * unit(rng);
    Generator gen;
    if (limits.linear_only) {
        gen = path_generator(path);
    } else {
        const int kind = std::uniform_int_distribution<int>(0, 3)(rng);
        switch (kind) {
        case 0:
            gen = path_generator(path);
            break;
        case 1: {
            const double theta = 2.0 * std::numbers::pi * unit(rng);
            gen = affine_generator(path, ky, kz * std::cos(theta), kz * std::sin(theta));
            break;
        }
        case 2:
            gen = seminorm_generator(path, ky, kz);
            break;
        default:
            gen = saturating_generator(path, ky, kz);
            break;
        }
    }
    out.generator = gen.name();
    out.problem = make_problem(model, 0.0, terminal, std::move(gen));
    out.model = std::move(model);
    return out;
}

}  // namespace jumpbsde
