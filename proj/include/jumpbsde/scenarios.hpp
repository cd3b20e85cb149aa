#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jumpbsde/measure.hpp"
#include "jumpbsde/solver.hpp"

namespace jumpbsde {

using JumpRule = std::function<double(std::size_t step, const History& past)>;
using MarkLawRule = std::function<std::vector<double>(std::size_t step, const History& past)>;

std::vector<double> uniform_grid(std::size_t steps, double horizon_time = 1.0);
std::vector<double> uniform_law(std::size_t marks);
std::size_t jump_count(const History& past);

// Deterministic A. `jumps` has one entry (used at every step) or K entries.
ScenarioModel deterministic_grid(std::size_t steps, std::size_t marks, std::vector<double> jumps,
                                 std::vector<double> mark_law = {}, double horizon_time = 1.0);

// Predictable, history-dependent A.
ScenarioModel predictable_random_jumps(std::size_t steps, std::size_t marks, JumpRule rule,
                                       std::vector<double> mark_law = {},
                                       double horizon_time = 1.0);

// Delta A = `initial` at step 1, then `after_jump` or `after_no_jump` depending on
// the previous outcome. When `after_two_jumps` is set, two consecutive jumps
// switch to that value instead.
JumpRule two_state_rule(double initial, double after_jump, double after_no_jump);
JumpRule run_length_rule(double initial, double after_jump, double after_no_jump,
                         double after_two_jumps);

// Jump-measure skeleton of a PDMP: Delta A = 1 at every step.
ScenarioModel pdmp_like(std::size_t steps, std::size_t marks, MarkLawRule law = {},
                        double horizon_time = 1.0);

// Constant intensity lambda discretized as Delta A_k = 1 - exp(-lambda dt_k).
ScenarioModel discretized_intensity(double lambda, std::size_t steps, std::size_t marks,
                                    std::vector<double> mark_law = {},
                                    double horizon_time = 1.0);

struct CounterexampleSetup {
    ScenarioModel model;
    Generator generator;
    std::size_t jump_step = 0;
};

// Single jump of size p at `jump_step`, generator f(y) = y / p (so L_y = 1 / p).
CounterexampleSetup counterexample_model(double p, std::size_t jump_step, std::size_t steps);

// Named preset description, filled from configuration.
struct ModelSpec {
    std::string name = "deterministic_grid";
    std::size_t steps = 1;
    std::size_t marks = 1;
    double horizon_time = 1.0;
    std::vector<double> jumps{0.5};
    std::vector<double> mark_law;
    double initial = 0.5;
    double after_jump = 0.3;
    double after_no_jump = 0.6;
    double after_two_jumps = -1.0;  // negative: unused
    double intensity = 1.0;
    double p = 0.5;
    std::size_t jump_step = 1;
};

ScenarioModel make_model(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Generator presets. Every preset's declared (L_y, L_z) witnesses the
// Lipschitz condition on every slot.

// a(s) = constant + per_jump * (number of jumps strictly before t_k).
struct PathCoefficients {
    double constant = 0.0;
    double per_jump = 0.0;
};

// Functionals of zeta that are 1-Lipschitz in the slot seminorm:
// projection onto a phi-centered unit direction, and sqrt(1 - Delta A) * mean.
double centered_projection(std::span<const double> zeta, const Slot& slot);
double scaled_mean(std::span<const double> zeta, const Slot& slot);

Generator zero_generator();
Generator path_generator(PathCoefficients path);
// a(s) + ky y + kc centered_projection + km scaled_mean; L_z = sqrt(kc^2 + km^2).
Generator affine_generator(PathCoefficients path, double ky, double kc, double km);
// a(s) + ky y + kz seminorm(zeta).
Generator seminorm_generator(PathCoefficients path, double ky, double kz);
// a(s) + ky sin(y) + kz tanh((centered_projection + scaled_mean) / sqrt 2).
Generator saturating_generator(PathCoefficients path, double ky, double kz);

// ---------------------------------------------------------------------------
// Terminal presets.

using TerminalFn = std::function<double(const History&)>;

TerminalFn constant_terminal(double value);
TerminalFn jump_count_terminal(double scale, double offset = 0.0);
// scale * 1{the most recent jump carries `mark`}.
TerminalFn last_mark_terminal(std::size_t mark, double scale = 1.0);

// ---------------------------------------------------------------------------
// Seeded random instances for randomized checks. Model rules are hashes of
// (seed, step, history), so every instance is a genuine predictable model.

std::uint64_t mix64(std::uint64_t x);
double history_uniform(std::uint64_t seed, std::size_t step, const History& past,
                       std::uint64_t salt = 0);

struct RandomProblemLimits {
    std::size_t max_steps = 6;
    std::size_t max_marks = 3;
    double max_lipschitz_y = 0.6;
    double max_lipschitz_z = 2.0;
    bool linear_only = false;
    bool allow_full_jumps = true;
};

struct RandomInstance {
    ScenarioModel model;
    BsdeProblem problem;
    std::string regime;
    std::string generator;
};

// beta is left at zero; callers set it (typically to the threshold).
RandomInstance random_problem(std::uint64_t seed, const RandomProblemLimits& limits = {});

}  // namespace jumpbsde
