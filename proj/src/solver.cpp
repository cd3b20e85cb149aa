#include "jumpbsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace jumpbsde {

Generator::Generator(Fn fn, double lipschitz_y, double lipschitz_z, std::string name)
    : fn_(std::move(fn)), ly_(lipschitz_y), lz_(lipschitz_z), name_(std::move(name)) {
    if (!fn_)
        throw std::invalid_argument("generator needs an evaluation function");
    if (!(lipschitz_y >= 0.0) || !(lipschitz_z >= 0.0))
        throw std::invalid_argument("Lipschitz constants must be nonnegative");
}

double BsdeProblem::xi_at(std::size_t leaf_node) const {
    return terminal.at(leaf_node - tree->leaf_range().first);
}

BsdeProblem make_problem(const ScenarioModel& model, double beta,
                         const std::function<double(const History&)>& terminal,
                         Generator generator) {
    if (!(beta >= 0.0))
        throw std::invalid_argument("beta must be nonnegative");
    BsdeProblem problem;
    problem.tree = std::make_shared<const ScenarioTree>(model);
    problem.beta = beta;
    const auto [first, last] = problem.tree->leaf_range();
    problem.terminal.reserve(last - first);
    for (std::size_t n = first; n < last; ++n)
        problem.terminal.push_back(terminal(problem.tree->history(n)));
    problem.generator = std::move(generator);
    return problem;
}

MartingaleRepresentation represent_martingale(const Slot& slot,
                                              std::span<const double> child_values) {
    const std::size_t m = slot.mark_count();
    if (child_values.size() != m + 1)
        throw std::invalid_argument("represent_martingale needs one value per outcome");

    MartingaleRepresentation rep;
    rep.z.assign(m, 0.0);
    for (std::size_t o = 0; o <= m; ++o)
        if (slot.has_child(o))
            rep.conditional_mean += slot.branch_probability(o) * child_values[o];

    if (slot.jump == 0.0)
        return rep;

    if (slot.jump < 1.0) {
        const double base = child_values[m];
        for (std::size_t x = 0; x < m; ++x)
            if (slot.has_child(x))
                rep.z[x] = child_values[x] - base;
    } else {
        double mean = 0.0;
        for (std::size_t x = 0; x < m; ++x)
            if (slot.has_child(x))
                mean += slot.mark_law[x] * child_values[x];
        for (std::size_t x = 0; x < m; ++x)
            if (slot.has_child(x))
                rep.z[x] = child_values[x] - mean;
    }

    const double zh = hat_z(rep.z, slot);
    for (std::size_t o = 0; o <= m; ++o) {
        if (!slot.has_child(o))
            continue;
        const double g = (o < m ? rep.z[o] : 0.0) - zh;
        rep.check = std::max(rep.check, std::abs(child_values[o] - rep.conditional_mean - g));
    }
    return rep;
}

namespace {

void require_discrete(const ScenarioTree& tree) {
    if (!tree.purely_discrete())
        throw std::invalid_argument(
            "solvers need a purely discrete compensator; discretize continuous parts first");
}

std::vector<double> child_values(const ScenarioTree& tree, const Slot& slot,
                                 const AdaptedProcess& values) {
    std::vector<double> out(slot.outcome_count(), 0.0);
    for (std::size_t o = 0; o < out.size(); ++o)
        if (slot.has_child(o))
            out[o] = values[static_cast<std::size_t>(slot.children[o])];
    (void)tree;
    return out;
}

void check_terminal(const ScenarioTree& tree, std::span<const double> terminal) {
    const auto [first, last] = tree.leaf_range();
    if (terminal.size() != last - first)
        throw std::invalid_argument("terminal condition needs one value per leaf");
}

}  // namespace

Solution solve_linear(const ScenarioTree& tree, std::span<const double> terminal,
                      std::span<const double> f_path) {
    require_discrete(tree);
    check_terminal(tree, terminal);
    if (f_path.size() != tree.slot_count())
        throw std::invalid_argument("generator path needs one value per slot");

    const std::size_t n = tree.node_count();
    std::vector<double> integral(n, 0.0);
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        for (int c : s.children)
            if (c >= 0)
                integral[c] = integral[s.parent] + f_path[j] * s.jump;
    }

    AdaptedProcess m(n);
    const auto [first, last] = tree.leaf_range();
    for (std::size_t leaf = first; leaf < last; ++leaf)
        m[leaf] = terminal[leaf - first] + integral[leaf];

    Solution sol;
    sol.z = PredictableField(tree.slot_count(), tree.mark_count());
    for (std::size_t j = tree.slot_count(); j-- > 0;) {
        const Slot& s = tree.slot(j);
        const auto rep = represent_martingale(s, child_values(tree, s, m));
        m[s.parent] = rep.conditional_mean;
        std::copy(rep.z.begin(), rep.z.end(), sol.z.at(j).begin());
    }

    sol.y = AdaptedProcess(n);
    for (std::size_t i = 0; i < n; ++i)
        sol.y[i] = m[i] - integral[i];
    sol.martingale = std::move(m);
    return sol;
}

Solution solve_linear(const BsdeProblem& problem) {
    const ScenarioTree& tree = *problem.tree;
    const std::vector<double> zeros(tree.mark_count(), 0.0);
    std::vector<double> path(tree.slot_count());
    for (std::size_t j = 0; j < path.size(); ++j)
        path[j] = problem.generator(tree, j, 0.0, zeros);
    return solve_linear(tree, problem.terminal, path);
}

std::vector<double> frozen_generator_path(const BsdeProblem& problem, const AdaptedProcess& y,
                                          const PredictableField& z) {
    const ScenarioTree& tree = *problem.tree;
    std::vector<double> path(tree.slot_count());
    for (std::size_t j = 0; j < path.size(); ++j)
        path[j] = problem.generator(tree, j, y[tree.slot(j).parent], z.at(j));
    return path;
}

double implicit_step_solve(double cond_mean, const ScenarioTree& tree, std::size_t slot,
                           std::span<const double> z, const Generator& f, double tol,
                           int max_iter) {
    const double a = tree.slot(slot).jump;
    if (a == 0.0)
        return cond_mean;

    if (a * f.lipschitz_y() >= 1.0) {
        // Probe the one-step map r(y) = cond_mean + a f(y) - y; if it vanishes at
        // several points the step has a continuum of solutions.
        const double probes[] = {0.0, 1.0, -1.0, cond_mean + 1.0};
        bool flat = true;
        for (double y : probes) {
            const double r = cond_mean + a * f(tree, slot, y, z) - y;
            if (std::abs(r) > tol * std::max(1.0, std::abs(y)))
                flat = false;
        }
        const std::string where = " at step " + std::to_string(tree.slot(slot).step) +
                                  " (Delta A * L_y = " + std::to_string(a * f.lipschitz_y()) +
                                  ")";
        if (flat)
            throw Degenerate(slot, "implicit step has a continuum of solutions" + where);
        throw StepSingular(slot, "implicit step is singular" + where);
    }

    double y = cond_mean;
    for (int it = 0; it < max_iter; ++it) {
        const double next = cond_mean + a * f(tree, slot, y, z);
        if (!std::isfinite(next))
            throw NonFinite("implicit step iterate is not finite");
        if (std::abs(next - y) <= tol * std::max(1.0, std::abs(next)))
            return next;
        y = next;
    }
    throw NoConvergence("implicit step did not converge in " + std::to_string(max_iter) +
                        " iterations");
}

Solution backward_oracle(const BsdeProblem& problem, double tol) {
    const ScenarioTree& tree = *problem.tree;
    require_discrete(tree);
    check_terminal(tree, problem.terminal);

    const std::size_t n = tree.node_count();
    Solution sol;
    sol.y = AdaptedProcess(n);
    sol.z = PredictableField(tree.slot_count(), tree.mark_count());
    const auto [first, last] = tree.leaf_range();
    for (std::size_t leaf = first; leaf < last; ++leaf)
        sol.y[leaf] = problem.terminal[leaf - first];

    for (std::size_t j = tree.slot_count(); j-- > 0;) {
        const Slot& s = tree.slot(j);
        const auto rep = represent_martingale(s, child_values(tree, s, sol.y));
        std::copy(rep.z.begin(), rep.z.end(), sol.z.at(j).begin());
        sol.y[s.parent] =
            implicit_step_solve(rep.conditional_mean, tree, j, sol.z.at(j), problem.generator, tol);
    }

    const auto path = frozen_generator_path(problem, sol.y, sol.z);
    sol.martingale = AdaptedProcess(n);
    sol.martingale[0] = sol.y[0];
    std::vector<double> integral(n, 0.0);
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        for (int c : s.children) {
            if (c < 0)
                continue;
            integral[c] = integral[s.parent] + path[j] * s.jump;
            sol.martingale[c] = sol.y[c] + integral[c];
        }
    }
    return sol;
}

double recursion_residual(const BsdeProblem& problem, const Solution& solution) {
    const ScenarioTree& tree = *problem.tree;
    const std::size_t m = tree.mark_count();
    double worst = 0.0;
    const auto [first, last] = tree.leaf_range();
    for (std::size_t leaf = first; leaf < last; ++leaf)
        worst = std::max(worst, std::abs(solution.y[leaf] - problem.terminal[leaf - first]));
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const auto zeta = solution.z.at(j);
        const double yp = solution.y[s.parent];
        const double f = problem.generator(tree, j, yp, zeta);
        const double zh = hat_z(zeta, s);
        for (std::size_t o = 0; o <= m; ++o) {
            if (!s.has_child(o))
                continue;
            const double g = (o < m ? zeta[o] : 0.0) - zh;
            const double jump = solution.y[s.children[o]] - yp;
            worst = std::max(worst, std::abs(jump - (g - f * s.jump)));
        }
    }
    return worst;
}

Solution zero_solution(const ScenarioTree& tree) {
    Solution sol;
    sol.y = AdaptedProcess(tree.node_count());
    sol.z = PredictableField(tree.slot_count(), tree.mark_count());
    sol.martingale = AdaptedProcess(tree.node_count());
    return sol;
}

Solution picard_map(const BsdeProblem& problem, const AdaptedProcess& u,
                    const PredictableField& v) {
    return solve_linear(*problem.tree, problem.terminal, frozen_generator_path(problem, u, v));
}

std::pair<Solution, SolveReport> picard_solve(const BsdeProblem& problem,
                                              const PicardOptions& options) {
    const ScenarioTree& tree = *problem.tree;
    require_discrete(tree);
    const Generator& f = problem.generator;

    SolveReport report;
    report.epsilon_star = check_main_hypothesis(tree, f.lipschitz_y());
    report.flagged = detect_counterexample(tree, f.lipschitz_y());

    // Stopping distance uses the proof's b weights. Below the beta threshold b can
    // drop under L_y^2 / L^2 (even below zero), so that floor is applied.
    std::vector<double> weights(tree.slot_count(), 1.0);
    if (report.epsilon_star > 0.0) {
        report.profile = contraction_profile(tree, f.lipschitz_y(), f.lipschitz_z(),
                                             problem.beta, options.delta);
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const SlotProfile& sp = report.profile->slots[j];
            const double floor = f.lipschitz_y() * f.lipschitz_y() / sp.hat_lz_sq;
            weights[j] = std::max(sp.weights.b, floor);
        }
    } else if (options.enforce_condition) {
        throw ConditionViolated("main hypothesis fails: eps* = " +
                                std::to_string(report.epsilon_star));
    }

    const DoleansPath doleans(tree, problem.beta);
    Solution current = options.initial ? *options.initial : zero_solution(tree);

    for (int n = 1; n <= options.max_iter; ++n) {
        Solution next = picard_map(problem, current.y, current.z);
        const double dist =
            mixed_norm_sq(next.y - current.y, next.z - current.z, doleans, weights);
        double sup = 0.0;
        bool finite = std::isfinite(dist);
        for (double v : next.y.values()) {
            sup = std::max(sup, std::abs(v));
            finite = finite && std::isfinite(v);
        }
        report.iterations = n;
        report.distances.push_back(dist);
        report.max_abs_y.push_back(sup);
        if (n >= 2) {
            const double prev = report.distances[n - 2];
            const double ratio = prev > 0.0 ? dist / prev : 0.0;
            report.ratios.push_back(ratio);
            if (ratio >= 1.0)
                report.diverging = true;
        }
        current = std::move(next);
        if (!finite) {
            if (options.throw_on_failure)
                throw NonFinite("Picard iterate is not finite at iteration " + std::to_string(n));
            break;
        }
        // Large iterates cannot get closer than their own rounding noise. A
        // generator free of (y, zeta) makes the map constant.
        const double scale = std::sqrt(std::abs(mixed_norm_sq(current.y, current.z, doleans, weights)));
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
        if (std::sqrt(dist) <= std::max(options.tol, noise) || f.path_only()) {
            report.converged = true;
            break;
        }
    }

    if (!report.converged && options.throw_on_failure)
        throw NoConvergence("Picard iteration did not converge in " +
                            std::to_string(options.max_iter) + " iterations");

    report.residual = recursion_residual(problem, current);
    return {std::move(current), std::move(report)};
}

}  // namespace jumpbsde
