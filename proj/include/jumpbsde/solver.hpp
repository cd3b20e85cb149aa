#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jumpbsde/conditions.hpp"
#include "jumpbsde/errors.hpp"
#include "jumpbsde/measure.hpp"
#include "jumpbsde/norms.hpp"

namespace jumpbsde {

// The driver f(s, y, zeta) integrated against dA. Evaluation sees the slot (and
// through the tree, its parent history) but never the outcome at t_k.
class Generator {
public:
    using Fn = std::function<double(const ScenarioTree& tree, std::size_t slot, double y,
                                    std::span<const double> zeta)>;

    Generator() = default;
    Generator(Fn fn, double lipschitz_y, double lipschitz_z, std::string name = "custom");

    double operator()(const ScenarioTree& tree, std::size_t slot, double y,
                      std::span<const double> zeta) const {
        return fn_(tree, slot, y, zeta);
    }

    double lipschitz_y() const { return ly_; }
    double lipschitz_z() const { return lz_; }
    const std::string& name() const { return name_; }
    // Declared constants of zero mean f does not depend on (y, zeta).
    bool path_only() const { return ly_ == 0.0 && lz_ == 0.0; }

private:
    Fn fn_;
    double ly_ = 0.0;
    double lz_ = 0.0;
    std::string name_;
};

struct BsdeProblem {
    std::shared_ptr<const ScenarioTree> tree;
    double beta = 0.0;
    std::vector<double> terminal;  // xi, one value per leaf in leaf order
    Generator generator;

    double xi_at(std::size_t leaf_node) const;
};

BsdeProblem make_problem(const ScenarioModel& model, double beta,
                         const std::function<double(const History&)>& terminal,
                         Generator generator);

struct Solution {
    AdaptedProcess y;
    PredictableField z;
    AdaptedProcess martingale;  // Y_t + int_(0,t] f dA; empty when not tracked
};

struct MartingaleRepresentation {
    std::vector<double> z;
    double conditional_mean = 0.0;
    double check = 0.0;  // max reconstruction error over existing children
};

// Integrand Z at one slot whose centered increments reproduce `child_values`
// (indexed by outcome, absent children ignored).
MartingaleRepresentation represent_martingale(const Slot& slot,
                                              std::span<const double> child_values);

// Linear BSDE with a frozen predictable path f_s (one value per slot), built as
// Y_t = E[xi + int f dA | F_t] - int_(0,t] f dA.
Solution solve_linear(const ScenarioTree& tree, std::span<const double> terminal,
                      std::span<const double> f_path);
// Evaluates the generator at (y, zeta) = (0, 0) to get the path.
Solution solve_linear(const BsdeProblem& problem);

// f(s, Y_{s-}, Z_s) frozen on every slot, Y_{s-} read at the parent node.
std::vector<double> frozen_generator_path(const BsdeProblem& problem, const AdaptedProcess& y,
                                          const PredictableField& z);

inline constexpr double kStepTolerance = 1e-13;
inline constexpr int kStepMaxIterations = 200;

// Unique y with y = cond_mean + Delta A * f(slot, y, z), by fixed-point iteration.
double implicit_step_solve(double cond_mean, const ScenarioTree& tree, std::size_t slot,
                           std::span<const double> z, const Generator& f,
                           double tol = kStepTolerance, int max_iter = kStepMaxIterations);

// Exact backward induction. Independent of the Picard route.
Solution backward_oracle(const BsdeProblem& problem, double tol = kStepTolerance);

// Largest |Y_child - Y_parent - (g(o) - f Delta A)| over all slots and children.
double recursion_residual(const BsdeProblem& problem, const Solution& solution);

struct PicardOptions {
    double tol = 1e-12;
    int max_iter = 2000;
    std::optional<double> delta;
    // When false, a violated main hypothesis is recorded and the iteration runs
    // with unit weights b = 1 instead of throwing ConditionViolated.
    bool enforce_condition = true;
    // When false, failure to converge is reported instead of thrown.
    bool throw_on_failure = true;
    std::optional<Solution> initial;
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    bool diverging = false;            // some squared ratio >= 1
    std::vector<double> distances;     // mixed_norm_sq of successive differences
    std::vector<double> ratios;        // distances[n] / distances[n-1], n >= 1
    std::vector<double> max_abs_y;     // sup |Y| of each iterate
    double residual = 0.0;
    double epsilon_star = 0.0;
    std::optional<ContractionProfile> profile;
    std::vector<FlaggedSlot> flagged;
};

// The map (U, V) -> (Y, Z) of the fixed-point argument.
Solution picard_map(const BsdeProblem& problem, const AdaptedProcess& u,
                    const PredictableField& v);

std::pair<Solution, SolveReport> picard_solve(const BsdeProblem& problem,
                                              const PicardOptions& options = {});

Solution zero_solution(const ScenarioTree& tree);

}  // namespace jumpbsde
