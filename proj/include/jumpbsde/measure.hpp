#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace jumpbsde {

// Finite mark space E. Marks are addressed by index; labels are for reports.
class MarkSpace {
public:
    explicit MarkSpace(std::vector<std::string> labels);
    static MarkSpace indexed(std::size_t count);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

private:
    std::vector<std::string> labels_;
};

// What the random measure does at one grid time: a point with a mark, or nothing.
class Outcome {
public:
    static Outcome jump(std::size_t mark) { return Outcome(mark); }
    static Outcome no_jump() { return Outcome(std::nullopt); }

    bool is_jump() const { return mark_.has_value(); }
    std::size_t mark() const;
    // Position in a slot's outcome list: marks first, NoJump last (== mark_count).
    std::size_t index(std::size_t mark_count) const { return mark_ ? *mark_ : mark_count; }

    bool operator==(const Outcome&) const = default;

private:
    explicit Outcome(std::optional<std::size_t> mark) : mark_(mark) {}
    std::optional<std::size_t> mark_;
};

using History = std::vector<Outcome>;

// Predictable specification of the compensator dA_t phi_t(dx) on a finite grid.
//
// Steps are numbered 1..K; step k is the slot (t_{k-1}, t_k]. Both jump_size and
// mark_law receive the outcomes at t_1..t_{k-1} only, which is what makes A and
// phi predictable. continuous_increments may be empty (all zero).
struct ScenarioModel {
    std::vector<double> grid{0.0};
    MarkSpace marks = MarkSpace::indexed(1);
    std::function<double(std::size_t step, const History& past)> jump_size;
    std::function<std::vector<double>(std::size_t step, const History& past)> mark_law;
    std::vector<double> continuous_increments;

    std::size_t horizon() const { return grid.empty() ? 0 : grid.size() - 1; }
    double continuous_increment(std::size_t step) const;
};

struct Node {
    int parent = -1;
    std::size_t depth = 0;
    Outcome incoming = Outcome::no_jump();
    double probability = 1.0;
    double compensator = 0.0;  // A_{t_k}, continuous part included
    int slot = -1;             // outgoing slot, -1 on leaves
};

// One predictable slot: the transition out of `parent` over step `step`.
struct Slot {
    std::size_t parent = 0;
    std::size_t step = 0;
    double jump = 0.0;        // Delta A_k
    double continuous = 0.0;  // Delta A^c_k
    std::vector<double> mark_law;
    std::vector<int> children;  // size m + 1, indexed by Outcome::index; -1 if absent

    std::size_t mark_count() const { return mark_law.size(); }
    std::size_t outcome_count() const { return children.size(); }
    bool has_child(std::size_t outcome) const { return children[outcome] >= 0; }
    double branch_probability(std::size_t outcome) const;
};

// Exhaustive enumeration of every reachable history of a ScenarioModel.
//
// Nodes are stored depth by depth; inside a depth they follow parent order and
// then outcome order. All reductions in the library walk this order, so sums are
// reproducible bit for bit.
class ScenarioTree {
public:
    explicit ScenarioTree(const ScenarioModel& model);

    std::size_t horizon() const { return grid_.size() - 1; }
    std::size_t mark_count() const { return mark_count_; }
    const std::vector<double>& grid() const { return grid_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t slot_count() const { return slots_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    const Slot& slot(std::size_t j) const { return slots_[j]; }
    std::span<const Node> nodes() const { return nodes_; }
    std::span<const Slot> slots() const { return slots_; }

    // Half-open node index range [first, second) of depth k.
    std::pair<std::size_t, std::size_t> depth_range(std::size_t depth) const;
    std::pair<std::size_t, std::size_t> leaf_range() const { return depth_range(horizon()); }

    History history(std::size_t node) const;
    // Slots crossed on the way from the root to `node`, root first.
    std::vector<std::size_t> path_slots(std::size_t node) const;

    bool purely_discrete() const;

private:
    std::vector<double> grid_;
    std::size_t mark_count_ = 0;
    std::vector<Node> nodes_;
    std::vector<Slot> slots_;
    std::vector<std::size_t> depth_offsets_;
};

ScenarioTree build_tree(const ScenarioModel& model);

// Increment of a finite-variation path over one grid step: continuous part
// accrued on (t_{k-1}, t_k), then the jump at t_k.
struct Increment {
    double continuous = 0.0;
    double jump = 0.0;
};

// Doleans-Dade exponential of a generic finite-variation path X with X_0 = 0:
// exp(X^c_t) * prod (1 + Delta X_s). Entry 0 is the value at t_0.
std::vector<double> stochastic_exponential(std::span<const Increment> path);

// E^beta of beta*A along a deterministic path of A-increments.
std::vector<double> doleans_exponential(std::span<const Increment> path, double beta);

struct DoleansFactors {
    std::vector<double> upper;  // Doleans exponential of Abar
    std::vector<double> lower;  // Doleans exponential of Aunderbar
};

// Square-root factorization: upper^2 == E^beta and upper * lower == 1.
DoleansFactors doleans_sqrt_factorization(std::span<const Increment> path, double beta);

// E^beta laid out on a tree. E^beta at t_k only depends on the parent history,
// so all children of a slot share one value.
class DoleansPath {
public:
    DoleansPath(const ScenarioTree& tree, double beta);

    double beta() const { return beta_; }
    const ScenarioTree& tree() const { return *tree_; }
    double at_node(std::size_t node) const { return node_values_[node]; }
    // Value at the end of the slot's step, i.e. at t_k including the jump.
    double at_slot(std::size_t slot) const { return slot_values_[slot]; }
    // Integral of E^beta_s dA^c_s over (t_{k-1}, t_k).
    double continuous_integral(std::size_t slot) const { return continuous_integrals_[slot]; }

private:
    const ScenarioTree* tree_;
    double beta_;
    std::vector<double> node_values_;
    std::vector<double> slot_values_;
    std::vector<double> continuous_integrals_;
};

}  // namespace jumpbsde
