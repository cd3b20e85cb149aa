#include "jumpbsde/measure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jumpbsde {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty())
        throw std::invalid_argument("time grid must contain t_0");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k]))
            throw std::invalid_argument("time grid contains a non-finite value");
        if (k > 0 && !(grid[k] > grid[k - 1]))
            throw std::invalid_argument("time grid must be strictly increasing");
    }
}

void validate_jump(double jump, std::size_t step) {
    if (!std::isfinite(jump) || jump < 0.0 || jump > 1.0)
        throw std::invalid_argument("jump size Delta A at step " + std::to_string(step) +
                                    " must lie in [0, 1]");
}

void validate_law(const std::vector<double>& law, std::size_t marks, std::size_t step) {
    if (law.size() != marks)
        throw std::invalid_argument("mark law at step " + std::to_string(step) +
                                    " has wrong dimension");
    double total = 0.0;
    for (double p : law) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("mark law at step " + std::to_string(step) +
                                        " has a negative or non-finite entry");
        total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
        throw std::invalid_argument("mark law at step " + std::to_string(step) +
                                    " does not sum to 1");
}

}  // namespace

MarkSpace::MarkSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
        throw std::invalid_argument("mark space needs at least one mark");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        for (std::size_t j = i + 1; j < labels_.size(); ++j)
            if (labels_[i] == labels_[j])
                throw std::invalid_argument("duplicate mark identifier '" + labels_[i] + "'");
}

MarkSpace MarkSpace::indexed(std::size_t count) {
    std::vector<std::string> labels;
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        labels.push_back("x" + std::to_string(i));
    return MarkSpace(std::move(labels));
}

std::size_t Outcome::mark() const {
    if (!mark_)
        throw std::logic_error("NoJump outcome carries no mark");
    return *mark_;
}

double ScenarioModel::continuous_increment(std::size_t step) const {
    if (continuous_increments.empty())
        return 0.0;
    return continuous_increments.at(step - 1);
}

double Slot::branch_probability(std::size_t outcome) const {
    if (outcome == mark_law.size())
        return 1.0 - jump;
    return jump * mark_law[outcome];
}

ScenarioTree::ScenarioTree(const ScenarioModel& model)
    : grid_(model.grid), mark_count_(model.marks.size()) {
    validate_grid(grid_);
    const std::size_t K = horizon();
    if (!model.continuous_increments.empty() && model.continuous_increments.size() != K)
        throw std::invalid_argument("continuous increments must have one entry per step");
    for (double c : model.continuous_increments)
        if (!std::isfinite(c) || c < 0.0)
            throw std::invalid_argument("continuous increments must be nonnegative");
    if (K > 0 && (!model.jump_size || !model.mark_law))
        throw std::invalid_argument("scenario model is missing its jump size or mark law rule");

    const std::size_t m = mark_count_;
    nodes_.push_back(Node{});
    depth_offsets_ = {0, 1};

    for (std::size_t step = 1; step <= K; ++step) {
        const std::size_t begin = depth_offsets_[step - 1];
        const std::size_t end = depth_offsets_[step];
        const double dac = model.continuous_increment(step);
        for (std::size_t p = begin; p < end; ++p) {
            const History past = history(p);
            Slot s;
            s.parent = p;
            s.step = step;
            s.jump = model.jump_size(step, past);
            validate_jump(s.jump, step);
            s.continuous = dac;
            s.mark_law = model.mark_law(step, past);
            validate_law(s.mark_law, m, step);
            s.children.assign(m + 1, -1);

            const std::size_t slot_index = slots_.size();
            nodes_[p].slot = static_cast<int>(slot_index);
            const double parent_prob = nodes_[p].probability;
            const double parent_a = nodes_[p].compensator;
            for (std::size_t o = 0; o <= m; ++o) {
                const double q = s.branch_probability(o);
                if (q <= 0.0)
                    continue;
                Node child;
                child.parent = static_cast<int>(p);
                child.depth = step;
                child.incoming = o < m ? Outcome::jump(o) : Outcome::no_jump();
                child.probability = parent_prob * q;
                child.compensator = parent_a + dac + s.jump;
                s.children[o] = static_cast<int>(nodes_.size());
                nodes_.push_back(child);
            }
            slots_.push_back(std::move(s));
        }
        depth_offsets_.push_back(nodes_.size());
    }
}

std::pair<std::size_t, std::size_t> ScenarioTree::depth_range(std::size_t depth) const {
    if (depth > horizon())
        throw std::out_of_range("depth beyond horizon");
    return {depth_offsets_[depth], depth_offsets_[depth + 1]};
}

History ScenarioTree::history(std::size_t node) const {
    History h(nodes_[node].depth, Outcome::no_jump());
    for (int n = static_cast<int>(node); nodes_[n].parent >= 0; n = nodes_[n].parent)
        h[nodes_[n].depth - 1] = nodes_[n].incoming;
    return h;
}

std::vector<std::size_t> ScenarioTree::path_slots(std::size_t node) const {
    std::vector<std::size_t> out(nodes_[node].depth);
    for (int n = static_cast<int>(node); nodes_[n].parent >= 0; n = nodes_[n].parent)
        out[nodes_[n].depth - 1] = static_cast<std::size_t>(nodes_[nodes_[n].parent].slot);
    return out;
}

bool ScenarioTree::purely_discrete() const {
    for (const Slot& s : slots_)
        if (s.continuous != 0.0)
            return false;
    return true;
}

ScenarioTree build_tree(const ScenarioModel& model) { return ScenarioTree(model); }

std::vector<double> stochastic_exponential(std::span<const Increment> path) {
    std::vector<double> out;
    out.reserve(path.size() + 1);
    out.push_back(1.0);
    for (const Increment& inc : path)
        out.push_back(out.back() * std::exp(inc.continuous) * (1.0 + inc.jump));
    return out;
}

namespace {

void validate_path(std::span<const Increment> path) {
    for (const Increment& inc : path) {
        if (!std::isfinite(inc.continuous) || inc.continuous < 0.0)
            throw std::invalid_argument("continuous increments of A must be nonnegative");
        if (!std::isfinite(inc.jump) || inc.jump < 0.0 || inc.jump > 1.0)
            throw std::invalid_argument("jumps of A must lie in [0, 1]");
    }
}

}  // namespace

std::vector<double> doleans_exponential(std::span<const Increment> path, double beta) {
    if (!(beta >= 0.0))
        throw std::invalid_argument("beta must be nonnegative");
    validate_path(path);
    std::vector<Increment> scaled(path.begin(), path.end());
    for (Increment& inc : scaled) {
        inc.continuous *= beta;
        inc.jump *= beta;
    }
    return stochastic_exponential(scaled);
}

DoleansFactors doleans_sqrt_factorization(std::span<const Increment> path, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("square-root factorization requires beta > 0");
    validate_path(path);
    std::vector<Increment> upper, lower;
    upper.reserve(path.size());
    lower.reserve(path.size());
    for (const Increment& inc : path) {
        const double root = std::sqrt(1.0 + beta * inc.jump);
        upper.push_back({0.5 * beta * inc.continuous, root - 1.0});
        lower.push_back({-0.5 * beta * inc.continuous, -(root - 1.0) / root});
    }
    return {stochastic_exponential(upper), stochastic_exponential(lower)};
}

DoleansPath::DoleansPath(const ScenarioTree& tree, double beta)
    : tree_(&tree), beta_(beta), node_values_(tree.node_count(), 1.0),
      slot_values_(tree.slot_count(), 1.0), continuous_integrals_(tree.slot_count(), 0.0) {
    if (!(beta >= 0.0))
        throw std::invalid_argument("beta must be nonnegative");
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const double before = node_values_[s.parent];
        const double growth = std::exp(beta * s.continuous);
        slot_values_[j] = before * growth * (1.0 + beta * s.jump);
        continuous_integrals_[j] =
            beta > 0.0 ? before * std::expm1(beta * s.continuous) / beta : before * s.continuous;
        for (int child : s.children)
            if (child >= 0)
                node_values_[child] = slot_values_[j];
    }
}

}  // namespace jumpbsde
