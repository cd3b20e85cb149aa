#include "jumpbsde/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jumpbsde/errors.hpp"

namespace jumpbsde {

namespace {

double hypothesis_value(double ly, double jump) {
    const double s = ly * jump;
    return 2.0 * s * s;
}

void require_admissible(double delta, double ly, double jump) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("delta must lie in (0, 1)");
    if (ly < 0.0)
        throw std::domain_error("L_y must be nonnegative");
    if (!(hypothesis_value(ly, jump) < 1.0 - delta))
        throw std::domain_error("2 L_y^2 Delta A^2 must stay below 1 - delta");
}

}  // namespace

double check_main_hypothesis(const ScenarioTree& tree, double lipschitz_y) {
    double worst = 0.0;
    for (const Slot& s : tree.slots())
        worst = std::max(worst, hypothesis_value(lipschitz_y, s.jump));
    return 1.0 - worst;
}

double hat_lz_sq(double delta, double lipschitz_y, double lipschitz_z, double jump) {
    require_admissible(delta, lipschitz_y, jump);
    const double second = (1.0 - delta) * lipschitz_y /
                          (std::sqrt(2.0 * (1.0 - delta)) - 2.0 * lipschitz_y * jump);
    return std::max(lipschitz_z * lipschitz_z + delta, second);
}

ProofWeights proof_weights(double beta, double delta, double jump, double hat_lz_sq) {
    if (!(hat_lz_sq > 0.0))
        throw std::domain_error("hat L_z^2 must be positive");
    ProofWeights w;
    w.c = (1.0 - delta) / (2.0 * hat_lz_sq);
    w.d = w.c + jump;
    w.a = 2.0 * hat_lz_sq * std::max(w.c, w.d - jump);
    w.b = std::min(beta - 1.0 / w.c, beta / (1.0 + beta * jump) - 1.0 / w.d);
    return w;
}

ContractionCurve::ContractionCurve(double delta, double lipschitz_y, double jump)
    : delta_(delta), ly_(lipschitz_y), jump_(jump) {
    require_admissible(delta, lipschitz_y, jump);
    minimizer_ = (1.0 - delta) * lipschitz_y /
                 (std::sqrt(2.0 * (1.0 - delta)) - 2.0 * lipschitz_y * jump);
}

double ContractionCurve::h(double ell) const {
    return ly_ * ly_ / ell + 2.0 * ell / (1.0 - delta_ + 2.0 * ell * jump_);
}

bool ContractionCurve::in_domain(double ell) const {
    return ell > 0.0 && 1.0 - jump_ * h(ell) > 0.0;
}

double ContractionCurve::H(double ell) const {
    if (!in_domain(ell))
        throw std::domain_error("H evaluated outside its domain");
    const double hv = h(ell);
    return hv / (1.0 - jump_ * hv);
}

ContractionCurve contraction_profile_H(double delta, double lipschitz_y, double jump) {
    return ContractionCurve(delta, lipschitz_y, jump);
}

double beta_threshold_at(double lipschitz_y, double lipschitz_z, double delta, double jump) {
    const double l2 = hat_lz_sq(delta, lipschitz_y, lipschitz_z, jump);
    const double ratio = lipschitz_y * lipschitz_y / l2;
    const double inv_d = 2.0 * l2 / (1.0 - delta + 2.0 * l2 * jump);
    const double h = ratio + inv_d;
    const double denominator = 1.0 - jump * h;
    if (!(denominator > 0.0))
        throw DenominatorNonpositive("beta threshold denominator is not positive");
    const double bound = h / denominator;

    // The first-branch bound L_y^2 / L^2 + 1/c never exceeds the second one.
    const double first = ratio + 2.0 * l2 / (1.0 - delta);
    if (first > bound * (1.0 + 1e-12) + 1e-300)
        throw DenominatorNonpositive("first-branch beta bound exceeds the second branch");
    return bound;
}

double beta_threshold(const ScenarioTree& tree, double lipschitz_y, double lipschitz_z,
                      double delta) {
    const double eps = check_main_hypothesis(tree, lipschitz_y);
    if (!(eps > delta))
        throw std::domain_error("beta threshold needs delta < eps* (eps* = " +
                                std::to_string(eps) + ")");
    double worst = 0.0;
    for (const Slot& s : tree.slots())
        worst = std::max(worst, beta_threshold_at(lipschitz_y, lipschitz_z, delta, s.jump));
    return worst;
}

std::vector<FlaggedSlot> detect_counterexample(const ScenarioTree& tree, double lipschitz_y) {
    std::vector<FlaggedSlot> out;
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const double value = hypothesis_value(lipschitz_y, s.jump);
        if (value >= 1.0)
            out.push_back({j, s.step, s.jump, value});
    }
    return out;
}

std::vector<double> ContractionProfile::b_weights() const {
    std::vector<double> out;
    out.reserve(slots.size());
    for (const SlotProfile& s : slots)
        out.push_back(s.weights.b);
    return out;
}

double ContractionProfile::max_a() const {
    double worst = 0.0;
    for (const SlotProfile& s : slots)
        worst = std::max(worst, s.weights.a);
    return worst;
}

double default_delta(double epsilon_star) { return 0.5 * epsilon_star; }

ContractionProfile contraction_profile(const ScenarioTree& tree, double lipschitz_y,
                                       double lipschitz_z, double beta,
                                       std::optional<double> delta) {
    ContractionProfile profile;
    profile.epsilon_star = check_main_hypothesis(tree, lipschitz_y);
    if (!(profile.epsilon_star > 0.0))
        throw ConditionViolated("main hypothesis fails: eps* = " +
                                std::to_string(profile.epsilon_star));
    profile.delta = delta.value_or(default_delta(profile.epsilon_star));
    if (!(profile.delta > 0.0 && profile.delta < profile.epsilon_star))
        throw std::domain_error("delta must lie in (0, eps*)");
    profile.alpha = profile.delta;
    profile.beta = beta;

    profile.slots.reserve(tree.slot_count());
    for (const Slot& s : tree.slots()) {
        SlotProfile sp;
        sp.jump = s.jump;
        sp.hat_lz_sq = hat_lz_sq(profile.delta, lipschitz_y, lipschitz_z, s.jump);
        sp.weights = proof_weights(beta, profile.delta, s.jump, sp.hat_lz_sq);
        sp.beta_bound = beta_threshold_at(lipschitz_y, lipschitz_z, profile.delta, s.jump);
        profile.beta_min = std::max(profile.beta_min, sp.beta_bound);
        profile.slots.push_back(sp);
    }
    return profile;
}

}  // namespace jumpbsde
