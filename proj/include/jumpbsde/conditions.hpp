#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "jumpbsde/measure.hpp"

namespace jumpbsde {

// eps* = 1 - max_slots 2 L_y^2 |Delta A|^2. The main hypothesis holds iff eps* > 0.
double check_main_hypothesis(const ScenarioTree& tree, double lipschitz_y);

// Squared proof constant \hat L_z^2 for one slot. Requires 0 < delta < 1 and
// 2 L_y^2 Delta A^2 < 1 - delta.
double hat_lz_sq(double delta, double lipschitz_y, double lipschitz_z, double jump);

struct ProofWeights {
    double c = 0.0;
    double d = 0.0;
    double a = 0.0;
    double b = 0.0;
};

ProofWeights proof_weights(double beta, double delta, double jump, double hat_lz_sq);

// h(l) = L_y^2 / l + 2l / (1 - delta + 2 l Delta A) and H = h / (1 - Delta A h).
class ContractionCurve {
public:
    ContractionCurve(double delta, double lipschitz_y, double jump);

    double h(double ell) const;
    double H(double ell) const;
    bool in_domain(double ell) const;
    // Closed-form minimizer of H; zero when L_y = 0.
    double minimizer() const { return minimizer_; }

private:
    double delta_;
    double ly_;
    double jump_;
    double minimizer_;
};

ContractionCurve contraction_profile_H(double delta, double lipschitz_y, double jump);

// Lower bound on beta contributed by one slot: H(\hat L_z^2).
double beta_threshold_at(double lipschitz_y, double lipschitz_z, double delta, double jump);

// Maximum of beta_threshold_at over every slot of the tree.
double beta_threshold(const ScenarioTree& tree, double lipschitz_y, double lipschitz_z,
                      double delta);

struct FlaggedSlot {
    std::size_t slot = 0;
    std::size_t step = 0;
    double jump = 0.0;
    double value = 0.0;  // 2 L_y^2 |Delta A|^2
};

// Slots where 2 L_y^2 |Delta A|^2 >= 1, boundary included.
std::vector<FlaggedSlot> detect_counterexample(const ScenarioTree& tree, double lipschitz_y);

struct SlotProfile {
    double jump = 0.0;
    double hat_lz_sq = 0.0;
    ProofWeights weights;
    double beta_bound = 0.0;
};

struct ContractionProfile {
    std::vector<SlotProfile> slots;
    double epsilon_star = 0.0;
    double delta = 0.0;
    double alpha = 0.0;  // the proof's choice alpha = delta
    double beta = 0.0;
    double beta_min = 0.0;

    std::vector<double> b_weights() const;
    double max_a() const;
};

double default_delta(double epsilon_star);

// Throws ConditionViolated when eps* <= 0 and std::domain_error when delta is
// outside (0, eps*). A missing delta selects default_delta(eps*).
ContractionProfile contraction_profile(const ScenarioTree& tree, double lipschitz_y,
                                       double lipschitz_z, double beta,
                                       std::optional<double> delta = std::nullopt);

}  // namespace jumpbsde
