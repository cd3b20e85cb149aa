#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jumpbsde/measure.hpp"

namespace jumpbsde {

// One real per tree node: the value at t_k given the history through t_k.
// The left limit Y_{t_k-} is the value at the parent node.
class AdaptedProcess {
public:
    AdaptedProcess() = default;
    explicit AdaptedProcess(std::size_t nodes, double value = 0.0) : values_(nodes, value) {}
    explicit AdaptedProcess(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t node) const { return values_[node]; }
    double& operator[](std::size_t node) { return values_[node]; }
    std::span<const double> values() const { return values_; }

    friend AdaptedProcess operator-(const AdaptedProcess& a, const AdaptedProcess& b);

private:
    std::vector<double> values_;
};

// One mark-vector per predictable slot.
class PredictableField {
public:
    PredictableField() = default;
    PredictableField(std::size_t slots, std::size_t marks)
        : slots_(slots), marks_(marks), data_(slots * marks, 0.0) {}

    std::size_t slot_count() const { return slots_; }
    std::size_t mark_count() const { return marks_; }
    std::span<const double> at(std::size_t slot) const {
        return {data_.data() + slot * marks_, marks_};
    }
    std::span<double> at(std::size_t slot) { return {data_.data() + slot * marks_, marks_}; }

    friend PredictableField operator-(const PredictableField& a, const PredictableField& b);

private:
    std::size_t slots_ = 0;
    std::size_t marks_ = 0;
    std::vector<double> data_;
};

double mark_mean(std::span<const double> zeta, const Slot& slot);

// \hat Z = Delta A * sum_x zeta(x) phi(x); zero on slots without an atom.
double hat_z(std::span<const double> zeta, const Slot& slot);

// Delta A * sum |zeta - \hat Z|^2 phi + (1 - Delta A) |\hat Z|^2, the integrand of
// the Z-norm on one slot with unit weight.
double z_slot_integrand(std::span<const double> zeta, const Slot& slot);

// Conditional second moment of the jump of int zeta d(mu - nu) at the slot,
// computed by enumerating outcomes.
double jump_second_moment(std::span<const double> zeta, const Slot& slot);

// The seminorm on the Z-argument in the generator's Lipschitz condition.
double lipschitz_seminorm(std::span<const double> dzeta, const Slot& slot);

double y_norm_sq(const AdaptedProcess& y, const DoleansPath& weights);
double z_norm_sq(const PredictableField& z, const DoleansPath& weights);

// sum_slots P * b * E^beta |Y_{t-}|^2 dA + z_norm_sq(Z). `b` holds one weight per slot.
double mixed_norm_sq(const AdaptedProcess& y, const PredictableField& z,
                     const DoleansPath& weights, std::span<const double> b);

// Canonical representative: zero on slots with Delta A = 0, phi-centered on
// slots with Delta A = 1. Both changes leave every norm unchanged.
void canonicalize(PredictableField& z, const ScenarioTree& tree);

}  // namespace jumpbsde
