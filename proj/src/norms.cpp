#include "jumpbsde/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jumpbsde {

AdaptedProcess operator-(const AdaptedProcess& a, const AdaptedProcess& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("adapted processes live on different trees");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = a[i] - b[i];
    return AdaptedProcess(std::move(out));
}

PredictableField operator-(const PredictableField& a, const PredictableField& b) {
    if (a.slots_ != b.slots_ || a.marks_ != b.marks_)
        throw std::invalid_argument("predictable fields live on different trees");
    PredictableField out(a.slots_, a.marks_);
    for (std::size_t i = 0; i < out.data_.size(); ++i)
        out.data_[i] = a.data_[i] - b.data_[i];
    return out;
}

double mark_mean(std::span<const double> zeta, const Slot& slot) {
    double mean = 0.0;
    for (std::size_t x = 0; x < slot.mark_count(); ++x)
        mean += zeta[x] * slot.mark_law[x];
    return mean;
}

double hat_z(std::span<const double> zeta, const Slot& slot) {
    if (slot.jump == 0.0)
        return 0.0;
    return slot.jump * mark_mean(zeta, slot);
}

double z_slot_integrand(std::span<const double> zeta, const Slot& slot) {
    const double zh = hat_z(zeta, slot);
    double spread = 0.0;
    for (std::size_t x = 0; x < slot.mark_count(); ++x) {
        const double d = zeta[x] - zh;
        spread += d * d * slot.mark_law[x];
    }
    return slot.jump * spread + zh * zh * (1.0 - slot.jump);
}

double jump_second_moment(std::span<const double> zeta, const Slot& slot) {
    const double zh = hat_z(zeta, slot);
    const std::size_t m = slot.mark_count();
    double moment = 0.0;
    for (std::size_t o = 0; o <= m; ++o) {
        const double q = slot.branch_probability(o);
        if (q <= 0.0)
            continue;
        // mu charges {t} x {x} on Jump(x); nu({t} x dx) integrates zeta to \hat Z.
        const double g = (o < m ? zeta[o] : 0.0) - zh;
        moment += q * g * g;
    }
    return moment;
}

double lipschitz_seminorm(std::span<const double> dzeta, const Slot& slot) {
    const double mean = mark_mean(dzeta, slot);
    const double a = slot.jump;
    double sum = 0.0;
    for (std::size_t x = 0; x < slot.mark_count(); ++x) {
        const double d = dzeta[x] - a * mean;
        sum += d * d * slot.mark_law[x];
    }
    sum += a * (1.0 - a) * mean * mean;
    return std::sqrt(std::max(sum, 0.0));
}

double y_norm_sq(const AdaptedProcess& y, const DoleansPath& weights) {
    const ScenarioTree& tree = weights.tree();
    double total = 0.0;
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const double p = tree.node(s.parent).probability;
        const double left = y[s.parent];
        total += p * left * left *
                 (weights.at_slot(j) * s.jump + weights.continuous_integral(j));
    }
    return total;
}

double z_norm_sq(const PredictableField& z, const DoleansPath& weights) {
    const ScenarioTree& tree = weights.tree();
    double total = 0.0;
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const double p = tree.node(s.parent).probability;
        const auto zeta = z.at(j);
        double contribution = weights.at_slot(j) * z_slot_integrand(zeta, s);
        if (s.continuous > 0.0) {
            double sq = 0.0;
            for (std::size_t x = 0; x < s.mark_count(); ++x)
                sq += zeta[x] * zeta[x] * s.mark_law[x];
            contribution += weights.continuous_integral(j) * sq;
        }
        total += p * contribution;
    }
    return total;
}

double mixed_norm_sq(const AdaptedProcess& y, const PredictableField& z,
                     const DoleansPath& weights, std::span<const double> b) {
    const ScenarioTree& tree = weights.tree();
    if (b.size() != tree.slot_count())
        throw std::invalid_argument("mixed norm needs one weight per slot");
    double total = 0.0;
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        const double p = tree.node(s.parent).probability;
        const double left = y[s.parent];
        total += p * b[j] * left * left *
                 (weights.at_slot(j) * s.jump + weights.continuous_integral(j));
    }
    return total + z_norm_sq(z, weights);
}

void canonicalize(PredictableField& z, const ScenarioTree& tree) {
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        auto zeta = z.at(j);
        if (s.jump == 0.0 && s.continuous == 0.0) {
            for (double& v : zeta)
                v = 0.0;
        } else if (s.jump == 1.0) {
            const double mean = mark_mean(zeta, s);
            for (double& v : zeta)
                v -= mean;
        }
    }
}

}  // namespace jumpbsde
