#include "jumpbsde/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace jumpbsde {

CheckResult identity_result(std::string name, double lhs, double rhs, double rel_tol) {
    CheckResult r;
    r.name = std::move(name);
    r.kind = CheckKind::Identity;
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_gap = std::abs(lhs - rhs);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    r.rel_gap = scale > 0.0 ? r.abs_gap / scale : 0.0;
    r.tolerance = rel_tol;
    r.pass = std::isfinite(r.rel_gap) && r.rel_gap <= rel_tol;
    return r;
}

CheckResult inequality_result(std::string name, double lhs, double rhs, double slack) {
    CheckResult r;
    r.name = std::move(name);
    r.kind = CheckKind::Inequality;
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_gap = lhs - rhs;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    r.rel_gap = scale > 0.0 ? r.abs_gap / scale : 0.0;
    r.tolerance = slack;
    r.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + slack;
    return r;
}

CheckResult check_identity_lemma(const ScenarioTree& tree, std::span<const double> terminal,
                                 std::span<const double> f_path, const Solution& solution,
                                 std::size_t depth, double beta) {
    if (depth > tree.horizon())
        throw std::out_of_range("identity check time beyond horizon");
    const DoleansPath e(tree, beta);

    double lhs = 0.0;
    const auto [dfirst, dlast] = tree.depth_range(depth);
    for (std::size_t n = dfirst; n < dlast; ++n)
        lhs += tree.node(n).probability * e.at_node(n) * solution.y[n] * solution.y[n];

    double rhs = 0.0;
    const auto [lfirst, llast] = tree.leaf_range();
    for (std::size_t n = lfirst; n < llast; ++n) {
        const double xi = terminal[n - lfirst];
        rhs += tree.node(n).probability * e.at_node(n) * xi * xi;
    }

    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        if (s.step <= depth)
            continue;
        const double p = tree.node(s.parent).probability;
        const double es = e.at_slot(j);
        const double yl = solution.y[s.parent];
        lhs += p * (beta * es / (1.0 + beta * s.jump) * yl * yl * s.jump +
                    es * z_slot_integrand(solution.z.at(j), s));
        rhs += p * (2.0 * es * yl * f_path[j] * s.jump - es * f_path[j] * f_path[j] * s.jump * s.jump);
    }
    return identity_result("energy_identity[t=" + std::to_string(depth) + "]", lhs, rhs);
}

CheckResult check_identity_lemma(const BsdeProblem& problem, const Solution& solution,
                                 std::size_t depth) {
    if (!problem.generator.path_only())
        throw std::invalid_argument("energy identity check needs a generator free of (y, zeta)");
    const ScenarioTree& tree = *problem.tree;
    const std::vector<double> zeros(tree.mark_count(), 0.0);
    std::vector<double> path(tree.slot_count());
    for (std::size_t j = 0; j < path.size(); ++j)
        path[j] = problem.generator(tree, j, 0.0, zeros);
    return check_identity_lemma(tree, problem.terminal, path, solution, depth, problem.beta);
}

CheckResult check_integral_inequality(std::span<const Increment> path,
                                      std::span<const double> f_path, double beta,
                                      std::size_t t_index) {
    if (!(beta > 0.0))
        throw std::invalid_argument("integral inequality needs beta > 0");
    if (f_path.size() != path.size())
        throw std::invalid_argument("f path needs one value per step");
    if (t_index > path.size())
        throw std::out_of_range("time index beyond path");
    const auto e = doleans_exponential(path, beta);

    double mass = 0.0, jump_sq = 0.0, weighted = 0.0;
    for (std::size_t k = t_index + 1; k <= path.size(); ++k) {
        const Increment& inc = path[k - 1];
        const double f = f_path[k - 1];
        mass += std::abs(f) * (inc.continuous + inc.jump);
        jump_sq += inc.jump * inc.jump;
        const double continuous_part = e[k - 1] * std::expm1(beta * inc.continuous) / beta;
        weighted += f * f * (continuous_part + e[k] * inc.jump);
    }
    const double lhs = e[t_index] * mass * mass;
    const double rhs = (1.0 / beta + beta * jump_sq) * weighted;
    return inequality_result("integral_inequality", lhs, rhs);
}

double apriori_constant(double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("a priori constant needs beta > 0");
    return 2.0 + 4.0 * (1.0 + beta) / beta;
}

CheckResult check_apriori_estimate(const ScenarioTree& tree, std::span<const double> terminal,
                                   std::span<const double> f_path, const Solution& solution,
                                   double beta, std::optional<double> constant_override) {
    const double c = constant_override.value_or(apriori_constant(beta));
    const DoleansPath e(tree, beta);
    const double lhs = y_norm_sq(solution.y, e) + z_norm_sq(solution.z, e);

    // Path-wise sums along every root-to-leaf path.
    const std::size_t n = tree.node_count();
    std::vector<double> jump_sq(n, 0.0), weighted(n, 0.0);
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        for (int ch : s.children) {
            if (ch < 0)
                continue;
            jump_sq[ch] = jump_sq[s.parent] + s.jump * s.jump;
            weighted[ch] = weighted[s.parent] + e.at_slot(j) * f_path[j] * f_path[j] * s.jump;
        }
    }
    double terminal_part = 0.0, path_part = 0.0;
    const auto [first, last] = tree.leaf_range();
    for (std::size_t leaf = first; leaf < last; ++leaf) {
        const double p = tree.node(leaf).probability;
        const double xi = terminal[leaf - first];
        terminal_part += p * e.at_node(leaf) * xi * xi;
        path_part += p * (1.0 / beta + beta * jump_sq[leaf]) * weighted[leaf];
    }
    auto r = inequality_result("apriori_estimate", lhs, c * (terminal_part + path_part));
    if (constant_override)
        r.note = "constant overridden to " + std::to_string(c);
    return r;
}

CheckResult check_norm_equivalence(const PredictableField& z, const DoleansPath& weights,
                                   double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must lie in (0, 1]");
    const ScenarioTree& tree = weights.tree();
    double full = 0.0;
    for (std::size_t j = 0; j < tree.slot_count(); ++j) {
        const Slot& s = tree.slot(j);
        if (s.jump > 1.0 - gamma + 1e-15)
            throw std::invalid_argument("a jump of A exceeds 1 - gamma");
        const auto zeta = z.at(j);
        double sq = 0.0;
        for (std::size_t x = 0; x < s.mark_count(); ++x)
            sq += zeta[x] * zeta[x] * s.mark_law[x];
        full += tree.node(s.parent).probability * sq *
                (weights.at_slot(j) * s.jump + weights.continuous_integral(j));
    }
    const double middle = z_norm_sq(z, weights);

    CheckResult r = inequality_result("norm_equivalence", middle, full);
    r.kind = CheckKind::TwoSided;
    r.lower = gamma * full;
    const double gap_low = r.lower - middle;
    r.abs_gap = std::max(middle - full, gap_low);
    r.pass = r.pass && gap_low <= kInequalitySlack;
    return r;
}

double expanded_seminorm_sq(std::span<const double> dzeta, const Slot& slot) {
    const double zh = hat_z(dzeta, slot);
    double sum = 0.0;
    for (std::size_t x = 0; x < slot.mark_count(); ++x) {
        const double d = dzeta[x] - zh;
        sum += d * d * slot.mark_law[x];
    }
    if (slot.jump != 0.0)
        sum += (1.0 - slot.jump) / slot.jump * zh * zh;
    return sum;
}

CheckResult check_lipschitz(const Generator& f, const ScenarioTree& tree, std::size_t slot,
                            std::size_t samples, double hat_lz_sq, std::mt19937_64& rng) {
    const double lz = f.lipschitz_z();
    if (!(hat_lz_sq > lz * lz))
        throw std::invalid_argument("Lipschitz check needs hat L_z > L_z");
    const Slot& s = tree.slot(slot);
    const std::size_t m = s.mark_count();
    const double ly = f.lipschitz_y();
    std::uniform_real_distribution<double> draw(-3.0, 3.0);

    double worst_margin = -std::numeric_limits<double>::infinity();
    double worst_lhs = 0.0, worst_rhs = 0.0;
    double form_gap = 0.0;
    std::string witness;
    std::vector<double> z1(m), z2(m), dz(m);
    bool pass = true;
    for (std::size_t i = 0; i < samples; ++i) {
        const double y1 = draw(rng), y2 = draw(rng);
        for (std::size_t x = 0; x < m; ++x) {
            z1[x] = draw(rng);
            z2[x] = draw(rng);
            dz[x] = z2[x] - z1[x];
        }
        const double diff = std::abs(f(tree, slot, y2, z2) - f(tree, slot, y1, z1));
        const double sn = lipschitz_seminorm(dz, s);
        const double bound = ly * std::abs(y2 - y1) + lz * sn;
        const double expanded = expanded_seminorm_sq(dz, s);
        const double bound_sq = 2.0 * ly * ly * (y2 - y1) * (y2 - y1) + 2.0 * hat_lz_sq * expanded;
        form_gap = std::max(form_gap, std::abs(sn * sn - expanded) / std::max(1.0, expanded));

        const double margin = std::max(diff - bound, diff * diff - bound_sq);
        const bool ok = diff <= bound + kInequalitySlack && diff * diff <= bound_sq + kInequalitySlack;
        if (margin > worst_margin) {
            worst_margin = margin;
            worst_lhs = diff;
            worst_rhs = bound;
        }
        if (!ok && pass) {
            pass = false;
            std::ostringstream os;
            os.precision(17);
            os << "violated at y=" << y1 << ", y'=" << y2;
            witness = os.str();
        }
    }
    auto r = inequality_result("lipschitz[slot=" + std::to_string(slot) + "]", worst_lhs,
                               worst_rhs);
    r.pass = pass && form_gap <= 1e-12;
    if (form_gap > 1e-12)
        witness += (witness.empty() ? "" : "; ") + std::string("seminorm forms disagree");
    r.note = witness;
    return r;
}

CheckResult check_solution_jump_identity(const BsdeProblem& problem, const Solution& solution,
                                         double tol) {
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
        const double drive = problem.generator(tree, j, yp, zeta) * s.jump;
        const double zh = hat_z(zeta, s);
        for (std::size_t o = 0; o <= m; ++o) {
            if (!s.has_child(o))
                continue;
            const double g = o < m ? zeta[o] - zh : -zh;
            worst = std::max(worst, std::abs(solution.y[s.children[o]] - yp - (g - drive)));
        }
    }
    return inequality_result("jump_identity", worst, 0.0, tol);
}

}  // namespace jumpbsde
