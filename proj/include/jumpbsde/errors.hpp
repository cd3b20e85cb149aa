#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jumpbsde {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Delta A * L_y >= 1 on a slot: the one-step equation is not a contraction.
class StepSingular : public SolverError {
public:
    StepSingular(std::size_t slot, const std::string& what) : SolverError(what), slot_(slot) {}
    std::size_t slot() const { return slot_; }

private:
    std::size_t slot_;
};

// Singular step whose equation holds for every y (a continuum of solutions).
class Degenerate : public StepSingular {
public:
    using StepSingular::StepSingular;
};

class NonFinite : public SolverError {
public:
    using SolverError::SolverError;
};

class NoConvergence : public SolverError {
public:
    using SolverError::SolverError;
};

// 2 L_y^2 |Delta A|^2 < 1 - eps fails for every eps in (0, 1).
class ConditionViolated : public SolverError {
public:
    using SolverError::SolverError;
};

class DenominatorNonpositive : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace jumpbsde
