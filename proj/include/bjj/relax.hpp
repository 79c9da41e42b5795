#pragma once
#include <string>
#include <vector>

#include "bjj/splitstep.hpp"

namespace bjj {

// Shared ground-state relaxation driver used by the stationary-state solvers
// (symmetric-well doublets, tilted condensates).  Internal plumbing rather
// than user-facing API: callers supply the potential samples, the
// interaction scale, a real starting guess, and optionally a state to stay
// orthogonal to.

struct GroundRelaxation {
    std::vector<double> phi; // real, unit norm in the integral sense (sum phi^2 h = 1)
    double mu = 0.0;         // chemical potential of the relaxed state
    double residual = 0.0;   // L2 norm of (H[phi] - mu) phi actually reached
};

// Imaginary-time relaxation toward the lowest state of the mean-field
// functional (restricted to the orthogonal complement of *project_against
// when given), followed by a preconditioned residual descent that polishes
// the stationarity condition below `tol`.  Throws numerical_error, prefixed
// with `context`, when the descent stalls or the state develops an imaginary
// part (the lowest state in a sector should be real up to a global phase).
GroundRelaxation relax_lowest(SplitStepEngine& eng, const std::vector<double>& v,
                              double u0n, const std::vector<double>& phi0,
                              const std::vector<double>* project_against,
                              double tol, const std::string& context);

} // namespace bjj
