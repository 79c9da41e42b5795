#pragma once
#include <complex>
#include <vector>

#include "bjj/grid.hpp"
#include "bjj/potential.hpp"
#include "bjj/splitstep.hpp"
#include "bjj/twomode.hpp"

namespace bjj {

// Mean-field condensate wavefunction on a spatial grid, evolving under
//   i d(psi)/dt = [ -1/2 d^2/dx^2 + V(x; lambda(t)) + u0n |psi|^2 ] psi
// with unit norm in the integral sense (sum |psi|^2 h = 1).
struct GPField {
    Grid grid;
    std::vector<std::complex<double>> psi;
    double u0n = 0.0;
    double t = 0.0;

    double norm_squared() const {
        double s = 0.0;
        for (const auto& p : psi) s += std::norm(p);
        return s * grid.h();
    }
};

// Imaginary-time ground state of the FULL tilted trap at the given lambda:
// the condensate localizes in the tilt-lowered well once the bias dominates
// the tunnel splitting.  residual: L2 norm of (H[psi] - mu) psi below
// `residual_tol` or numerical_error.  `scheme` chooses the kinetic
// representation (FD3 makes the u0n = 0 limit operator-identical to the
// finite-difference eigensolver, which the linear-limit oracle relies on).
GPField gp_ground_state_tilted(const Grid& grid, const PotentialSpec& spec,
                               double lambda, double u0n,
                               double residual_tol = 1e-8,
                               KineticScheme scheme = KineticScheme::Spectral);

// Population imbalance: half the normalized density difference across the
// instantaneous barrier maximum, oriented so the tilt-lowered well counts
// positive (matches <Jz>/N of the two-mode description).  Throws
// bjj::domain_error when the tilt has swallowed the barrier.
double imbalance(const GPField& field, const PotentialSpec& spec, double lambda);

// Strang split-operator propagation under the driven trap, sampling the
// drive at each step midpoint.  Records carry the imbalance in jz_mean with
// n_atoms = 1 (so jz_mean / n_atoms is the mean-field <Jz>/N directly);
// jz_var and frag are quiet-NaN -- they have no single-mode meaning.  The
// record's final_state is unused; the evolved field is written to
// *final_field when given.
//
// pre: dt * (max kinetic eigenvalue of the scheme on this grid) <= 0.1,
// which gp_default_timestep saturates.  Norm drift beyond 1e-6 raises
// numerical_error.
TrajectoryRecord propagate_gp(const GPField& field0, const PotentialSpec& spec,
                              const DriveSpec& drive, double t_final, double dt,
                              int n_records = 2001,
                              KineticScheme scheme = KineticScheme::Spectral,
                              GPField* final_field = nullptr);

// 0.1 / (max kinetic eigenvalue) for the scheme on this grid.
double gp_default_timestep(const Grid& grid,
                           KineticScheme scheme = KineticScheme::Spectral);

} // namespace bjj
