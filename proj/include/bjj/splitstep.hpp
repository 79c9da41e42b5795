#pragma once
#include "bjj/grid.hpp"

#include <complex>
#include <vector>

namespace bjj {

// Which representation carries the kinetic half of a split step.
//  - Spectral: FFT to momentum space, exact quadratic dispersion k^2/2 on the
//    periodic extension of the grid.
//  - FD3: eigenbasis of the three-point finite-difference Laplacian with hard
//    wall ends.  Much slower (dense transforms), but it makes the one-body
//    limit of the field dynamics operator-identical to the discrete lattice
//    propagator, which is what the cross-model equivalence tests need.
enum class KineticScheme { Spectral, FD3 };

// Strang-split propagator for fields psi(x) under
//     i d(psi)/dt = [ -1/2 d^2/dx^2 + V(x,t) + u |psi|^2 ] psi
// with either real time steps (set_real_timestep) or imaginary time steps
// (set_imaginary_timestep, for energy-minimizing relaxation).  The state
// lives inside the engine between load() and store() so that FFT plans can
// run in place without per-step copies.
class SplitStepEngine {
public:
    struct Impl; // opaque state (FFT plans / kinetic eigenbasis)

    SplitStepEngine(const Grid& grid, KineticScheme scheme);
    ~SplitStepEngine();
    SplitStepEngine(const SplitStepEngine&) = delete;
    SplitStepEngine& operator=(const SplitStepEngine&) = delete;

    const Grid& grid() const { return grid_; }
    KineticScheme scheme() const { return scheme_; }

    void load(const std::vector<std::complex<double>>& psi);
    void store(std::vector<std::complex<double>>& psi) const;

    void set_real_timestep(double dt);
    void set_imaginary_timestep(double tau);

    // One Strang step with the potential samples V(x_i) held fixed across the
    // step (callers sample the drive at the step midpoint).
    void step(const std::vector<double>& v, double u);

    // exp(-i dt V_eff / 2) factor only; exposed so tests can compose custom
    // operator splittings.
    void half_potential(const std::vector<double>& v, double u);
    // kinetic factor only
    void full_kinetic();

    // Largest eigenvalue of the engine's kinetic operator: pi^2/(2 h^2) for
    // the spectral factor, the top finite-difference eigenvalue for FD3.
    // Step-size rules for real-time propagation scale against this.
    double max_kinetic_eigenvalue() const;

    // Quadrature over the grid, weight h per point.
    double norm_squared() const;
    void normalize();

    // Energy functional  E = int( |psi'|^2/2 + V |psi|^2 + u/2 |psi|^4 ) dx
    // and chemical potential  mu = E + u/2 int |psi|^4 dx, with the kinetic
    // term evaluated in the engine's own kinetic representation.
    double energy(const std::vector<double>& v, double u) const;
    double chemical_potential(const std::vector<double>& v, double u) const;

    // (H[psi] - mu) psi on the loaded state, evaluated with the engine's own
    // kinetic representation; the exact field relaxation solvers descend on.
    void residual_field(const std::vector<double>& v, double u, double mu,
                        std::vector<std::complex<double>>& out) const;

    // L2 norm of (H[psi] - mu) psi, the stationarity residual.
    double stationary_residual(const std::vector<double>& v, double u, double mu) const;

    // field <- (T + c)^(-1) field with T the engine's kinetic operator.
    // Smooths a descent direction so steps are not stiffness-limited by the
    // largest kinetic eigenvalue of the grid.
    void apply_inverse_shifted_kinetic(std::vector<std::complex<double>>& field, double c) const;

    // Remove the component along phi (real, unit L2 norm on this grid) and
    // renormalize; used to relax toward the lowest state orthogonal to phi.
    void project_out(const std::vector<double>& phi);

private:
    Grid grid_;
    KineticScheme scheme_;
    Impl* impl_;
};

} // namespace bjj
