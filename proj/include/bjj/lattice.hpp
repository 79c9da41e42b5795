#pragma once
#include "bjj/grid.hpp"
#include "bjj/potential.hpp"
#include "bjj/twomode.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace bjj {

// Exact many-body dynamics on a coarse spatial lattice.  The continuum
// Hamiltonian -1/2 d^2/dx^2 + V(x; lambda(t), g) + contact interaction is
// discretized on the nodes of a small grid (three-point kinetic stencil,
// hard-wall ends, on-site interaction U0/h) and the full bosonic Fock space
// of N atoms on M sites is propagated without any mode truncation.  This is
// the reference the reduced two-site and mean-field models are judged
// against: it is exact for its own lattice, so any disagreement with a
// reduced model on the same lattice is the reduced model's error.
//
// Scales supported: N <= 6 atoms, 2 <= M <= 16 sites, Fock dimension
// C(N+M-1, N) <= 5e4.  That is deliberately desk-sized -- the point is
// model discrimination, not large-N production runs.

// Dense state vector over the Fock basis of a LatticeSystem.
using LatticeState = std::vector<std::complex<double>>;

struct LatticeSystem {
    Grid grid;          // node positions are the lattice sites (may have as
                        // few as 2 points; the PDE-grid minimum is waived)
    PotentialSpec spec; // potential family, operating point, tilt
    int n_atoms = 0;    // N, 1..6
    int n_sites = 0;    // M = grid.n_points, 2..16
    double u0 = 0.0;    // continuum contact strength
    double u_eff = 0.0; // on-site interaction u0 / h
    std::size_t dim = 0; // C(N+M-1, N)

    // Fock basis, one row per state: occupations[s*M + i] = atoms on site i.
    // State 0 has every atom on site 0; enumeration is in descending
    // lexicographic order of the occupation tuple.
    std::vector<std::uint8_t> occupations;

    // lambda-independent diagonal: per-atom kinetic stencil center n_i/h^2
    // plus the pair interaction u_eff/2 * sum_i n_i (n_i - 1).
    std::vector<double> diag_static;

    // Nearest-neighbor hopping, each undirected pair stored once and applied
    // symmetrically: row s couples to column hop_col[k] with real amplitude
    // hop_amp[k] = -sqrt(n_i (n_j + 1)) / (2 h^2), for k in
    // [hop_row_start[s], hop_row_start[s+1]).
    std::vector<std::size_t> hop_row_start;
    std::vector<std::uint32_t> hop_col;
    std::vector<double> hop_amp;

    // Site weights of the population-imbalance operator Jz: +1/2 on the
    // tilt-favoured side of the static barrier top, -1/2 on the other, so
    // <Jz> = N/2 means every atom sits in the initially lower well (the same
    // orientation the two-site model and the mean-field imbalance use).
    std::vector<double> jz_weight;
    double barrier_cut = 0.0; // barrier-top position at spec.lambda0
};

// Assemble the lattice for N atoms on the nodes of grid_coarse.  u0 is the
// continuum contact strength; the on-site interaction is u0/h.  Throws
// domain_error when N or M is outside the supported range or the Fock
// dimension would exceed the 5e4 cap, config_error on degenerate grid
// geometry, and propagates domain_error from the barrier locator when the
// tilt has merged the wells at spec.lambda0.
LatticeSystem build_lattice(const Grid& grid_coarse, const PotentialSpec& spec,
                            double u0, int n_atoms);

// On-site potential energies V(x_i; lambda, g) for every site.
std::vector<double> lattice_site_potentials(const LatticeSystem& sys, double lambda);

// y = H x with H = hopping + diag_static + sum_i n_i site_v[i].  site_v must
// have one entry per site (take it from lattice_site_potentials).  Exposed so
// tests can assemble the dense matrix column by column.
void apply_lattice_hamiltonian(const LatticeSystem& sys,
                               const std::vector<double>& site_v,
                               const LatticeState& x, LatticeState& y);

// <x|H(lambda)|x> / <x|x>.
double lattice_energy(const LatticeSystem& sys, double lambda, const LatticeState& state);

// Symmetric product state: every atom in the given single-particle orbital
// (one complex amplitude per site; normalized internally).  With N=1 this is
// the orbital itself.
LatticeState condensate_state(const LatticeSystem& sys,
                              const std::vector<std::complex<double>>& orbital);

// Many-body ground state of the static Hamiltonian at spec.lambda0, by
// restarted Lanczos iteration.  Deterministic; throws numerical_error if the
// iteration fails to converge.
LatticeState lattice_ground_state(const LatticeSystem& sys);

// <Jz>, Var(Jz), and the natural-occupation contrast (n1 - n2)/N of the
// one-body density matrix over sites (1 = condensed, ~0 = fully fragmented;
// same convention as the two-site model's observables()).
Observables lattice_observables(const LatticeSystem& sys, const LatticeState& state);

// Step size satisfying both the drive-resolution rule dt * omega <= 0.05 and
// the Krylov accuracy rule dt * spread(H) <= 30, where spread is a Gershgorin
// bound on the spectral width over the full drive swing.
double lattice_default_timestep(const LatticeSystem& sys, const DriveSpec& drive);

// Propagate state0 under lambda(t) = lambda0 + lambda1 sin(omega t) by the
// fourth-order commutator-free scheme (two exponentials of Gauss-point
// Hamiltonian blends per step), each exponential evaluated in an adaptive
// Lanczos-Krylov subspace.  Records <Jz> (raw, atom units), Var(Jz), the
// natural-occupation contrast, and the running time average of <Jz>/N on
// n_records step-aligned times.  The returned TrajectoryRecord's final_state
// (a two-mode SpinState) is left empty -- Fock amplitudes at t_final go to
// *final_state when given.
//
// Only the direct drive variant exists here: the lattice modulates the
// physical potential, so the variants that hold one reduced parameter fixed
// have no lattice counterpart (domain_error).  Throws domain_error when the
// swing leaves the family domain or dt breaks the Krylov step rule
// dt * spread <= 40, and numerical_error when the propagated norm drifts by
// more than 1e-6.
TrajectoryRecord propagate_exact(const LatticeSystem& sys, const DriveSpec& drive,
                                 const LatticeState& state0, double t_final, double dt,
                                 int n_records = 2001, LatticeState* final_state = nullptr);

// Same, starting from the static many-body ground state.
TrajectoryRecord propagate_exact(const LatticeSystem& sys, const DriveSpec& drive,
                                 double t_final, double dt, int n_records = 2001);

} // namespace bjj
