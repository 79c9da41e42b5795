#pragma once
#include "bjj/grid.hpp"
#include "bjj/potential.hpp"
#include "bjj/splitstep.hpp"

#include <functional>
#include <vector>

namespace bjj {

// How a mode pair was obtained: bare single-particle eigenstates of the
// double well, or self-consistent mean-field stationary states.
enum class ModeProvenance { SingleParticle, MeanField };

// Lowest symmetric/antisymmetric doublet of the (untilted) double well,
// together with the localized left/right combinations.
//
// Orientation convention: phi_lower is the mode localized in the well that
// the linear tilt g*x makes LOWER in energy (negative-centroid side for
// g > 0), and phi_upper the other one.  All state preparation, imbalance
// signs, and two-mode parameters derive from this single rule.
struct ModePair {
    Grid grid;
    std::vector<double> phi_g;     // even-like ground mode, positive mean sign
    std::vector<double> phi_e;     // odd-like excited mode
    std::vector<double> phi_lower; // (phi_g + phi_e)/sqrt(2), tilt-lower side
    std::vector<double> phi_upper; // (phi_g - phi_e)/sqrt(2)
    double e_g = 0.0;              // eigenvalue (or chemical potential)
    double e_e = 0.0;
    double e_next = 0.0;           // next level above the doublet
    ModeProvenance provenance = ModeProvenance::SingleParticle;
    // Set when the gap to the next level fails to dominate the doublet
    // splitting by at least 10x, i.e. the two-mode truncation is suspect.
    bool two_mode_warning = false;
};

enum class TMModel { Standard, Improved };
const char* to_string(TMModel model);

// Parameters of the reduced two-site description at one lambda:
//   H = -omega*Jx + delta_e*Jz + 2*kappa*Jz^2
// delta_e is SIGNED with the convention above (non-positive when the tilt
// lowers phi_lower); report |delta_e| on user-facing output.
struct TMParams {
    double omega = 0.0;
    double delta_e = 0.0;
    double kappa = 0.0;
    TMModel model = TMModel::Standard;
};

// Doublet of the symmetric part of the potential at a given lambda.  The
// tilt g enters only through the orientation of phi_lower/phi_upper.
ModePair lowest_two_states(const Grid& grid, const PotentialSpec& spec,
                           double lambda, double g);

// Same computation for an arbitrary caller-supplied potential; lets tests
// drive the solver with exactly solvable wells.  tilt_sign picks which side
// counts as "lower" (+1 means negative-x side, matching g > 0).
ModePair lowest_two_states_of(const Grid& grid,
                              const std::function<double(double)>& v,
                              double tilt_sign = 1.0);

// Two-mode parameters from bare single-particle modes:
//   omega   = -( <phi_lower|h|phi_upper> + <phi_upper|h|phi_lower> )
//   delta_e = <phi_lower|h|phi_lower> - <phi_upper|h|phi_upper>
//   kappa   = (u0/2) * int |phi_lower|^4 dx
// with h the one-body Hamiltonian including the tilt g*x.
TMParams tm_parameters(const ModePair& modes, const PotentialSpec& spec,
                       double lambda, double g, double u0, int n_atoms);

// Lowest symmetric and antisymmetric stationary states of the mean-field
// energy functional at interaction strength u0n = u0 * N, by imaginary-time
// relaxation of the symmetric (g = 0) well.  e_g/e_e hold the chemical
// potentials.  Throws numerical_error if the relaxation cannot reach the
// residual tolerance.
//
// `scheme` selects the kinetic representation the states are stationary
// under.  Spectral is the production choice; FD3 makes the u0n = 0 limit
// agree with lowest_two_states on the same grid to the residual tolerance
// (identical discrete operator), which the cross-model oracles rely on.
ModePair mean_field_stationary_states(const Grid& grid, const PotentialSpec& spec,
                                      double lambda, double u0n,
                                      double residual_tol = 1e-8,
                                      KineticScheme scheme = KineticScheme::Spectral);

// Interaction-corrected two-mode parameters built from mean-field modes:
// the bare mode energies are replaced by chemical potentials with the
// self-interaction double counting removed,
//   omega = (mu_e - mu_g) - (u0n/2) * ( int phi_e^4 - int phi_g^4 )
// while delta_e and kappa keep their defining integrals over the mean-field
// localized modes.
TMParams improved_tm_parameters(const ModePair& mean_field_modes,
                                const PotentialSpec& spec, double lambda,
                                double g, double u0, int n_atoms);

// One row of the static parameter tables swept over lambda.
struct CurveRow {
    double lambda = 0.0;
    double omega = 0.0;
    double delta_e = 0.0; // signed
    double kappa = 0.0;
    bool two_mode_warning = false;
};

std::vector<CurveRow> parameter_curves(const PotentialSpec& spec,
                                       const std::vector<double>& lambdas,
                                       double u0, int n_atoms,
                                       const Grid& grid = Grid::modes_default());

} // namespace bjj
