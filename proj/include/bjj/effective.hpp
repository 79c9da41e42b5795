#pragma once

// Rotating-frame (resonance-averaged) description of the driven junction.
//
// Near the n-th bias resonance n*omega = |DeltaE0| the driven two-mode
// Hamiltonian reduces, after averaging over the fast drive phase, to an
// undriven two-level problem with a renormalized tunnel coupling.  This
// module decomposes the driven parameter curves into harmonics, evaluates
// the renormalized coupling both in closed form (Bessel-function sums) and
// by direct numerical averaging, and turns the result into resonance
// predictions (position, strength, width, Rabi dynamics).
//
// Conventions:
//  * The bias is handled as a positive magnitude: curves with a negative
//    tilt energy are mirror-flipped so the static bias delta_e0 > 0 and the
//    fundamental drive amplitude b >= 0 (time-shift gauge).  Neither flip
//    changes any population observable.
//  * Harmonic coefficients are peak amplitudes in the one-sided complex
//    form Omega(t) = omega0 + sum_m Re(omega1[m-1] * e^{i m omega t}).
//  * The effective coupling of a purely oscillating harmonic is HALF its
//    peak amplitude (the usual rotating-wave factor); the static component
//    omega0 enters whole, weighted by J_n(b/omega).

#include <complex>
#include <functional>
#include <vector>

#include "bjj/potential.hpp"
#include "bjj/twomode.hpp"

namespace bjj {

// Ordinary Bessel function of integer order l (any sign), J_l(z).
double bessel_j(int l, double z);

// Harmonic content of the driven two-mode parameters over one drive period.
struct DriveHarmonics {
    double omega = 0.0;  // drive angular frequency the decomposition used
    double omega0 = 0.0; // period average (DC) of the tunnel coupling
    // Peak-convention complex harmonic coefficients of the tunnel coupling,
    // index m-1 holds the coefficient at frequency m*omega.
    std::vector<std::complex<double>> omega1;
    double b = 0.0;        // fundamental amplitude of the bias drive, >= 0
    double delta_e0 = 0.0; // period average of the bias magnitude
    int truncation = 0;    // number of harmonics kept (M)
    // Set when the bias acquires > 2% relative harmonic content beyond its
    // fundamental over the drive swing (the linear-bias model is then
    // questionable).
    bool bias_distortion_warning = false;

    // Tunnel coupling rebuilt from the stored harmonics at time t (drive
    // phase measured in the gauge the coefficients are stored in).
    double reconstruct_omega(double t) const;
};

// Resonance-frame summary at order n.
struct ResonancePrediction {
    int n = 0;
    double omega_res = 0.0; // delta_e0 / n for n >= 1; 0 for the n = 0 line
    double omega_eff = 0.0; // magnitude of the stationary rotating-frame coupling
    double phi = 0.0;       // phase of the stationary coupling (gauge-dependent)
    double width_est = 0.0; // Lorentzian frequency scale of the dip (= omega_eff)
    bool trivial = false;   // n = 0: the zero-frequency line of a biased trap
};

// Two-level oscillation implied by a resonance prediction at a given
// detuning delta = delta_e0 - n*omega: <J_z>(t) = level + amplitude*cos(W t).
struct RabiOscillation {
    double frequency = 0.0; // generalized Rabi frequency W
    double contrast = 0.0;  // transferred fraction, omega_eff^2 / W^2 in [0, 1]
    double amplitude = 0.0; // (N/2) * contrast: cosine amplitude of <J_z>
    double level = 0.0;     // (N/2) * (1 - contrast): mean of <J_z>
};

// Fourier analysis of Omega(lambda(t)) and DeltaE(lambda(t)) over one drive
// period, with lambda(t) = spec.lambda0 + drive.lambda1*sin(drive.omega*t)
// evaluated through the supplied parameter tables.  The truncation order is
// the smallest M whose reconstruction of the coupling is accurate to 1e-6
// relative (hard cap 32, else numerical_error); coefficients below
// 1e-12*omega0 are zeroed.  lambda1 = 0 yields the undriven decomposition
// (no harmonics, b = 0).
DriveHarmonics decompose_drive(const ParamTables& tables, const DriveSpec& drive,
                               const PotentialSpec& spec);

// Closed-form stationary rotating-frame coupling at order n >= 0 and drive
// frequency omega: Bessel-weighted vector sum of the harmonic contributions,
//   C = omega0*J_n(z) + sum_m [ (G_m/2)(-i)^m J_{n+m}(z) + (G_m*/2) i^m J_{n-m}(z) ],
// z = b/omega; omega_eff = |C|.  For n = 0 with a nonzero static bias the
// prediction is flagged trivial (the zero-frequency line).
ResonancePrediction bessel_effective_coupling(const DriveHarmonics& h, int n,
                                              double omega);

// The same object evaluated by direct numerical period-averaging of
// Omega(t) * e^{i[n omega t - (b/omega) cos(omega t)]}, independent of the
// closed-form Bessel algebra.  By default Omega(t) is rebuilt from the
// stored harmonics; pass exact_omega_of_t to average the unreduced coupling
// instead (e.g. straight from the parameter tables).  The quadrature is
// refined until two successive resolutions agree or numerical_error is
// thrown.
ResonancePrediction rwa_effective_coupling(
    const DriveHarmonics& h, int n, double omega,
    const std::function<double(double)>* exact_omega_of_t = nullptr);

// Two-level dynamics implied by a prediction: frequency sqrt(delta^2 +
// omega_eff^2) and transferred fraction omega_eff^2/(delta^2 + omega_eff^2)
// for atoms starting in the lower well, scaled to <J_z> units by n_atoms.
RabiOscillation predict_rabi(const ResonancePrediction& pred, int n_atoms,
                             double detuning);

} // namespace bjj
