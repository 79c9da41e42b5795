#include "bjj/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bjj/errors.hpp"

namespace bjj {

namespace {

constexpr int kMaxHarmonics = 32;
constexpr double kReconstructTol = 1e-6;
constexpr double kDropFraction = 1e-12;
constexpr double kDistortionWarn = 0.02;

using cplx = std::complex<double>;

// i^m for integer m >= 0, exact (period-4 cycle).
cplx unit_power(int m) {
    switch (m & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// One-sided peak-convention coefficient at harmonic m of uniformly sampled
// periodic data: x(theta) = DC + sum_m Re(G_m e^{i m theta}).
cplx harmonic_coefficient(const std::vector<double>& samples, int m) {
    const int p = static_cast<int>(samples.size());
    cplx acc = 0.0;
    for (int j = 0; j < p; ++j) {
        const double th = 2.0 * M_PI * m * j / p;
        acc += samples[j] * cplx(std::cos(th), -std::sin(th));
    }
    return 2.0 * acc / static_cast<double>(p);
}

} // namespace

double bessel_j(int l, double z) {
    double sign = 1.0;
    if (l < 0) {
        l = -l;
        if (l & 1) sign = -sign;
    }
    if (z < 0.0) {
        z = -z;
        if (l & 1) sign = -sign;
    }
    return sign * std::cyl_bessel_j(static_cast<double>(l), z);
}

double DriveHarmonics::reconstruct_omega(double t) const {
    double om = omega0;
    for (std::size_t m = 1; m <= omega1.size(); ++m) {
        const double th = static_cast<double>(m) * omega * t;
        const cplx g = omega1[m - 1];
        om += g.real() * std::cos(th) - g.imag() * std::sin(th);
    }
    return om;
}

DriveHarmonics decompose_drive(const ParamTables& tables, const DriveSpec& drive,
                               const PotentialSpec& spec) {
    if (drive.lambda1 < 0.0)
        throw domain_error("decompose_drive: lambda1 must be >= 0");
    const double lam0 = spec.lambda0;

    DriveHarmonics h;
    h.omega = drive.omega;

    if (drive.lambda1 == 0.0) {
        if (!tables.omega.contains(lam0))
            throw domain_error("decompose_drive: tables do not cover lambda0");
        h.omega0 = tables.omega(lam0);
        h.delta_e0 = std::abs(tables.delta_e(lam0));
        return h;
    }
    if (!(drive.omega > 0.0))
        throw domain_error("decompose_drive: omega must be > 0 when lambda1 > 0");
    if (!tables.omega.contains(lam0 - drive.lambda1) ||
        !tables.omega.contains(lam0 + drive.lambda1))
        throw domain_error("decompose_drive: drive swing leaves the tabulated range");

    constexpr int p = 512;
    std::vector<double> om(p), de(p);
    for (int j = 0; j < p; ++j) {
        const double lam = lam0 + drive.lambda1 * std::sin(2.0 * M_PI * j / p);
        om[j] = tables.omega(lam);
        de[j] = tables.delta_e(lam);
    }

    // canonical orientation: positive static bias (mirror is a relabeling of
    // the wells) ...
    double de_dc = std::accumulate(de.begin(), de.end(), 0.0) / p;
    if (de_dc < 0.0) {
        for (double& x : de) x = -x;
        de_dc = -de_dc;
    }
    // ... and a non-negative fundamental bias amplitude (half-period time
    // shift; applied to both curves so their relative phases are preserved).
    if (-harmonic_coefficient(de, 1).imag() < 0.0) {
        std::rotate(om.begin(), om.begin() + p / 2, om.end());
        std::rotate(de.begin(), de.begin() + p / 2, de.end());
    }

    h.delta_e0 = de_dc;
    const cplx g1_de = harmonic_coefficient(de, 1);
    h.b = -g1_de.imag(); // fundamental is pure sine by the lambda(t) symmetry

    double de_tail = 0.0;
    for (int m = 2; m <= kMaxHarmonics; ++m) de_tail += std::norm(harmonic_coefficient(de, m));
    h.bias_distortion_warning = std::sqrt(de_tail) > kDistortionWarn * std::abs(h.b);

    h.omega0 = std::accumulate(om.begin(), om.end(), 0.0) / p;
    double om_scale = 0.0;
    for (double x : om) om_scale = std::max(om_scale, std::abs(x));
    if (om_scale == 0.0) om_scale = 1.0;

    // adaptive truncation: extend the series until it reproduces the sampled
    // coupling to the reconstruction tolerance
    std::vector<double> recon(p, h.omega0);
    int chosen = -1;
    for (int m = 0; m <= kMaxHarmonics && chosen < 0; ++m) {
        if (m > 0) {
            const cplx g = harmonic_coefficient(om, m);
            h.omega1.push_back(g);
            for (int j = 0; j < p; ++j) {
                const double th = 2.0 * M_PI * m * j / p;
                recon[j] += g.real() * std::cos(th) - g.imag() * std::sin(th);
            }
        }
        double err = 0.0;
        for (int j = 0; j < p; ++j) err = std::max(err, std::abs(om[j] - recon[j]));
        if (err < kReconstructTol * om_scale) chosen = m;
    }
    if (chosen < 0)
        throw numerical_error(
            "decompose_drive: coupling not representable to 1e-6 with 32 harmonics");
    h.omega1.resize(chosen);
    h.truncation = chosen;
    for (cplx& g : h.omega1)
        if (std::abs(g) < kDropFraction * std::abs(h.omega0)) g = 0.0;
    return h;
}

namespace {

ResonancePrediction finish_prediction(const DriveHarmonics& h, int n, cplx c) {
    ResonancePrediction pred;
    pred.n = n;
    pred.omega_eff = std::abs(c);
    pred.phi = pred.omega_eff > 0.0 ? std::arg(c) : 0.0;
    pred.width_est = pred.omega_eff;
    if (n >= 1) {
        pred.omega_res = h.delta_e0 / n;
    } else {
        pred.omega_res = 0.0;
        pred.trivial = h.delta_e0 > 1e-12;
    }
    return pred;
}

void check_order_and_frequency(int n, double omega, const char* who) {
    if (n < 0) throw domain_error(std::string(who) + ": order n must be >= 0");
    if (!(omega > 0.0)) throw domain_error(std::string(who) + ": omega must be > 0");
}

} // namespace

ResonancePrediction bessel_effective_coupling(const DriveHarmonics& h, int n,
                                              double omega) {
    check_order_and_frequency(n, omega, "bessel_effective_coupling");
    const double z = h.b / omega;
    cplx c = h.omega0 * bessel_j(n, z);
    for (int m = 1; m <= static_cast<int>(h.omega1.size()); ++m) {
        const cplx g = h.omega1[m - 1];
        if (g == 0.0) continue;
        const cplx ipm = unit_power(m);
        c += 0.5 * g * std::conj(ipm) * bessel_j(n + m, z) +
             0.5 * std::conj(g) * ipm * bessel_j(n - m, z);
    }
    // report the same phase gauge as the direct period average
    return finish_prediction(h, n, std::conj(unit_power(n)) * c);
}

ResonancePrediction rwa_effective_coupling(
    const DriveHarmonics& h, int n, double omega,
    const std::function<double(double)>* exact_omega_of_t) {
    check_order_and_frequency(n, omega, "rwa_effective_coupling");
    const double z = h.b / omega;
    const double period = 2.0 * M_PI / omega;

    cplx avg = 0.0, prev = 0.0;
    bool converged = false;
    for (int p = 512; p <= 65536; p *= 2) {
        avg = 0.0;
        for (int j = 0; j < p; ++j) {
            const double t = period * j / p;
            const double om =
                exact_omega_of_t ? (*exact_omega_of_t)(t) : h.reconstruct_omega(t);
            const double phase = n * omega * t - z * std::cos(omega * t);
            avg += om * cplx(std::cos(phase), std::sin(phase));
        }
        avg /= static_cast<double>(p);
        if (p > 512 && std::abs(avg - prev) <=
                           1e-9 * std::max(std::abs(h.omega0), 1e-12)) {
            converged = true;
            break;
        }
        prev = avg;
    }
    if (!converged)
        throw numerical_error(
            "rwa_effective_coupling: period-average quadrature did not converge");
    return finish_prediction(h, n, avg);
}

RabiOscillation predict_rabi(const ResonancePrediction& pred, int n_atoms,
                             double detuning) {
    if (n_atoms < 1) throw domain_error("predict_rabi: n_atoms must be >= 1");
    RabiOscillation osc;
    osc.frequency = std::hypot(detuning, pred.omega_eff);
    osc.contrast = osc.frequency > 0.0
                       ? (pred.omega_eff / osc.frequency) * (pred.omega_eff / osc.frequency)
                       : 0.0;
    osc.amplitude = 0.5 * n_atoms * osc.contrast;
    osc.level = 0.5 * n_atoms * (1.0 - osc.contrast);
    return osc;
}

} // namespace bjj
