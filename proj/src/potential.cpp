#include "bjj/potential.hpp"
#include "bjj/spectral.hpp"
#include "bjj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace bjj {

PotentialSpec::PotentialSpec() : family(default_well_family()) {}

const char* to_string(DriveVariant v) {
    switch (v) {
        case DriveVariant::Full: return "full";
        case DriveVariant::ConstantOmega: return "constant-omega";
        case DriveVariant::ConstantDeltaE: return "constant-deltae";
    }
    return "?";
}

DriveVariant drive_variant_from_string(const std::string& s) {
    if (s == "full") return DriveVariant::Full;
    if (s == "constant-omega") return DriveVariant::ConstantOmega;
    if (s == "constant-deltae") return DriveVariant::ConstantDeltaE;
    throw config_error("unknown drive variant '" + s +
                       "' (expected full | constant-omega | constant-deltae)");
}

double evaluate_potential(const PotentialSpec& spec, double lambda, double x) {
    const double a = spec.d_of(lambda) / 2.0;
    const double c2 = spec.barrier_of(lambda) / (a * a * a * a);
    const double q = x * x - a * a;
    return c2 * q * q + spec.g * x;
}

void validate_drive(const PotentialSpec& spec, const DriveSpec& drive) {
    if (drive.lambda1 < 0.0) throw config_error("drive: lambda1 must be >= 0");
    if (!(drive.omega > 0.0)) throw config_error("drive: omega must be > 0");
    // full swing must stay inside the tabulated family; touching the edge is fine
    if (!spec.in_domain(spec.lambda0 - drive.lambda1) ||
        !spec.in_domain(spec.lambda0 + drive.lambda1))
        throw bjj::domain_error("drive: lambda0 +- lambda1 = " +
                                std::to_string(spec.lambda0) + " +- " +
                                std::to_string(drive.lambda1) +
                                " leaves the well-family domain; amplitudes are never clamped");
}

double lambda_schedule(const PotentialSpec& spec, const DriveSpec& drive, double t) {
    return spec.lambda0 + drive.lambda1 * std::sin(drive.omega * t);
}

double barrier_position(const PotentialSpec& spec, double lambda) {
    const double a = spec.d_of(lambda) / 2.0;
    const double c2 = spec.barrier_of(lambda) / (a * a * a * a);
    const double g = spec.g;
    auto v = [&](double x) {
        const double q = x * x - a * a;
        return c2 * q * q + g * x;
    };

    // Sample V on a window containing both minima and look for the
    // two-wells-and-a-hump shape: an interior local maximum flanked by an
    // interior local minimum on each side.  Working on V itself (rather than
    // hunting sign changes of V') stays robust when an extremum lands
    // exactly on a sample point, e.g. the untilted hump at x = 0.
    const int ns = 2048;
    const double lo = -1.5 * a, hi = 1.5 * a;
    std::vector<double> vs(ns + 1);
    for (int i = 0; i <= ns; ++i) vs[i] = v(lo + (hi - lo) * i / ns);

    int i_max = -1;
    for (int i = 1; i < ns; ++i) {
        if (!(vs[i] > vs[i - 1] && vs[i] >= vs[i + 1])) continue;
        bool min_left = false, min_right = false;
        for (int j = 1; j < i; ++j)
            if (vs[j] < vs[j - 1] && vs[j] <= vs[j + 1]) { min_left = true; break; }
        for (int j = i + 1; j < ns; ++j)
            if (vs[j] < vs[j - 1] && vs[j] <= vs[j + 1]) { min_right = true; break; }
        if (min_left && min_right && (i_max < 0 || vs[i] > vs[i_max])) i_max = i;
    }
    if (i_max < 0)
        throw bjj::domain_error("potential: wells merged at lambda = " + std::to_string(lambda) +
                                " (tilt swallows the barrier); no interior maximum");

    // Golden-section refinement of the hump inside its bracketing samples.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double xa = lo + (hi - lo) * (i_max - 1) / ns;
    double xb = lo + (hi - lo) * (i_max + 1) / ns;
    double x1 = xb - gr * (xb - xa), x2 = xa + gr * (xb - xa);
    double f1 = v(x1), f2 = v(x2);
    for (int it = 0; it < 120 && xb - xa > 1e-14 * (1.0 + a); ++it) {
        if (f1 < f2) {
            xa = x1; x1 = x2; f1 = f2;
            x2 = xa + gr * (xb - xa); f2 = v(x2);
        } else {
            xb = x2; x2 = x1; f2 = f1;
            x1 = xb - gr * (xb - xa); f1 = v(x1);
        }
    }
    return 0.5 * (xa + xb);
}

WellFamily default_well_family() {
    // Frozen calibrated tables.  Shape: the separation ramps linearly and the
    // barrier geometrically in lambda (ratio e^0.4 per knot), so the tunnel
    // coupling falls near-exponentially across the domain — that exponential
    // response is what loads the drive with strong coupling harmonics.  The
    // two overall scales were solved once so that the operating point
    // lambda0 = 0.675, g = 1.5042 lands on Omega = 0.150, |DeltaE| = 2.409;
    // calibrate_default re-derives them for custom targets.
    const std::vector<double> lam = {0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70,
                                     0.75, 0.80, 0.85, 0.90, 0.95, 1.00};
    const std::vector<double> dv = {
        1.0521414090117569, 1.186314596133341,  1.3204877832549253,
        1.4546609703765097, 1.5888341574980942, 1.7230073446196783,
        1.8571805317412626, 1.991353718862847,  2.1255269059844313,
        2.2597000931060154, 2.3938732802275999, 2.5280464673491845,
        2.6622196544707681};
    const std::vector<double> bv = {
        1.409763697040133,  2.1031203010825359, 3.1374868072656712,
        4.680580307602586,  6.9826053021749148, 10.416823043665417,
        15.540073887498783, 23.183066028540861, 34.585070468425585,
        51.594862294461052, 76.970489842277289, 114.82647773625581,
        171.30097543010183};
    return WellFamily(lam, dv, bv);
}

namespace {

WellFamily scaled_family(const WellFamily& base, double d_scale, double b_scale) {
    std::vector<double> lam = base.d.knots_x();
    std::vector<double> dv = base.d.knots_y();
    std::vector<double> bv = base.barrier.knots_y();
    for (double& v : dv) v *= d_scale;
    for (double& v : bv) v *= b_scale;
    return WellFamily(std::move(lam), std::move(dv), std::move(bv));
}

struct Extracted {
    double omega;
    double abs_de;
};

Extracted extract_at_operating_point(const PotentialSpec& spec) {
    const Grid grid = Grid::modes_default();
    const ModePair modes = lowest_two_states(grid, spec, spec.lambda0, spec.g);
    const TMParams p = tm_parameters(modes, spec, spec.lambda0, spec.g, 0.0, 1);
    return {p.omega, std::abs(p.delta_e)};
}

} // namespace

PotentialSpec calibrate_default(const CalibrationTargets& targets, std::optional<WellFamily> base) {
    PotentialSpec spec;
    spec.lambda0 = targets.lambda0;
    spec.g = targets.g;
    const WellFamily base_family = base ? *base : default_well_family();

    double sd = 1.0, sb = 1.0;
    Extracted cur{};
    auto eval = [&](double d_scale, double b_scale) {
        spec.family = scaled_family(base_family, d_scale, b_scale);
        return extract_at_operating_point(spec);
    };

    cur = eval(sd, sb);
    for (int outer = 0; outer < 16; ++outer) {
        // |DeltaE| is first order in the minima separation: multiplicative update
        sd *= targets.delta_e0 / cur.abs_de;
        cur = eval(sd, sb);

        // secant in log-log for the coupling (Omega falls steeply with barrier)
        double l0 = std::log(sb);
        double f0 = std::log(cur.omega / targets.omega0);
        if (std::abs(f0) > 1e-4) {
            double l1 = l0 + (f0 > 0 ? 0.2 : -0.2);
            Extracted e1 = eval(sd, std::exp(l1));
            double f1 = std::log(e1.omega / targets.omega0);
            for (int it = 0; it < 24 && std::abs(f1) > 1e-4; ++it) {
                if (f1 == f0) break;
                const double l2 = l1 - f1 * (l1 - l0) / (f1 - f0);
                l0 = l1; f0 = f1;
                l1 = std::clamp(l2, l1 - 1.0, l1 + 1.0);
                e1 = eval(sd, std::exp(l1));
                f1 = std::log(e1.omega / targets.omega0);
            }
            sb = std::exp(l1);
            cur = e1;
        }

        const double de_rel = std::abs(cur.abs_de - targets.delta_e0) / targets.delta_e0;
        const double om_rel = std::abs(cur.omega - targets.omega0) / targets.omega0;
        if (de_rel < 2e-3 && om_rel < 5e-3) return spec;
    }

    std::ostringstream oss;
    oss << "calibration failed: residuals |DeltaE|=" << cur.abs_de << " (target "
        << targets.delta_e0 << "), Omega=" << cur.omega << " (target " << targets.omega0 << ")";
    throw calibration_error(oss.str());
}

std::string calibration_hash(const PotentialSpec& spec) {
    std::uint64_t h = 1469598103934665603ull; // FNV offset basis
    auto mix = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffull;
            h *= 1099511628211ull;
        }
    };
    mix(spec.lambda0);
    mix(spec.g);
    mix(spec.units.length_um);
    mix(spec.units.energy_hz);
    mix(spec.units.time_ms);
    for (double v : spec.family.d.knots_x()) mix(v);
    for (double v : spec.family.d.knots_y()) mix(v);
    for (double v : spec.family.barrier.knots_y()) mix(v);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace bjj
