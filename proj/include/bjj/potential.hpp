#pragma once
#include <vector>
#include <optional>
#include <string>
#include "bjj/units.hpp"
#include "bjj/interp.hpp"

namespace bjj {

// Strictly positive tabulated curve interpolated in log space: knot values
// are reproduced exactly, and between knots the curve follows a geometric
// law whenever the knot sequence does (the interpolant of an exactly
// geometric table IS the exponential through its knots).  Used for
// quantities that span orders of magnitude, where direct piecewise-cubic
// interpolation would leave curvature kinks at every knot -- kinks that
// the driven dynamics would otherwise pick up as spurious high harmonics.
class GeometricCurve {
public:
    GeometricCurve() = default;
    GeometricCurve(std::vector<double> x, std::vector<double> y, std::string name)
        : raw_y_(std::move(y)) {
        std::vector<double> log_y(raw_y_.size());
        for (std::size_t i = 0; i < raw_y_.size(); ++i) {
            if (!(raw_y_[i] > 0.0))
                throw config_error(name + ": values must be positive");
            log_y[i] = std::log(raw_y_[i]);
        }
        log_curve_ = MonotoneCubic(std::move(x), std::move(log_y), std::move(name));
    }

    double operator()(double x) const { return std::exp(log_curve_(x)); }
    double x_min() const { return log_curve_.x_min(); }
    double x_max() const { return log_curve_.x_max(); }
    bool contains(double x) const { return log_curve_.contains(x); }
    const std::vector<double>& knots_x() const { return log_curve_.knots_x(); }
    const std::vector<double>& knots_y() const { return raw_y_; }
    bool strictly_increasing() const {
        for (std::size_t i = 1; i < raw_y_.size(); ++i)
            if (!(raw_y_[i] > raw_y_[i - 1])) return false;
        return true;
    }

private:
    MonotoneCubic log_curve_;
    std::vector<double> raw_y_;
};

// Tabulated well-family: minima separation d(lambda), interpolated monotone-
// cubically, and barrier height barrier(lambda), interpolated geometrically
// (the barrier sweeps orders of magnitude), both strictly increasing over a
// common lambda domain.  The family encodes how a single control parameter
// steers the double well; groups with their own trap calibration can
// substitute their own tables via the config file.
struct WellFamily {
    MonotoneCubic d;        // minima separation
    GeometricCurve barrier; // barrier height above the well minima

    WellFamily() = default;
    WellFamily(std::vector<double> lambda, std::vector<double> dvals, std::vector<double> bvals)
        : d(lambda, std::move(dvals), "well_family.d"),
          barrier(std::move(lambda), std::move(bvals), "well_family.barrier") {
        if (!d.strictly_increasing())
            throw config_error("well_family: d(lambda) must be strictly increasing");
        if (!barrier.strictly_increasing())
            throw config_error("well_family: barrier(lambda) must be strictly increasing");
        for (double v : d.knots_y())
            if (!(v > 0.0)) throw config_error("well_family: d must be positive");
    }

    double lambda_min() const { return d.x_min(); }
    double lambda_max() const { return d.x_max(); }
    bool contains(double lam) const { return d.contains(lam); }
};

// Static trap description: symmetric quartic double well plus linear tilt,
//   V(x; lambda) = c2(lambda) * (x^2 - (d/2)^2)^2 + g * x,
// with c2 = barrier / (d/2)^4 so the quartic part has minima at x = +-d/2
// of depth `barrier` below the central hump.
struct PotentialSpec {
    Units units;
    double lambda0 = 0.675; // operating point of the control parameter
    double g = 1.5042;      // linear tilt strength
    WellFamily family;

    // Defaults to the built-in pre-calibrated family (default_well_family).
    PotentialSpec();

    bool in_domain(double lam) const { return family.contains(lam); }
    void require_domain(double lam) const {
        if (!in_domain(lam))
            throw bjj::domain_error("lambda = " + std::to_string(lam) +
                                    " outside well-family domain [" +
                                    std::to_string(family.lambda_min()) + ", " +
                                    std::to_string(family.lambda_max()) + "]");
    }

    double d_of(double lam) const { require_domain(lam); return family.d(lam); }
    double barrier_of(double lam) const { require_domain(lam); return family.barrier(lam); }
    double c2_of(double lam) const {
        const double a = d_of(lam) / 2.0;
        return barrier_of(lam) / (a * a * a * a);
    }
};

// Harmonic drive of the control parameter, lambda(t) = lambda0 + lambda1*sin(omega t).
// Variants freeze one of the induced two-mode parameters at its static value.
enum class DriveVariant { Full, ConstantOmega, ConstantDeltaE };

struct DriveSpec {
    double lambda1 = 0.0; // modulation amplitude (>= 0)
    double omega = 1.0;   // drive angular frequency, units of the energy unit
    DriveVariant variant = DriveVariant::Full;
};

const char* to_string(DriveVariant v);
DriveVariant drive_variant_from_string(const std::string& s);

// V(x; lambda) with tilt.  Throws outside the tabulated lambda domain.
double evaluate_potential(const PotentialSpec& spec, double lambda, double x);

// dV/dg = x identically; provided for property tests and sensitivity work.
inline double potential_tilt_derivative(double x) { return x; }

// lambda(t) for a drive around spec.lambda0.  Validates that the full swing
// lambda0 +- lambda1 stays inside the family domain (touching the boundary is
// accepted; exceeding it is an error -- amplitudes are never clamped).
double lambda_schedule(const PotentialSpec& spec, const DriveSpec& drive, double t);
void validate_drive(const PotentialSpec& spec, const DriveSpec& drive);

// Location of the barrier maximum of V(.; lambda) between the two minima,
// found on the interior of (-d/2, d/2).  Throws bjj::domain_error when the
// tilt has swallowed the barrier (merged wells).
double barrier_position(const PotentialSpec& spec, double lambda);

// Built-in well family knots (design described in README): near-linear d(lambda),
// geometric-ramp barrier(lambda) over lambda in [0.40, 1.00].
WellFamily default_well_family();

struct CalibrationTargets {
    double lambda0 = 0.675;
    double g = 1.5042;
    double delta_e0 = 2.408; // |two-mode bias| at lambda0, energy units
    double omega0 = 0.15;    // two-mode coupling at lambda0, energy units
};

// Rescale the (given or default) well family so the extracted two-mode
// parameters hit the targets: |DeltaE(lambda0, g)| within 1%, Omega(lambda0)
// within 5%.  Throws calibration_error with residuals when unreachable.
PotentialSpec calibrate_default(const CalibrationTargets& targets = {},
                                std::optional<WellFamily> base = std::nullopt);

// FNV-1a hash over the calibrated tables + operating point; recorded in scan
// metadata so outputs are traceable to the exact calibration that made them.
std::string calibration_hash(const PotentialSpec& spec);

} // namespace bjj
