#pragma once
#include <cmath>
#include "bjj/errors.hpp"

namespace bjj {

// Dimensionless unit system used throughout: lengths in micrometres, energies
// in units of hbar*omega_ho with omega_ho = 2*pi*energy_hz, times in units of
// 1/omega_ho expressed in milliseconds.  With hbar = 1 the time and angular
// energy units must be reciprocal.
struct Units {
    double length_um = 1.0;    // length unit in micrometres
    double energy_hz = 116.26; // energy unit as an ordinary frequency in Hz
    double time_ms   = 1.37;   // time unit in milliseconds

    // angular frequency of the energy unit, rad/s
    double energy_angular() const { return 2.0 * M_PI * energy_hz; }

    // time_unit * energy_unit(angular) must equal 1 (hbar = 1) within 0.5%.
    double consistency() const { return (time_ms * 1e-3) * energy_angular(); }

    void validate() const {
        if (!(length_um > 0.0) || !(energy_hz > 0.0) || !(time_ms > 0.0))
            throw config_error("units: all unit scales must be positive");
        const double c = consistency();
        if (std::abs(c - 1.0) > 5e-3)
            throw config_error("units: time_ms * 2*pi*energy_hz = " + std::to_string(c) +
                               ", inconsistent with hbar = 1 (tolerance 0.5%)");
    }
};

} // namespace bjj
