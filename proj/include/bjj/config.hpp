#pragma once
#include <optional>
#include <string>

#include "bjj/potential.hpp"
#include "bjj/units.hpp"

namespace bjj {

// How a drive amplitude is chosen: either a literal lambda1, or a
// coefficient a with lambda1 = a * dE0 / omega, so that the induced bias
// modulation keeps a fixed depth b ~ a * dE0 across drive frequencies.
struct AmplitudeRule {
    bool fixed = true;  // false: value is the coefficient a
    double value = 0.0;

    double lambda1(double delta_e0, double omega) const {
        if (fixed) return value;
        if (!(omega > 0.0))
            throw config_error("amplitude rule: omega must be > 0");
        return value * delta_e0 / omega;
    }
};

// Everything the config file can say.  Scan/trajectory specifics (frequency
// grids, interaction strength, horizons) are CLI arguments; the file fixes
// the physical setup they all share.
struct AppConfig {
    Units units;
    double lambda0 = 0.675;
    double g = 1.5042;
    std::optional<WellFamily> family; // table override; default family if absent

    std::optional<double> drive_omega;
    std::optional<AmplitudeRule> amplitude;
    DriveVariant variant = DriveVariant::Full;

    // Assembled trap description (units validated, family defaulted).
    PotentialSpec potential_spec() const;
};

// Parses the key-value config format documented in the README:
// [units] length_um/energy_hz/time_ms; [potential] lambda0, g, and optional
// table arrays lambda/d/barrier (comma-separated, all three together);
// [drive] omega, lambda1 OR amplitude_coefficient, variant.  '#' and ';'
// start comments.  Unknown sections or keys are config_errors, never
// silently ignored.
AppConfig parse_config_text(const std::string& text);

// parse_config_text on a file's contents; missing file is a config_error.
AppConfig load_config_file(const std::string& path);

} // namespace bjj
