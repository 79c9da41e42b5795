#pragma once
#include <stdexcept>
#include <string>

namespace bjj {

// Bad or inconsistent user input (config file, CLI values, tables).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A solver failed to reach its contract (non-convergence, norm drift, ...).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry/parameter outside the region where an operation is defined
// (lambda outside the tabulated domain, merged wells, ...).
struct domain_error : std::domain_error {
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Calibration could not meet its targets; message carries the residuals.
struct calibration_error : numerical_error {
    explicit calibration_error(const std::string& what) : numerical_error(what) {}
};

} // namespace bjj
