#pragma once
#include <vector>
#include "bjj/errors.hpp"

namespace bjj {

// Uniform 1-D spatial grid on [x_min, x_max].  Finite-difference operators
// treat the endpoints as hard-wall (Dirichlet) boundaries; spectral operators
// treat the interval as periodic.  Either way the box must be generous enough
// that the density at the edges is negligible.
struct Grid {
    double x_min = -3.5;
    double x_max = 3.5;
    int n_points = 512;

    Grid() = default;
    Grid(double a, double b, int n) : x_min(a), x_max(b), n_points(n) { validate(); }

    void validate() const {
        if (!(x_max > x_min)) throw config_error("grid: x_max must exceed x_min");
        if (n_points < 8) throw config_error("grid: too few points");
    }

    double h() const { return (x_max - x_min) / (n_points - 1); }
    double x(int i) const { return x_min + i * h(); }

    std::vector<double> xs() const {
        std::vector<double> v(n_points);
        for (int i = 0; i < n_points; ++i) v[i] = x(i);
        return v;
    }

    // default grid used to build two-mode parameter tables: fine enough that
    // the 3-point Laplacian eigenvalue error sits well below 1e-6 relative
    static Grid modes_default() { return Grid(-3.5, 3.5, 16384); }
    // default grid for mean-field propagation (spectral kinetic factor)
    static Grid gp_default() { return Grid(-3.5, 3.5, 256); }
};

} // namespace bjj
