#include "bjj/spectral.hpp"
#include "bjj/errors.hpp"
#include "bjj/relax.hpp"
#include "bjj/splitstep.hpp"
#include "bjj/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace bjj {
namespace {

// symmetric part of the well: quartic double well without the tilt
std::vector<double> symmetric_well(const Grid& grid, const PotentialSpec& spec,
                                   double lambda) {
    const double a = 0.5 * spec.d_of(lambda);
    const double c2 = spec.c2_of(lambda);
    std::vector<double> v(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = grid.x(i);
        const double q = x * x - a * a;
        v[i] = c2 * q * q;
    }
    return v;
}

double trapz_weighted(const std::vector<double>& a, const std::vector<double>& b,
                      double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * h;
}

// one-body Hamiltonian apply: three-point kinetic stencil plus local potential
std::vector<double> apply_h(const std::vector<double>& v_local,
                            const std::vector<double>& phi, double h) {
    const std::size_t n = phi.size();
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? phi[i - 1] : 0.0;
        const double right = i + 1 < n ? phi[i + 1] : 0.0;
        out[i] = -0.5 * inv_h2 * (left - 2.0 * phi[i] + right) + v_local[i] * phi[i];
    }
    return out;
}

// the parity fold needs a grid that is mirror-symmetric about x = 0 with an
// even point count (no sample on the mirror line)
bool foldable(const Grid& grid) {
    return grid.n_points % 2 == 0 &&
           std::abs(grid.x_min + grid.x_max) < 1e-12 * (grid.x_max - grid.x_min);
}

double centroid(const Grid& grid, const std::vector<double>& phi) {
    double s = 0.0;
    for (int i = 0; i < grid.n_points; ++i) s += grid.x(i) * phi[i] * phi[i];
    return s * grid.h();
}

// Assemble a ModePair from a solved doublet: normalize to unit L2 norm with
// grid weight h, pin the sign conventions, build localized combinations, and
// judge the two-mode truncation.
ModePair assemble_modes(const Grid& grid, std::vector<double> phi_g,
                        std::vector<double> phi_e, double e_g, double e_e,
                        double e_next, double tilt_sign,
                        ModeProvenance provenance) {
    const int n = grid.n_points;
    const double rs = 1.0 / std::sqrt(grid.h());
    double mean_g = 0.0;
    for (double p : phi_g) mean_g += p;
    if (mean_g < 0.0)
        for (double& p : phi_g) p = -p;
    for (double& p : phi_g) p *= rs;
    for (double& p : phi_e) p *= rs;

    ModePair m;
    m.grid = grid;
    m.e_g = e_g;
    m.e_e = e_e;
    m.e_next = e_next;
    m.provenance = provenance;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<double> lower(n), upper(n);
    for (int i = 0; i < n; ++i) {
        lower[i] = inv_sqrt2 * (phi_g[i] + phi_e[i]);
        upper[i] = inv_sqrt2 * (phi_g[i] - phi_e[i]);
    }
    // phi_lower must sit on the side the tilt lowers: negative centroid for
    // tilt_sign > 0.  Flip the excited mode's arbitrary sign if needed.
    if (tilt_sign * centroid(grid, lower) > 0.0) {
        for (int i = 0; i < n; ++i) {
            phi_e[i] = -phi_e[i];
            std::swap(lower[i], upper[i]);
        }
    }
    m.phi_g = std::move(phi_g);
    m.phi_e = std::move(phi_e);
    m.phi_lower = std::move(lower);
    m.phi_upper = std::move(upper);
    m.two_mode_warning = (e_next - e_e) < 10.0 * (e_e - e_g);
    return m;
}

// General (no-symmetry) path: one tridiagonal problem on the full grid.
ModePair solve_single_particle(const Grid& grid, const std::vector<double>& v,
                               double tilt_sign) {
    grid.validate();
    const int n = grid.n_points;
    const double h = grid.h();
    std::vector<double> diag(n), off(n - 1, -0.5 / (h * h));
    for (int i = 0; i < n; ++i) diag[i] = 1.0 / (h * h) + v[i];
    TridiagPairs pairs = tridiag_lowest_eigenpairs(diag, off, 3);
    return assemble_modes(grid, std::move(pairs.vectors[0]), std::move(pairs.vectors[1]),
                          pairs.values[0], pairs.values[1], pairs.values[2],
                          tilt_sign, ModeProvenance::SingleParticle);
}

// Mirror-symmetric path: fold the problem into even/odd parity sectors on the
// half grid.  Parity is then exact by construction, which matters deep in the
// domain where the doublet splitting drops below the eigenvector accuracy of
// the unfolded problem — there, parity contamination of order
// (solver residual / splitting) would otherwise corrupt the coupling
// integrals through the tilt term.
ModePair solve_symmetric_doublet(const Grid& grid, const std::vector<double>& v_half,
                                 double tilt_sign) {
    grid.validate();
    const int n = grid.n_points;
    const int m = n / 2;
    const double h = grid.h();
    const double off_val = -0.5 / (h * h);
    std::vector<double> off(m - 1, off_val);
    std::vector<double> diag(m);
    for (int i = 0; i < m; ++i) diag[i] = 1.0 / (h * h) + v_half[i];

    // even sector: psi(m) = psi(m-1) across the mirror line
    std::vector<double> diag_even = diag;
    diag_even[m - 1] += off_val;
    TridiagPairs even = tridiag_lowest_eigenpairs(diag_even, off, 2);
    // odd sector: psi(m) = -psi(m-1)
    std::vector<double> diag_odd = diag;
    diag_odd[m - 1] -= off_val;
    TridiagPairs odd = tridiag_lowest_eigenpairs(diag_odd, off, 2);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<double> phi_g(n), phi_e(n);
    for (int i = 0; i < m; ++i) {
        phi_g[i] = even.vectors[0][i] * inv_sqrt2;
        phi_g[n - 1 - i] = phi_g[i];
        phi_e[i] = odd.vectors[0][i] * inv_sqrt2;
        phi_e[n - 1 - i] = -phi_e[i];
    }
    const double e_next = std::min(even.values[1], odd.values[1]);
    return assemble_modes(grid, std::move(phi_g), std::move(phi_e), even.values[0],
                          odd.values[0], e_next, tilt_sign,
                          ModeProvenance::SingleParticle);
}

} // namespace

const char* to_string(TMModel model) {
    return model == TMModel::Standard ? "standard" : "improved";
}

ModePair lowest_two_states(const Grid& grid, const PotentialSpec& spec,
                           double lambda, double g) {
    spec.require_domain(lambda);
    const double tilt_sign = g >= 0.0 ? 1.0 : -1.0;
    if (foldable(grid)) {
        const double a = 0.5 * spec.d_of(lambda);
        const double c2 = spec.c2_of(lambda);
        std::vector<double> v_half(grid.n_points / 2);
        for (int i = 0; i < grid.n_points / 2; ++i) {
            const double x = grid.x(i);
            const double q = x * x - a * a;
            v_half[i] = c2 * q * q;
        }
        return solve_symmetric_doublet(grid, v_half, tilt_sign);
    }
    const std::vector<double> v = symmetric_well(grid, spec, lambda);
    return solve_single_particle(grid, v, tilt_sign);
}

ModePair lowest_two_states_of(const Grid& grid,
                              const std::function<double(double)>& v,
                              double tilt_sign) {
    const int n = grid.n_points;
    std::vector<double> vs(n);
    double vmax = 0.0;
    for (int i = 0; i < n; ++i) {
        vs[i] = v(grid.x(i));
        vmax = std::max(vmax, std::abs(vs[i]));
    }
    if (foldable(grid)) {
        double dev = 0.0;
        for (int i = 0; i < n / 2; ++i) dev = std::max(dev, std::abs(vs[i] - vs[n - 1 - i]));
        if (dev <= 1e-9 * (1.0 + vmax)) {
            std::vector<double> v_half(n / 2);
            for (int i = 0; i < n / 2; ++i) v_half[i] = 0.5 * (vs[i] + vs[n - 1 - i]);
            return solve_symmetric_doublet(grid, v_half, tilt_sign);
        }
    }
    return solve_single_particle(grid, vs, tilt_sign);
}

TMParams tm_parameters(const ModePair& modes, const PotentialSpec& spec,
                       double lambda, double g, double u0, int n_atoms) {
    (void)n_atoms;
    const Grid& grid = modes.grid;
    const double h = grid.h();
    std::vector<double> v = symmetric_well(grid, spec, lambda);
    for (int i = 0; i < grid.n_points; ++i) v[i] += g * grid.x(i);

    const std::vector<double> h_lower = apply_h(v, modes.phi_lower, h);
    const std::vector<double> h_upper = apply_h(v, modes.phi_upper, h);

    TMParams p;
    p.omega = -(trapz_weighted(modes.phi_lower, h_upper, h) +
                trapz_weighted(modes.phi_upper, h_lower, h));
    p.delta_e = trapz_weighted(modes.phi_lower, h_lower, h) -
                trapz_weighted(modes.phi_upper, h_upper, h);
    double quart = 0.0;
    for (double q : modes.phi_lower) quart += q * q * q * q;
    p.kappa = 0.5 * u0 * quart * h;
    p.model = TMModel::Standard;
    return p;
}

ModePair mean_field_stationary_states(const Grid& grid, const PotentialSpec& spec,
                                      double lambda, double u0n,
                                      double residual_tol, KineticScheme scheme) {
    spec.require_domain(lambda);
    grid.validate();
    const int n = grid.n_points;
    const std::vector<double> v = symmetric_well(grid, spec, lambda);

    const double a = 0.5 * spec.d_of(lambda);
    const double c2 = spec.c2_of(lambda);
    const double omega_well = std::sqrt(8.0 * c2 * a * a);
    const double sigma = 1.0 / std::sqrt(std::max(omega_well, 1e-6));

    std::vector<double> even0(n), odd0(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const double gl = std::exp(-0.5 * (x + a) * (x + a) / (sigma * sigma));
        const double gr = std::exp(-0.5 * (x - a) * (x - a) / (sigma * sigma));
        even0[i] = gl + gr;
        odd0[i] = gl - gr;
    }

    SplitStepEngine eng(grid, scheme);
    GroundRelaxation ground = relax_lowest(eng, v, u0n, even0, nullptr,
                                          residual_tol, "mean_field_stationary_states");
    GroundRelaxation excited = relax_lowest(eng, v, u0n, odd0, &ground.phi,
                                           residual_tol, "mean_field_stationary_states");

    // heuristic truncation check from the bare well on the same grid
    std::vector<double> diag(n), off(n - 1, -0.5 / (grid.h() * grid.h()));
    for (int i = 0; i < n; ++i) diag[i] = 1.0 / (grid.h() * grid.h()) + v[i];
    TridiagPairs sp = tridiag_lowest_eigenpairs(diag, off, 3);

    // assemble_modes re-applies the 1/sqrt(h) normalization, so hand it the
    // Euclidean-normalized vectors
    const double s = std::sqrt(grid.h());
    std::vector<double> pg(n), pe(n);
    for (int i = 0; i < n; ++i) { pg[i] = ground.phi[i] * s; pe[i] = excited.phi[i] * s; }
    ModePair m = assemble_modes(grid, std::move(pg), std::move(pe), ground.mu,
                                excited.mu, sp.values[2],
                                spec.g >= 0.0 ? 1.0 : -1.0, ModeProvenance::MeanField);
    m.two_mode_warning = (sp.values[2] - sp.values[1]) < 10.0 * (sp.values[1] - sp.values[0]);
    return m;
}

TMParams improved_tm_parameters(const ModePair& modes, const PotentialSpec& spec,
                                double lambda, double g, double u0, int n_atoms) {
    if (modes.provenance != ModeProvenance::MeanField)
        throw numerical_error("improved_tm_parameters: requires mean-field modes");
    const Grid& grid = modes.grid;
    const double h = grid.h();
    const double u0n = u0 * n_atoms;

    auto quart = [&](const std::vector<double>& p) {
        double s = 0.0;
        for (double q : p) s += q * q * q * q;
        return s * h;
    };

    TMParams p;
    p.omega = (modes.e_e - modes.e_g) - 0.5 * u0n * (quart(modes.phi_e) - quart(modes.phi_g));

    std::vector<double> v = symmetric_well(grid, spec, lambda);
    for (int i = 0; i < grid.n_points; ++i) v[i] += g * grid.x(i);
    const std::vector<double> h_lower = apply_h(v, modes.phi_lower, h);
    const std::vector<double> h_upper = apply_h(v, modes.phi_upper, h);
    p.delta_e = trapz_weighted(modes.phi_lower, h_lower, h) -
                trapz_weighted(modes.phi_upper, h_upper, h);
    p.kappa = 0.5 * u0 * quart(modes.phi_lower);
    p.model = TMModel::Improved;
    return p;
}

std::vector<CurveRow> parameter_curves(const PotentialSpec& spec,
                                       const std::vector<double>& lambdas,
                                       double u0, int n_atoms, const Grid& grid) {
    std::vector<CurveRow> rows;
    rows.reserve(lambdas.size());
    for (double lam : lambdas) {
        const ModePair m = lowest_two_states(grid, spec, lam, spec.g);
        const TMParams p = tm_parameters(m, spec, lam, spec.g, u0, n_atoms);
        CurveRow r;
        r.lambda = lam;
        r.omega = p.omega;
        r.delta_e = p.delta_e;
        r.kappa = p.kappa;
        r.two_mode_warning = m.two_mode_warning;
        rows.push_back(r);
    }
    return rows;
}

} // namespace bjj
