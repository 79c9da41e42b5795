#include "bjj/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bjj/errors.hpp"
#include "bjj/interp.hpp"
#include "bjj/relax.hpp"

namespace bjj {

namespace {

// V(x_i; lambda) for all grid points with the family tables evaluated once
// per call rather than once per point (the per-step hot path of the
// propagator).
void fill_potential(const PotentialSpec& spec, double lambda,
                    const std::vector<double>& xs, std::vector<double>& v) {
    const double a = 0.5 * spec.d_of(lambda);
    const double c2 = spec.barrier_of(lambda) / (a * a * a * a);
    const double g = spec.g;
    const double a2 = a * a;
    v.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double q = xs[i] * xs[i] - a2;
        v[i] = c2 * q * q + g * xs[i];
    }
}

// integral of |psi|^2 over x < cut (trapezoid cells, the straddling cell
// split by linear interpolation of the density)
double density_left_of(const Grid& grid, const std::vector<std::complex<double>>& psi,
                       double cut) {
    const double h = grid.h();
    double acc = 0.0;
    for (int i = 0; i + 1 < grid.n_points; ++i) {
        const double xa = grid.x(i);
        const double xb = grid.x(i + 1);
        const double ra = std::norm(psi[i]);
        const double rb = std::norm(psi[i + 1]);
        if (xb <= cut) {
            acc += 0.5 * (ra + rb) * h;
        } else if (xa < cut) {
            const double s = cut - xa;
            const double rc = ra + (rb - ra) * (s / h);
            acc += 0.5 * (ra + rc) * s;
            break;
        } else {
            break;
        }
    }
    return acc;
}

double imbalance_at_cut(const Grid& grid, const std::vector<std::complex<double>>& psi,
                        double cut, double tilt_g) {
    double total = 0.0;
    const double h = grid.h();
    for (int i = 0; i < grid.n_points; ++i) {
        const double w = (i == 0 || i == grid.n_points - 1) ? 0.5 : 1.0;
        total += w * std::norm(psi[i]) * h;
    }
    const double left = density_left_of(grid, psi, cut);
    const double right = total - left;
    // positive tilt lowers negative x, so "lower well" = left for g >= 0
    const double sign = tilt_g >= 0.0 ? 1.0 : -1.0;
    return 0.5 * sign * (left - right) / total;
}

} // namespace

GPField gp_ground_state_tilted(const Grid& grid, const PotentialSpec& spec,
                               double lambda, double u0n, double residual_tol,
                               KineticScheme scheme) {
    spec.require_domain(lambda);
    grid.validate();
    const int n = grid.n_points;
    const std::vector<double> xs = grid.xs();
    std::vector<double> v;
    fill_potential(spec, lambda, xs, v);

    // starting guess: Gaussian of the local harmonic width, centered in the
    // tilt-lowered well
    const double a = 0.5 * spec.d_of(lambda);
    const double c2 = spec.c2_of(lambda);
    const double omega_well = std::sqrt(8.0 * c2 * a * a);
    const double sigma = 1.0 / std::sqrt(std::max(omega_well, 1e-6));
    const double x_c = spec.g >= 0.0 ? -a : a;
    std::vector<double> guess(n);
    for (int i = 0; i < n; ++i) {
        const double d = xs[i] - x_c;
        guess[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    }

    SplitStepEngine eng(grid, scheme);
    GroundRelaxation sol =
        relax_lowest(eng, v, u0n, guess, nullptr, residual_tol, "gp_ground_state_tilted");

    GPField out;
    out.grid = grid;
    out.u0n = u0n;
    out.t = 0.0;
    out.psi.resize(n);
    for (int i = 0; i < n; ++i) out.psi[i] = sol.phi[i];
    return out;
}

double imbalance(const GPField& field, const PotentialSpec& spec, double lambda) {
    if (field.psi.size() != std::size_t(field.grid.n_points))
        throw domain_error("imbalance: field size does not match its grid");
    if (!(field.norm_squared() > 0.0)) throw domain_error("imbalance: zero-norm field");
    const double cut = barrier_position(spec, lambda); // throws if wells merged
    return imbalance_at_cut(field.grid, field.psi, cut, spec.g);
}

TrajectoryRecord propagate_gp(const GPField& field0, const PotentialSpec& spec,
                              const DriveSpec& drive, double t_final, double dt,
                              int n_records, KineticScheme scheme,
                              GPField* final_field) {
    field0.grid.validate();
    if (field0.psi.size() != std::size_t(field0.grid.n_points))
        throw domain_error("propagate_gp: field size does not match its grid");
    if (!(t_final >= 0.0)) throw domain_error("propagate_gp: t_final must be >= 0");
    if (!(dt > 0.0)) throw domain_error("propagate_gp: dt must be > 0");
    validate_drive(spec, drive);
    if (n_records < 2) n_records = 2;

    const double ns0 = field0.norm_squared();
    if (!(ns0 > 0.0)) throw domain_error("propagate_gp: zero-norm field");

    SplitStepEngine eng(field0.grid, scheme);
    const double e_kmax = eng.max_kinetic_eigenvalue();
    if (dt * e_kmax > 0.1 * (1.0 + 1e-9))
        throw domain_error("propagate_gp: dt = " + std::to_string(dt) +
                           " violates dt * max_kinetic_eigenvalue <= 0.1 (limit " +
                           std::to_string(0.1 / e_kmax) + ")");

    // barrier position over the swing, tabulated once: it depends on lambda
    // alone and the root-find is far too slow for the per-record path
    MonotoneCubic cut_table;
    double cut_static = 0.0;
    if (drive.lambda1 > 0.0) {
        const int nk = 33;
        std::vector<double> lams(nk), cuts(nk);
        for (int j = 0; j < nk; ++j) {
            lams[j] = spec.lambda0 - drive.lambda1 +
                      2.0 * drive.lambda1 * j / double(nk - 1);
            cuts[j] = barrier_position(spec, lams[j]);
        }
        cut_table = MonotoneCubic(std::move(lams), std::move(cuts), "barrier_cut");
    } else {
        cut_static = barrier_position(spec, spec.lambda0);
    }
    auto cut_at = [&](double lam) {
        return drive.lambda1 > 0.0 ? cut_table(lam) : cut_static;
    };
    auto lambda_at = [&](double t) {
        return drive.lambda1 > 0.0 ? spec.lambda0 + drive.lambda1 * std::sin(drive.omega * t)
                                   : spec.lambda0;
    };

    const std::vector<double> xs = field0.grid.xs();
    std::vector<double> v;
    std::vector<std::complex<double>> psi = field0.psi;
    eng.load(psi);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    TrajectoryRecord rec;
    rec.n_atoms = 1;

    double integral = 0.0;
    auto record_point = [&](double t) {
        eng.store(psi);
        double ns = 0.0;
        for (const auto& p : psi) ns += std::norm(p);
        ns *= field0.grid.h();
        if (std::abs(ns / ns0 - 1.0) > 2.0e-6)
            throw numerical_error("propagate_gp: norm drift " +
                                  std::to_string(std::abs(std::sqrt(ns / ns0) - 1.0)) +
                                  " exceeds 1e-6 at t = " + std::to_string(t));
        const double z = imbalance_at_cut(field0.grid, psi, cut_at(lambda_at(t)), spec.g);
        if (!rec.times.empty())
            integral += 0.5 * (z + rec.jz_mean.back()) * (t - rec.times.back());
        rec.times.push_back(t);
        rec.jz_mean.push_back(z);
        rec.jz_var.push_back(nan);
        rec.frag.push_back(nan);
        rec.jz_timeavg_running.push_back(t > 0.0 ? integral / t : z);
    };

    record_point(0.0);
    if (t_final > 0.0) {
        const long n_steps = std::max(1L, std::lround(std::ceil(t_final / dt - 1.0e-12)));
        const double dt_act = t_final / double(n_steps);
        eng.set_real_timestep(dt_act);

        long next_record_idx = 1;
        long next_record_step =
            std::max(1L, (n_steps + (n_records - 1) / 2) / (n_records - 1));

        for (long step = 0; step < n_steps; ++step) {
            const double t_mid = dt_act * (double(step) + 0.5);
            fill_potential(spec, lambda_at(t_mid), xs, v);
            eng.step(v, field0.u0n);

            if (step + 1 == next_record_step || step + 1 == n_steps) {
                const double t_now =
                    (step + 1 == n_steps) ? t_final : dt_act * double(step + 1);
                record_point(t_now);
                while (next_record_step <= step + 1 && next_record_idx < n_records - 1) {
                    ++next_record_idx;
                    next_record_step = (next_record_idx * n_steps + (n_records - 1) / 2) /
                                       (n_records - 1);
                }
                if (next_record_step <= step + 1) next_record_step = n_steps;
            }
        }
    }

    if (final_field) {
        final_field->grid = field0.grid;
        final_field->u0n = field0.u0n;
        final_field->t = field0.t + t_final;
        eng.store(final_field->psi);
    }
    return rec;
}

double gp_default_timestep(const Grid& grid, KineticScheme scheme) {
    SplitStepEngine eng(grid, scheme);
    return 0.1 / eng.max_kinetic_eigenvalue();
}

} // namespace bjj
