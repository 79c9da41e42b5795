#include "bjj/twomode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bjj/errors.hpp"
#include "bjj/tridiag.hpp"

namespace bjj {

namespace {

// Gauss-Legendre points of the step interval, and the exponent weights of
// the fourth-order commutator-free scheme.  Each substep exponentiates a
// blend of the Hamiltonian sampled at the two Gauss points; the factor
// applied first leans on the earlier sample, the one applied last on the
// later sample, which is what restores fourth order for a time-ordered
// propagator (either factor alone is only second order).
const double kSqrt3Over6 = std::sqrt(3.0) / 6.0;
const double kGaussEarly = 0.5 - kSqrt3Over6;
const double kGaussLate = 0.5 + kSqrt3Over6;
const double kWeightSmall = 0.25 - kSqrt3Over6; // negative, ~ -0.0387
const double kWeightLarge = 0.25 + kSqrt3Over6; //            ~ +0.5387

// Hard cap on the Taylor series for exp(-iG); with the dt rule enforced the
// series converges in ~12 terms, so hitting the cap means the caller broke
// the step-size contract badly.
constexpr int kMaxExpTerms = 40;

struct StepWork {
    std::vector<double> jx;     // sqrt((k+1)(N-k)), k = 0..N-1
    std::vector<double> gdiag;  // blended generator, diagonal
    std::vector<double> goff;   // blended generator, off-diagonal
    std::vector<double> pr, pi; // psi
    std::vector<double> tr, ti; // current series term
    std::vector<double> ur, ui; // G * term scratch

    explicit StepWork(int n_atoms) {
        const int dim = n_atoms + 1;
        jx.resize(n_atoms >= 1 ? n_atoms : 0);
        for (int k = 0; k + 1 <= n_atoms; ++k)
            jx[k] = std::sqrt(double(k + 1) * double(n_atoms - k));
        gdiag.assign(dim, 0.0);
        goff.assign(std::max(dim - 1, 0), 0.0);
        pr.assign(dim, 0.0);
        pi.assign(dim, 0.0);
        tr.assign(dim, 0.0);
        ti.assign(dim, 0.0);
        ur.assign(dim, 0.0);
        ui.assign(dim, 0.0);
    }
};

// y = A x for the real symmetric tridiagonal A = (diag, off).
inline void tridiag_apply(const std::vector<double>& diag,
                          const std::vector<double>& off,
                          const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = diag.size();
    if (n == 1) {
        y[0] = diag[0] * x[0];
        return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t k = 1; k + 1 < n; ++k)
        y[k] = off[k - 1] * x[k - 1] + diag[k] * x[k] + off[k] * x[k + 1];
    y[n - 1] = off[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

// Fills the blended generator G = dt * (w1 H(params1) + w2 H(params2)),
// where both Hamiltonians share n_atoms and kappa.
void build_generator(StepWork& w, int n_atoms, double kappa, double dt,
                     double w1, double omega1, double de1,
                     double w2, double omega2, double de2) {
    const double om = w1 * omega1 + w2 * omega2;
    const double de = w1 * de1 + w2 * de2;
    const double kap = (w1 + w2) * kappa;
    const double half_n = 0.5 * n_atoms;
    for (int k = 0; k <= n_atoms; ++k) {
        const double jz = k - half_n;
        w.gdiag[k] = dt * (de * jz + 2.0 * kap * jz * jz);
    }
    for (int k = 0; k + 1 <= n_atoms; ++k)
        w.goff[k] = dt * (-0.5 * om * w.jx[k]);
}

// psi <- exp(-i G) psi by the Taylor series, real/imaginary parts split so
// every product is a real tridiagonal matvec.  Converges to machine
// precision because ||G|| is kept small by the step-size rule.
void apply_exponential(StepWork& w) {
    const std::size_t dim = w.pr.size();
    double psi_ss = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        w.tr[k] = w.pr[k];
        w.ti[k] = w.pi[k];
        psi_ss += w.pr[k] * w.pr[k] + w.pi[k] * w.pi[k];
    }
    const double stop = psi_ss * 1.0e-32; // ||term|| <= 1e-16 ||psi||
    for (int j = 1; j <= kMaxExpTerms; ++j) {
        tridiag_apply(w.gdiag, w.goff, w.tr, w.ur);
        tridiag_apply(w.gdiag, w.goff, w.ti, w.ui);
        const double inv = 1.0 / j;
        double term_ss = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            // term <- (-i) G term / j
            const double nr = w.ui[k] * inv;
            const double ni = -w.ur[k] * inv;
            w.tr[k] = nr;
            w.ti[k] = ni;
            w.pr[k] += nr;
            w.pi[k] += ni;
            term_ss += nr * nr + ni * ni;
        }
        if (term_ss <= stop) return;
    }
    throw numerical_error(
        "time-step exponential series did not converge in " +
        std::to_string(kMaxExpTerms) +
        " terms; the step size violates dt * ||H|| <= 0.05");
}

double gershgorin_norm(const std::vector<double>& diag,
                       const std::vector<double>& off) {
    const std::size_t n = diag.size();
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double row = std::abs(diag[k]);
        if (k > 0) row += std::abs(off[k - 1]);
        if (k + 1 < n) row += std::abs(off[k]);
        best = std::max(best, row);
    }
    return best;
}

void check_system(const DrivenTMSystem& sys) {
    if (sys.n_atoms < 1) throw domain_error("two-mode system needs n_atoms >= 1");
    if (!(sys.drive.lambda1 >= 0.0))
        throw config_error("drive amplitude must be non-negative");
    if (sys.drive.lambda1 > 0.0 && !(sys.drive.omega > 0.0))
        throw config_error("drive frequency must be positive");
}

} // namespace

double DrivenTMSystem::lambda_at(double t) const {
    if (drive.lambda1 == 0.0) return lambda0;
    return lambda0 + drive.lambda1 * std::sin(drive.omega * t);
}

double DrivenTMSystem::omega_at(double t) const {
    if (drive.lambda1 == 0.0 || drive.variant == DriveVariant::ConstantOmega)
        return params0.omega;
    return tables.omega(lambda_at(t));
}

double DrivenTMSystem::delta_e_at(double t) const {
    if (drive.lambda1 == 0.0 || drive.variant == DriveVariant::ConstantDeltaE)
        return params0.delta_e;
    return tables.delta_e(lambda_at(t));
}

ParamTables build_param_tables(const PotentialSpec& spec, double lambda_lo,
                               double lambda_hi, double u0n, int n_atoms,
                               TMModel model, const Grid& grid, int n_fine,
                               int n_meanfield) {
    if (n_atoms < 1) throw domain_error("build_param_tables: n_atoms >= 1 required");
    if (!(lambda_hi > lambda_lo))
        throw domain_error("build_param_tables: need lambda_lo < lambda_hi");
    if (n_fine < 2) throw domain_error("build_param_tables: n_fine >= 2 required");
    spec.require_domain(lambda_lo);
    spec.require_domain(lambda_hi);

    const double u0 = u0n / n_atoms;

    // Fine abscissae; pin the midpoint exactly so a symmetric swing evaluates
    // the operating point on a knot rather than between two.
    std::vector<double> lambdas(n_fine);
    for (int i = 0; i < n_fine; ++i)
        lambdas[i] = lambda_lo + (lambda_hi - lambda_lo) * i / double(n_fine - 1);
    lambdas.front() = lambda_lo;
    lambdas.back() = lambda_hi;
    if (n_fine % 2 == 1) lambdas[(n_fine - 1) / 2] = 0.5 * (lambda_lo + lambda_hi);

    const std::vector<CurveRow> rows = parameter_curves(spec, lambdas, u0, n_atoms, grid);

    std::vector<double> omega_y(n_fine), delta_y(n_fine);
    for (int i = 0; i < n_fine; ++i) {
        omega_y[i] = rows[i].omega;
        delta_y[i] = rows[i].delta_e;
    }

    ParamTables out;
    out.model = model;

    // kappa is frozen at the operating point; use the table midpoint when the
    // range was not built around spec.lambda0 itself.
    const double lambda_k = (spec.lambda0 >= lambda_lo && spec.lambda0 <= lambda_hi)
                                ? spec.lambda0
                                : 0.5 * (lambda_lo + lambda_hi);

    if (model == TMModel::Standard) {
        const ModePair modes = lowest_two_states(grid, spec, lambda_k, spec.g);
        out.kappa = tm_parameters(modes, spec, lambda_k, spec.g, u0, n_atoms).kappa;
    } else {
        // Interaction-corrected curves: fine bare curves plus a coarsely
        // sampled mean-field delta.  The delta is measured against the bare
        // solution on the SAME coarse grid so discretization error cancels
        // inside the difference.
        if (n_meanfield < 2)
            throw domain_error("build_param_tables: n_meanfield >= 2 required");
        const Grid mf_grid = Grid::gp_default();
        std::vector<double> coarse(n_meanfield), d_omega(n_meanfield), d_delta(n_meanfield);
        for (int j = 0; j < n_meanfield; ++j) {
            double lam = lambda_lo + (lambda_hi - lambda_lo) * j / double(n_meanfield - 1);
            if (j == 0) lam = lambda_lo;
            if (j == n_meanfield - 1) lam = lambda_hi;
            coarse[j] = lam;
            const ModePair mf = mean_field_stationary_states(mf_grid, spec, lam, u0n);
            const TMParams imp = improved_tm_parameters(mf, spec, lam, spec.g, u0, n_atoms);
            const ModePair bare = lowest_two_states(mf_grid, spec, lam, spec.g);
            const TMParams std_c = tm_parameters(bare, spec, lam, spec.g, u0, n_atoms);
            d_omega[j] = imp.omega - std_c.omega;
            d_delta[j] = imp.delta_e - std_c.delta_e;
        }
        const MonotoneCubic omega_shift(coarse, d_omega, "tables.omega_shift");
        const MonotoneCubic delta_shift(coarse, d_delta, "tables.delta_e_shift");
        for (int i = 0; i < n_fine; ++i) {
            omega_y[i] += omega_shift(lambdas[i]);
            delta_y[i] += delta_shift(lambdas[i]);
        }
        const ModePair mf0 = mean_field_stationary_states(mf_grid, spec, lambda_k, u0n);
        out.kappa = improved_tm_parameters(mf0, spec, lambda_k, spec.g, u0, n_atoms).kappa;
    }

    out.omega = MonotoneCubic(lambdas, omega_y, "tables.omega");
    out.delta_e = MonotoneCubic(std::move(lambdas), delta_y, "tables.delta_e");
    return out;
}

DrivenTMSystem make_driven_tm_system(const PotentialSpec& spec, const DriveSpec& drive,
                                     double u0n, int n_atoms, TMModel model,
                                     const Grid& grid) {
    if (n_atoms < 1) throw domain_error("make_driven_tm_system: n_atoms >= 1 required");
    validate_drive(spec, drive);

    DrivenTMSystem sys;
    sys.n_atoms = n_atoms;
    sys.u0n = u0n;
    sys.lambda0 = spec.lambda0;
    sys.drive = drive;

    const double u0 = u0n / n_atoms;
    if (drive.lambda1 == 0.0) {
        // Static system: no tables, parameters fixed at the operating point.
        if (model == TMModel::Standard) {
            const ModePair modes = lowest_two_states(grid, spec, spec.lambda0, spec.g);
            sys.params0 = tm_parameters(modes, spec, spec.lambda0, spec.g, u0, n_atoms);
        } else {
            const ModePair mf =
                mean_field_stationary_states(Grid::gp_default(), spec, spec.lambda0, u0n);
            sys.params0 = improved_tm_parameters(mf, spec, spec.lambda0, spec.g, u0, n_atoms);
        }
        sys.tables.model = model;
        sys.tables.kappa = sys.params0.kappa;
        return sys;
    }

    sys.tables = build_param_tables(spec, spec.lambda0 - drive.lambda1,
                                    spec.lambda0 + drive.lambda1, u0n, n_atoms,
                                    model, grid);
    sys.params0.omega = sys.tables.omega(spec.lambda0);
    sys.params0.delta_e = sys.tables.delta_e(spec.lambda0);
    sys.params0.kappa = sys.tables.kappa;
    sys.params0.model = model;
    return sys;
}

DrivenTMSystem make_driven_tm_system(const PotentialSpec& spec, const DriveSpec& drive,
                                     double u0n, int n_atoms, ParamTables tables) {
    if (n_atoms < 1) throw domain_error("make_driven_tm_system: n_atoms >= 1 required");
    validate_drive(spec, drive);
    const double lo = spec.lambda0 - drive.lambda1;
    const double hi = spec.lambda0 + drive.lambda1;
    if (!tables.omega.contains(lo) || !tables.omega.contains(hi) ||
        !tables.delta_e.contains(lo) || !tables.delta_e.contains(hi))
        throw domain_error("make_driven_tm_system: supplied tables do not cover the drive swing");

    DrivenTMSystem sys;
    sys.n_atoms = n_atoms;
    sys.u0n = u0n;
    sys.lambda0 = spec.lambda0;
    sys.drive = drive;
    sys.params0.omega = tables.omega(spec.lambda0);
    sys.params0.delta_e = tables.delta_e(spec.lambda0);
    sys.params0.kappa = tables.kappa;
    sys.params0.model = tables.model;
    sys.tables = std::move(tables);
    return sys;
}

void build_hamiltonian(const DrivenTMSystem& sys, double t,
                       std::vector<double>& diag, std::vector<double>& off) {
    check_system(sys);
    const int n = sys.n_atoms;
    const double om = sys.omega_at(t);
    const double de = sys.delta_e_at(t);
    const double kap = sys.params0.kappa;
    diag.assign(n + 1, 0.0);
    off.assign(n, 0.0);
    const double half_n = 0.5 * n;
    for (int k = 0; k <= n; ++k) {
        const double jz = k - half_n;
        diag[k] = de * jz + 2.0 * kap * jz * jz;
    }
    for (int k = 0; k + 1 <= n; ++k)
        off[k] = -0.5 * om * std::sqrt(double(k + 1) * double(n - k));
}

SpinState prepare_initial_state(const DrivenTMSystem& sys, InitialStateMode mode) {
    check_system(sys);
    SpinState state;
    state.n_atoms = sys.n_atoms;
    state.amps.assign(sys.n_atoms + 1, std::complex<double>(0.0, 0.0));

    if (mode == InitialStateMode::AllLeftFock) {
        // every atom in the tilt-lowered well: the top Jz eigenstate
        state.amps.back() = 1.0;
        return state;
    }

    std::vector<double> diag, off;
    build_hamiltonian(sys, 0.0, diag, off);
    const TridiagPairs pairs = tridiag_lowest_eigenpairs(diag, off, 1);
    const std::vector<double>& vec = pairs.vectors.at(0);

    // fix the arbitrary eigenvector sign: make the largest component positive
    int imax = 0;
    for (int k = 1; k <= sys.n_atoms; ++k)
        if (std::abs(vec[k]) > std::abs(vec[imax])) imax = k;
    const double sign = vec[imax] < 0.0 ? -1.0 : 1.0;
    for (int k = 0; k <= sys.n_atoms; ++k) state.amps[k] = sign * vec[k];
    return state;
}

Observables observables(const SpinState& state) {
    const int n = state.n_atoms;
    if (n < 1 || state.amps.size() != std::size_t(n + 1))
        throw domain_error("observables: state size does not match n_atoms");
    const double ns = state.norm_squared();
    if (!(ns > 0.0)) throw domain_error("observables: zero-norm state");

    const double half_n = 0.5 * n;
    double jz = 0.0, jz2 = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double p = std::norm(state.amps[k]);
        const double z = k - half_n;
        jz += z * p;
        jz2 += z * z * p;
    }
    jz /= ns;
    jz2 /= ns;

    // inter-well one-body coherence <a_lower^dag a_upper>
    std::complex<double> coh(0.0, 0.0);
    for (int k = 0; k + 1 <= n; ++k)
        coh += std::sqrt(double(k + 1) * double(n - k)) *
               std::conj(state.amps[k + 1]) * state.amps[k];
    coh /= ns;

    Observables out;
    out.jz_mean = jz;
    out.jz_var = std::max(0.0, jz2 - jz * jz);
    // one-body density matrix eigenvalues are N/2 +- sqrt(<Jz>^2 + |coh|^2)
    out.frag = 2.0 * std::sqrt(jz * jz + std::norm(coh)) / n;
    return out;
}

TrajectoryRecord propagate(const DrivenTMSystem& sys, const SpinState& state0,
                           double t_final, double dt, int n_records) {
    check_system(sys);
    const int n = sys.n_atoms;
    if (state0.n_atoms != n || state0.amps.size() != std::size_t(n + 1))
        throw domain_error("propagate: initial state does not match the system size");
    if (!(t_final >= 0.0)) throw domain_error("propagate: t_final must be >= 0");
    if (!(dt > 0.0)) throw domain_error("propagate: dt must be > 0");
    if (n_records < 2) n_records = 2;

    const double ns0 = state0.norm_squared();
    if (!(ns0 > 0.0)) throw domain_error("propagate: zero-norm initial state");

    TrajectoryRecord rec;
    rec.n_atoms = n;

    StepWork w(n);
    for (int k = 0; k <= n; ++k) {
        w.pr[k] = state0.amps[k].real();
        w.pi[k] = state0.amps[k].imag();
    }

    SpinState snapshot;
    snapshot.n_atoms = n;
    snapshot.amps.resize(n + 1);

    double integral = 0.0; // running trapezoid of <Jz>/N over the record grid
    auto record_point = [&](double t) {
        for (int k = 0; k <= n; ++k)
            snapshot.amps[k] = std::complex<double>(w.pr[k], w.pi[k]);
        const double ns = snapshot.norm_squared();
        if (std::abs(ns / ns0 - 1.0) > 2.0e-6)
            throw numerical_error("propagate: norm drift " +
                                  std::to_string(std::abs(std::sqrt(ns / ns0) - 1.0)) +
                                  " exceeds 1e-6 at t = " + std::to_string(t));
        const Observables obs = observables(snapshot);
        const double v = obs.jz_mean / n;
        if (!rec.times.empty()) {
            const double t_prev = rec.times.back();
            const double v_prev = rec.jz_mean.back() / n;
            integral += 0.5 * (v + v_prev) * (t - t_prev);
        }
        rec.times.push_back(t);
        rec.jz_mean.push_back(obs.jz_mean);
        rec.jz_var.push_back(obs.jz_var);
        rec.frag.push_back(obs.frag);
        rec.jz_timeavg_running.push_back(t > 0.0 ? integral / t : v);
    };

    record_point(0.0);
    if (t_final == 0.0) {
        rec.final_state = snapshot;
        return rec;
    }

    const long n_steps = std::max(1L, std::lround(std::ceil(t_final / dt - 1.0e-12)));
    const double dt_act = t_final / double(n_steps);
    const double kappa = sys.params0.kappa;

    long next_record_idx = 1;
    long next_record_step =
        std::max(1L, (1L * n_steps + (n_records - 1) / 2) / (n_records - 1));

    for (long step = 0; step < n_steps; ++step) {
        const double t = dt_act * double(step);
        const double t1 = t + kGaussEarly * dt_act;
        const double t2 = t + kGaussLate * dt_act;
        const double om1 = sys.omega_at(t1), de1 = sys.delta_e_at(t1);
        const double om2 = sys.omega_at(t2), de2 = sys.delta_e_at(t2);

        // first factor leans on the earlier Gauss point...
        build_generator(w, n, kappa, dt_act, kWeightLarge, om1, de1, kWeightSmall, om2, de2);
        apply_exponential(w);
        // ...the second on the later one
        build_generator(w, n, kappa, dt_act, kWeightSmall, om1, de1, kWeightLarge, om2, de2);
        apply_exponential(w);

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
    rec.final_state = snapshot;
    return rec;
}

double default_timestep(const DrivenTMSystem& sys) {
    check_system(sys);
    std::vector<double> diag, off;
    double hnorm = 0.0;
    // sample the swing extremes and the operating point: lambda(t) hits
    // lambda0 at t = 0 and lambda0 +- lambda1 a quarter period later
    std::vector<double> ts = {0.0};
    if (sys.drive.lambda1 > 0.0) {
        const double quarter = 0.5 * M_PI / sys.drive.omega;
        ts.push_back(quarter);
        ts.push_back(3.0 * quarter);
    }
    for (double t : ts) {
        build_hamiltonian(sys, t, diag, off);
        hnorm = std::max(hnorm, gershgorin_norm(diag, off));
    }
    double rate = hnorm;
    if (sys.drive.lambda1 > 0.0) rate = std::max(rate, sys.drive.omega);
    rate = std::max(rate, 1.0e-12);
    return 0.05 / rate;
}

double time_averaged_imbalance(const TrajectoryRecord& record, double t_avg) {
    if (record.times.size() < 1 || record.n_atoms < 1)
        throw domain_error("time_averaged_imbalance: empty record");
    const double t_end = record.times.back();
    if (!(t_avg >= 0.0))
        throw domain_error("time_averaged_imbalance: window must be >= 0");
    if (t_avg > t_end * (1.0 + 1.0e-12) + 1.0e-12)
        throw domain_error("time_averaged_imbalance: window " + std::to_string(t_avg) +
                           " exceeds the recorded span " + std::to_string(t_end));
    const double n = record.n_atoms;
    if (t_avg == 0.0 || record.times.size() == 1) return record.jz_mean.front() / n;

    const double T = std::min(t_avg, t_end);
    double integral = 0.0;
    for (std::size_t i = 1; i < record.times.size(); ++i) {
        const double ta = record.times[i - 1], tb = record.times[i];
        const double va = record.jz_mean[i - 1] / n, vb = record.jz_mean[i] / n;
        if (tb <= T) {
            integral += 0.5 * (va + vb) * (tb - ta);
            if (tb == T) break;
        } else {
            // partial segment: linear interpolation up to T
            const double f = (T - ta) / (tb - ta);
            const double vT = va + f * (vb - va);
            integral += 0.5 * (va + vT) * (T - ta);
            break;
        }
    }
    return integral / T;
}

} // namespace bjj
