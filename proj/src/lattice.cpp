#include "bjj/lattice.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bjj/errors.hpp"

namespace bjj {

namespace {

// Gauss-Legendre points of the step interval and the exponent weights of the
// fourth-order commutator-free scheme; identical to the two-site propagator
// so that on two sites the schemes agree factor by factor.
const double kSqrt3Over6 = std::sqrt(3.0) / 6.0;
const double kGaussEarly = 0.5 - kSqrt3Over6;
const double kGaussLate = 0.5 + kSqrt3Over6;
const double kWeightSmall = 0.25 - kSqrt3Over6;
const double kWeightLarge = 0.25 + kSqrt3Over6;

constexpr int kMaxAtoms = 6;
constexpr int kMaxSites = 16;
constexpr std::size_t kDimCap = 50000;
constexpr int kKrylovMax = 48;       // Lanczos subspace cap per exponential
constexpr double kKrylovTol = 1e-13; // relative residual target per exponential
// Krylov step rules: defaults aim at dt*spread <= 30, propagation rejects
// dt*spread > 40 (where the subspace error bound stops being comfortable).
constexpr double kSpreadTarget = 30.0;
constexpr double kSpreadLimit = 40.0;

// binomial table up to C(22, k); plenty for N + M <= 22
struct Binomial {
    std::uint64_t c[23][23] = {};
    Binomial() {
        for (int a = 0; a <= 22; ++a) {
            c[a][0] = 1;
            for (int b = 1; b <= a; ++b)
                c[a][b] = c[a - 1][b - 1] + (b <= a - 1 ? c[a - 1][b] : 0);
        }
    }
    std::uint64_t operator()(int a, int b) const {
        if (b < 0 || b > a || a < 0) return 0;
        return c[a][b];
    }
};

std::uint64_t compositions(const Binomial& bin, int atoms, int sites) {
    // weak compositions of `atoms` over `sites` slots
    return bin(atoms + sites - 1, atoms);
}

// index of an occupation tuple under the descending-lex enumeration
std::size_t rank_of(const Binomial& bin, const std::uint8_t* occ, int m, int n) {
    std::size_t rank = 0;
    int rem = n;
    for (int i = 0; i + 1 < m; ++i) {
        // states whose site-i occupation exceeds occ[i] come first
        for (int v = rem; v > occ[i]; --v)
            rank += compositions(bin, rem - v, m - i - 1);
        rem -= occ[i];
    }
    return rank;
}

void check_system(const LatticeSystem& sys, const char* who) {
    if (sys.dim == 0 || sys.occupations.size() != sys.dim * std::size_t(sys.n_sites))
        throw domain_error(std::string(who) + ": system is not assembled");
}

void check_state(const LatticeSystem& sys, const LatticeState& state, const char* who) {
    check_system(sys, who);
    if (state.size() != sys.dim)
        throw domain_error(std::string(who) + ": state size does not match the Fock dimension");
}

double norm_squared(const LatticeState& x) {
    double s = 0.0;
    for (const auto& a : x) s += std::norm(a);
    return s;
}

// full diagonal at the given site potentials
void fill_diag_total(const LatticeSystem& sys, const std::vector<double>& site_v,
                     std::vector<double>& diag_total) {
    const int m = sys.n_sites;
    diag_total.resize(sys.dim);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        double d = sys.diag_static[s];
        for (int i = 0; i < m; ++i) d += double(row[i]) * site_v[i];
        diag_total[s] = d;
    }
}

// y = (hopping + diag_total) x
void apply_with_diag(const LatticeSystem& sys, const std::vector<double>& diag_total,
                     const LatticeState& x, LatticeState& y) {
    const std::size_t dim = sys.dim;
    y.resize(dim);
    for (std::size_t s = 0; s < dim; ++s) y[s] = diag_total[s] * x[s];
    for (std::size_t s = 0; s < dim; ++s) {
        const std::size_t k0 = sys.hop_row_start[s];
        const std::size_t k1 = sys.hop_row_start[s + 1];
        for (std::size_t k = k0; k < k1; ++k) {
            const std::uint32_t c = sys.hop_col[k];
            const double a = sys.hop_amp[k];
            y[s] += a * x[c];
            y[c] += a * x[s];
        }
    }
}

// Gershgorin bound on the spectral width of hopping + diag_total
double gershgorin_spread(const LatticeSystem& sys, const std::vector<double>& radius,
                         const std::vector<double>& diag_total) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < sys.dim; ++s) {
        lo = std::min(lo, diag_total[s] - radius[s]);
        hi = std::max(hi, diag_total[s] + radius[s]);
    }
    return hi - lo;
}

void fill_hop_radius(const LatticeSystem& sys, std::vector<double>& radius) {
    radius.assign(sys.dim, 0.0);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        for (std::size_t k = sys.hop_row_start[s]; k < sys.hop_row_start[s + 1]; ++k) {
            const double a = std::abs(sys.hop_amp[k]);
            radius[s] += a;
            radius[sys.hop_col[k]] += a;
        }
    }
}

// spectral-width bound of H over the drive swing (worst case over a few
// lambda samples; the diagonal is monotone enough in lambda that endpoint
// plus midpoint samples bracket it for every drive this library produces)
double spread_over_swing(const LatticeSystem& sys, const DriveSpec& drive) {
    std::vector<double> radius;
    fill_hop_radius(sys, radius);
    std::vector<double> lams = {sys.spec.lambda0};
    if (drive.lambda1 > 0.0) {
        for (double f : {-1.0, -0.5, 0.5, 1.0})
            lams.push_back(sys.spec.lambda0 + f * drive.lambda1);
    }
    double spread = 0.0;
    std::vector<double> diag_total;
    for (double lam : lams) {
        const std::vector<double> v = lattice_site_potentials(sys, lam);
        fill_diag_total(sys, v, diag_total);
        spread = std::max(spread, gershgorin_spread(sys, radius, diag_total));
    }
    return spread;
}

// Workspace for the Lanczos factorization and the small exponential so the
// propagation loop never reallocates.
struct KrylovWork {
    std::vector<LatticeState> basis; // kKrylovMax + 1 vectors
    std::vector<double> alpha, beta;
    LatticeState w;
    std::vector<double> diag_a, diag_b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small;
    std::vector<std::complex<double>> y;

    explicit KrylovWork(std::size_t dim) {
        const int m = int(std::min<std::size_t>(kKrylovMax, dim));
        basis.assign(m + 1, LatticeState(dim));
        alpha.resize(m);
        beta.resize(m);
        w.resize(dim);
        y.resize(m);
    }
};

struct LanczosFactorization {
    int m = 0;           // subspace dimension actually built
    double beta0 = 0.0;  // norm of the start vector
    double beta_res = 0.0; // coupling out of the subspace (0 on breakdown)
};

// Lanczos with full reorthogonalization from start vector psi.
LanczosFactorization lanczos_factorize(const LatticeSystem& sys,
                                       const std::vector<double>& diag_total,
                                       const LatticeState& psi, KrylovWork& wk) {
    const std::size_t dim = sys.dim;
    const int m_max = int(wk.alpha.size());

    LanczosFactorization fac;
    fac.beta0 = std::sqrt(norm_squared(psi));
    if (!(fac.beta0 > 0.0))
        throw domain_error("lattice propagation: zero-norm state");

    for (std::size_t s = 0; s < dim; ++s) wk.basis[0][s] = psi[s] / fac.beta0;

    double op_scale = 0.0;
    for (int j = 0; j < m_max; ++j) {
        apply_with_diag(sys, diag_total, wk.basis[j], wk.w);
        if (j > 0) {
            const double bprev = wk.beta[j - 1];
            for (std::size_t s = 0; s < dim; ++s) wk.w[s] -= bprev * wk.basis[j - 1][s];
        }
        double aj = 0.0;
        for (std::size_t s = 0; s < dim; ++s)
            aj += std::real(std::conj(wk.basis[j][s]) * wk.w[s]);
        wk.alpha[j] = aj;
        for (std::size_t s = 0; s < dim; ++s) wk.w[s] -= aj * wk.basis[j][s];

        // full reorthogonalization (also absorbs roundoff in alpha/beta)
        for (int i = 0; i <= j; ++i) {
            std::complex<double> c(0.0, 0.0);
            for (std::size_t s = 0; s < dim; ++s)
                c += std::conj(wk.basis[i][s]) * wk.w[s];
            for (std::size_t s = 0; s < dim; ++s) wk.w[s] -= c * wk.basis[i][s];
        }

        const double bj = std::sqrt(norm_squared(wk.w));
        wk.beta[j] = bj;
        op_scale = std::max(op_scale, std::abs(aj) + bj + (j > 0 ? wk.beta[j - 1] : 0.0));

        if (bj <= 1e-14 * std::max(op_scale, 1.0)) {
            // invariant subspace: the exponential below is exact
            fac.m = j + 1;
            fac.beta_res = 0.0;
            return fac;
        }
        for (std::size_t s = 0; s < dim; ++s) wk.basis[j + 1][s] = wk.w[s] / bj;
    }
    fac.m = m_max;
    fac.beta_res = wk.beta[m_max - 1];
    return fac;
}

// y = exp(-i tau T_m) (beta0 e1) for the current factorization
void small_exponential(KrylovWork& wk, const LanczosFactorization& fac, double tau) {
    const int m = fac.m;
    Eigen::Map<const Eigen::VectorXd> a(wk.alpha.data(), m);
    Eigen::VectorXd b(std::max(m - 1, 0));
    for (int j = 0; j + 1 < m; ++j) b[j] = wk.beta[j];
    wk.small.computeFromTridiagonal(a, b, Eigen::ComputeEigenvectors);
    if (wk.small.info() != Eigen::Success)
        throw numerical_error("lattice propagation: small tridiagonal eigensolve failed");

    const Eigen::MatrixXd& u = wk.small.eigenvectors();
    const Eigen::VectorXd& theta = wk.small.eigenvalues();
    for (int j = 0; j < m; ++j) wk.y[j] = std::complex<double>(0.0, 0.0);
    for (int k = 0; k < m; ++k) {
        const double ang = -tau * theta[k];
        const std::complex<double> coef =
            (fac.beta0 * u(0, k)) * std::complex<double>(std::cos(ang), std::sin(ang));
        for (int j = 0; j < m; ++j) wk.y[j] += u(j, k) * coef;
    }
}

// psi <- exp(-i tau (hopping + diag_total)) psi, adaptively substepped until
// the subspace residual estimate clears kKrylovTol.
void krylov_exp(const LatticeSystem& sys, const std::vector<double>& diag_total,
                double tau, LatticeState& psi, KrylovWork& wk) {
    if (tau == 0.0) return;
    double remaining = tau;
    while (remaining != 0.0) {
        const LanczosFactorization fac = lanczos_factorize(sys, diag_total, psi, wk);
        double attempt = remaining;
        for (;;) {
            small_exponential(wk, fac, attempt);
            const double est =
                fac.beta_res * std::abs(wk.y[fac.m - 1]) / fac.beta0;
            if (est <= kKrylovTol) break;
            attempt *= 0.5;
            if (std::abs(attempt) < 1e-9 * std::abs(tau))
                throw numerical_error(
                    "lattice propagation: Krylov exponential failed to converge "
                    "(step far beyond the dt * spread rule?)");
        }
        for (std::size_t s = 0; s < sys.dim; ++s) {
            std::complex<double> acc(0.0, 0.0);
            for (int j = 0; j < fac.m; ++j) acc += wk.y[j] * wk.basis[j][s];
            psi[s] = acc;
        }
        remaining -= attempt;
    }
}

} // namespace

LatticeSystem build_lattice(const Grid& grid_coarse, const PotentialSpec& spec,
                            double u0, int n_atoms) {
    if (n_atoms < 1 || n_atoms > kMaxAtoms)
        throw domain_error("build_lattice: n_atoms must be in 1.." +
                           std::to_string(kMaxAtoms));
    const int m = grid_coarse.n_points;
    if (m < 2 || m > kMaxSites)
        throw domain_error("build_lattice: site count must be in 2.." +
                           std::to_string(kMaxSites));
    if (!(grid_coarse.x_max > grid_coarse.x_min))
        throw config_error("build_lattice: grid x_max must exceed x_min");

    const Binomial bin;
    const std::uint64_t dim64 = compositions(bin, n_atoms, m);
    if (dim64 > kDimCap)
        throw domain_error("build_lattice: Fock dimension C(N+M-1,N) = " +
                           std::to_string(dim64) + " exceeds the cap of " +
                           std::to_string(kDimCap));

    LatticeSystem sys;
    sys.grid = grid_coarse;
    sys.spec = spec;
    sys.n_atoms = n_atoms;
    sys.n_sites = m;
    sys.u0 = u0;
    sys.u_eff = u0 / grid_coarse.h();
    sys.dim = std::size_t(dim64);

    // enumerate occupation tuples in descending lexicographic order
    sys.occupations.resize(sys.dim * std::size_t(m));
    {
        std::vector<std::uint8_t> occ(m, 0);
        occ[0] = std::uint8_t(n_atoms);
        std::size_t s = 0;
        for (;;) {
            assert(rank_of(bin, occ.data(), m, n_atoms) == s);
            std::copy(occ.begin(), occ.end(), sys.occupations.begin() + s * m);
            ++s;
            // next tuple: release one atom from the rightmost movable site
            int j = m - 2;
            while (j >= 0 && occ[j] == 0) --j;
            if (j < 0) break;
            int moved = 1;
            for (int i = j + 1; i < m; ++i) {
                moved += occ[i];
                occ[i] = 0;
            }
            occ[j] -= 1;
            occ[j + 1] = std::uint8_t(moved);
        }
        if (s != sys.dim)
            throw numerical_error("build_lattice: basis enumeration miscounted");
    }

    // static diagonal: kinetic stencil center + pair interaction
    const double inv_h2 = 1.0 / (grid_coarse.h() * grid_coarse.h());
    sys.diag_static.resize(sys.dim);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        double pairs = 0.0;
        for (int i = 0; i < m; ++i) pairs += double(row[i]) * double(row[i] - 1);
        sys.diag_static[s] = n_atoms * inv_h2 + 0.5 * sys.u_eff * pairs;
    }

    // hopping: every "one atom moves from site i to site i+1" transition,
    // which lists each undirected pair exactly once
    sys.hop_row_start.assign(sys.dim + 1, 0);
    std::vector<std::uint8_t> occ(m);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        std::size_t cnt = 0;
        for (int i = 0; i + 1 < m; ++i)
            if (row[i] > 0) ++cnt;
        sys.hop_row_start[s + 1] = sys.hop_row_start[s] + cnt;
    }
    sys.hop_col.resize(sys.hop_row_start[sys.dim]);
    sys.hop_amp.resize(sys.hop_row_start[sys.dim]);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        std::size_t k = sys.hop_row_start[s];
        for (int i = 0; i + 1 < m; ++i) {
            if (row[i] == 0) continue;
            std::copy(row, row + m, occ.begin());
            occ[i] -= 1;
            occ[i + 1] += 1;
            const std::size_t t = rank_of(bin, occ.data(), m, n_atoms);
            sys.hop_col[k] = std::uint32_t(t);
            sys.hop_amp[k] =
                -0.5 * inv_h2 * std::sqrt(double(row[i]) * double(row[i + 1] + 1));
            ++k;
        }
    }

    // Jz site bipartition at the static barrier top, oriented so the
    // tilt-favoured side counts positive (merged wells throw here)
    sys.barrier_cut = barrier_position(spec, spec.lambda0);
    const double sign = spec.g >= 0.0 ? 1.0 : -1.0;
    sys.jz_weight.resize(m);
    for (int i = 0; i < m; ++i)
        sys.jz_weight[i] = 0.5 * sign * (grid_coarse.x(i) < sys.barrier_cut ? 1.0 : -1.0);

    return sys;
}

std::vector<double> lattice_site_potentials(const LatticeSystem& sys, double lambda) {
    std::vector<double> v(sys.n_sites);
    for (int i = 0; i < sys.n_sites; ++i)
        v[i] = evaluate_potential(sys.spec, lambda, sys.grid.x(i));
    return v;
}

void apply_lattice_hamiltonian(const LatticeSystem& sys,
                               const std::vector<double>& site_v,
                               const LatticeState& x, LatticeState& y) {
    check_state(sys, x, "apply_lattice_hamiltonian");
    if (site_v.size() != std::size_t(sys.n_sites))
        throw domain_error("apply_lattice_hamiltonian: one potential sample per site required");
    std::vector<double> diag_total;
    fill_diag_total(sys, site_v, diag_total);
    apply_with_diag(sys, diag_total, x, y);
}

double lattice_energy(const LatticeSystem& sys, double lambda, const LatticeState& state) {
    check_state(sys, state, "lattice_energy");
    const double ns = norm_squared(state);
    if (!(ns > 0.0)) throw domain_error("lattice_energy: zero-norm state");
    LatticeState hx;
    apply_lattice_hamiltonian(sys, lattice_site_potentials(sys, lambda), state, hx);
    double e = 0.0;
    for (std::size_t s = 0; s < sys.dim; ++s)
        e += std::real(std::conj(state[s]) * hx[s]);
    return e / ns;
}

LatticeState condensate_state(const LatticeSystem& sys,
                              const std::vector<std::complex<double>>& orbital) {
    check_system(sys, "condensate_state");
    if (orbital.size() != std::size_t(sys.n_sites))
        throw domain_error("condensate_state: one orbital amplitude per site required");
    double ns = 0.0;
    for (const auto& c : orbital) ns += std::norm(c);
    if (!(ns > 0.0)) throw domain_error("condensate_state: zero-norm orbital");
    const double inv = 1.0 / std::sqrt(ns);

    double fact[kMaxAtoms + 1];
    fact[0] = 1.0;
    for (int k = 1; k <= kMaxAtoms; ++k) fact[k] = fact[k - 1] * k;

    const int m = sys.n_sites;
    LatticeState state(sys.dim);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        std::complex<double> amp(1.0, 0.0);
        double denom = 1.0;
        for (int i = 0; i < m; ++i) {
            for (int r = 0; r < row[i]; ++r) amp *= orbital[i] * inv;
            denom *= fact[row[i]];
        }
        state[s] = amp * std::sqrt(fact[sys.n_atoms] / denom);
    }
    return state;
}

LatticeState lattice_ground_state(const LatticeSystem& sys) {
    check_system(sys, "lattice_ground_state");
    std::vector<double> diag_total;
    fill_diag_total(sys, lattice_site_potentials(sys, sys.spec.lambda0), diag_total);

    // deterministic start biased toward the low-diagonal corner of the basis
    double e_min = diag_total[0], e_max = diag_total[0];
    for (double d : diag_total) {
        e_min = std::min(e_min, d);
        e_max = std::max(e_max, d);
    }
    const double width = std::max((e_max - e_min) / 12.0, 1e-12);
    LatticeState x(sys.dim);
    for (std::size_t s = 0; s < sys.dim; ++s)
        x[s] = std::exp(-(diag_total[s] - e_min) / width);
    const double n0 = std::sqrt(norm_squared(x));
    for (auto& a : x) a /= n0;

    KrylovWork wk(sys.dim);
    LatticeState hx(sys.dim);
    const int max_restarts = 80;
    for (int restart = 0; restart < max_restarts; ++restart) {
        const LanczosFactorization fac = lanczos_factorize(sys, diag_total, x, wk);
        const int m = fac.m;
        Eigen::Map<const Eigen::VectorXd> a(wk.alpha.data(), m);
        Eigen::VectorXd b(std::max(m - 1, 0));
        for (int j = 0; j + 1 < m; ++j) b[j] = wk.beta[j];
        wk.small.computeFromTridiagonal(a, b, Eigen::ComputeEigenvectors);
        if (wk.small.info() != Eigen::Success)
            throw numerical_error("lattice_ground_state: tridiagonal eigensolve failed");
        const Eigen::VectorXd u = wk.small.eigenvectors().col(0);
        const double theta = wk.small.eigenvalues()[0];

        for (std::size_t s = 0; s < sys.dim; ++s) {
            std::complex<double> acc(0.0, 0.0);
            for (int j = 0; j < m; ++j) acc += u[j] * wk.basis[j][s];
            x[s] = acc;
        }
        const double nx = std::sqrt(norm_squared(x));
        for (auto& v : x) v /= nx;

        apply_with_diag(sys, diag_total, x, hx);
        double res = 0.0;
        for (std::size_t s = 0; s < sys.dim; ++s) res += std::norm(hx[s] - theta * x[s]);
        if (std::sqrt(res) <= 1e-10 * std::max(1.0, std::abs(theta))) {
            // fix the global phase: largest component real positive
            std::size_t imax = 0;
            for (std::size_t s = 1; s < sys.dim; ++s)
                if (std::norm(x[s]) > std::norm(x[imax])) imax = s;
            const std::complex<double> ph =
                x[imax] / std::abs(x[imax]);
            for (auto& v : x) v /= ph;
            return x;
        }
    }
    throw numerical_error("lattice_ground_state: Lanczos restarts did not converge");
}

Observables lattice_observables(const LatticeSystem& sys, const LatticeState& state) {
    check_state(sys, state, "lattice_observables");
    const double ns = norm_squared(state);
    if (!(ns > 0.0)) throw domain_error("lattice_observables: zero-norm state");

    const int m = sys.n_sites;
    const Binomial bin;

    double jz = 0.0, jz2 = 0.0;
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        double w = 0.0;
        for (int i = 0; i < m; ++i) w += sys.jz_weight[i] * double(row[i]);
        const double p = std::norm(state[s]);
        jz += w * p;
        jz2 += w * w * p;
    }
    jz /= ns;
    jz2 /= ns;

    // one-body density matrix over sites as a Gram matrix of the
    // single-annihilation images phi_j = a_j |state>, which live in the
    // (N-1)-atom basis: rho(i,j) = <phi_i, phi_j>
    const std::size_t dim_low =
        std::size_t(compositions(bin, sys.n_atoms - 1, m));
    std::vector<LatticeState> lowered(m, LatticeState(dim_low, {0.0, 0.0}));
    std::vector<std::uint8_t> occ(m);
    for (std::size_t s = 0; s < sys.dim; ++s) {
        const std::uint8_t* row = &sys.occupations[s * m];
        const std::complex<double> ps = state[s];
        if (std::norm(ps) == 0.0) continue;
        for (int j = 0; j < m; ++j) {
            if (row[j] == 0) continue;
            std::copy(row, row + m, occ.begin());
            occ[j] -= 1;
            const std::size_t u = rank_of(bin, occ.data(), m, sys.n_atoms - 1);
            lowered[j][u] += std::sqrt(double(row[j])) * ps;
        }
    }
    Eigen::MatrixXcd rho(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            std::complex<double> acc(0.0, 0.0);
            for (std::size_t u = 0; u < dim_low; ++u)
                acc += std::conj(lowered[i][u]) * lowered[j][u];
            rho(i, j) = acc / ns;
            rho(j, i) = std::conj(rho(i, j));
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.info() != Eigen::Success)
        throw numerical_error("lattice_observables: density-matrix eigensolve failed");
    const Eigen::VectorXd& occs = es.eigenvalues(); // ascending

    Observables out;
    out.jz_mean = jz;
    out.jz_var = std::max(0.0, jz2 - jz * jz);
    out.frag = (occs[m - 1] - occs[m - 2]) / double(sys.n_atoms);
    return out;
}

double lattice_default_timestep(const LatticeSystem& sys, const DriveSpec& drive) {
    check_system(sys, "lattice_default_timestep");
    const double spread = spread_over_swing(sys, drive);
    double dt = kSpreadTarget / std::max(spread, 1e-12);
    if (drive.lambda1 > 0.0) dt = std::min(dt, 0.05 / drive.omega);
    return dt;
}

TrajectoryRecord propagate_exact(const LatticeSystem& sys, const DriveSpec& drive,
                                 const LatticeState& state0, double t_final, double dt,
                                 int n_records, LatticeState* final_state) {
    check_state(sys, state0, "propagate_exact");
    if (drive.variant != DriveVariant::Full)
        throw domain_error("propagate_exact: the lattice drives the physical potential; "
                           "reduced-parameter drive variants have no lattice counterpart");
    validate_drive(sys.spec, drive);
    if (!(t_final >= 0.0)) throw domain_error("propagate_exact: t_final must be >= 0");
    if (!(dt > 0.0)) throw domain_error("propagate_exact: dt must be > 0");
    if (n_records < 2) n_records = 2;

    const double ns0 = norm_squared(state0);
    if (!(ns0 > 0.0)) throw domain_error("propagate_exact: zero-norm initial state");

    const double spread = spread_over_swing(sys, drive);
    if (dt * spread > kSpreadLimit * (1.0 + 1e-9))
        throw domain_error("propagate_exact: dt = " + std::to_string(dt) +
                           " violates dt * spread <= " + std::to_string(kSpreadLimit) +
                           " (limit " + std::to_string(kSpreadLimit / spread) + ")");

    const int n = sys.n_atoms;
    TrajectoryRecord rec;
    rec.n_atoms = n;

    LatticeState psi = state0;

    double integral = 0.0; // running trapezoid of <Jz>/N over the record grid
    auto record_point = [&](double t) {
        const double ns = norm_squared(psi);
        if (std::abs(ns / ns0 - 1.0) > 2.0e-6)
            throw numerical_error("propagate_exact: norm drift " +
                                  std::to_string(std::abs(std::sqrt(ns / ns0) - 1.0)) +
                                  " exceeds 1e-6 at t = " + std::to_string(t));
        const Observables obs = lattice_observables(sys, psi);
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
        if (final_state) *final_state = psi;
        return rec;
    }

    const long n_steps = std::max(1L, std::lround(std::ceil(t_final / dt - 1.0e-12)));
    const double dt_act = t_final / double(n_steps);

    KrylovWork wk(sys.dim);
    std::vector<double> v1, v2, blend(sys.n_sites);

    long next_record_idx = 1;
    long next_record_step =
        std::max(1L, (1L * n_steps + (n_records - 1) / 2) / (n_records - 1));

    for (long step = 0; step < n_steps; ++step) {
        const double t = dt_act * double(step);
        const double lam1 = lambda_schedule(sys.spec, drive, t + kGaussEarly * dt_act);
        const double lam2 = lambda_schedule(sys.spec, drive, t + kGaussLate * dt_act);
        v1 = lattice_site_potentials(sys, lam1);
        v2 = lattice_site_potentials(sys, lam2);

        // first factor leans on the earlier Gauss point...
        for (int i = 0; i < sys.n_sites; ++i)
            blend[i] = 2.0 * (kWeightLarge * v1[i] + kWeightSmall * v2[i]);
        fill_diag_total(sys, blend, wk.diag_a);
        krylov_exp(sys, wk.diag_a, 0.5 * dt_act, psi, wk);

        // ...the second on the later one
        for (int i = 0; i < sys.n_sites; ++i)
            blend[i] = 2.0 * (kWeightSmall * v1[i] + kWeightLarge * v2[i]);
        fill_diag_total(sys, blend, wk.diag_b);
        krylov_exp(sys, wk.diag_b, 0.5 * dt_act, psi, wk);

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
    if (final_state) *final_state = psi;
    return rec;
}

TrajectoryRecord propagate_exact(const LatticeSystem& sys, const DriveSpec& drive,
                                 double t_final, double dt, int n_records) {
    const LatticeState ground = lattice_ground_state(sys);
    return propagate_exact(sys, drive, ground, t_final, dt, n_records);
}

} // namespace bjj
