#include "bjj/tridiag.hpp"
#include "bjj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace bjj {
namespace {

// Number of eigenvalues strictly below sigma, by the classic Sturm sequence
// on the shifted matrix.  pivmin guards against division blow-up when a
// leading minor is exactly singular at the probe shift.
int count_below(const std::vector<double>& d, const std::vector<double>& e2,
                double sigma) {
    const double pivmin = 1e-290;
    const std::size_t n = d.size();
    double q = d[0] - sigma;
    int count = q < 0.0 ? 1 : 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(q) < pivmin) q = (q < 0.0 ? -pivmin : pivmin);
        q = d[i] - sigma - e2[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// LU factorization of (T - sigma*I) with partial pivoting, then one solve.
// The matrix is deliberately near-singular (sigma sits on an eigenvalue);
// pivoting keeps the factors finite and the solution grows along the wanted
// eigenvector, which is exactly what inverse iteration feeds on.
void shifted_solve(const std::vector<double>& diag, const std::vector<double>& off,
                   double sigma, std::vector<double>& b) {
    const std::size_t n = diag.size();
    std::vector<double> d(n), dl(n > 1 ? n - 1 : 0), du(n > 1 ? n - 1 : 0);
    std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
    std::vector<char> swap_next(n > 1 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - sigma;
    for (std::size_t i = 0; i + 1 < n; ++i) { dl[i] = off[i]; du[i] = off[i]; }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = 1e-300;
            const double fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            const double fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            const double tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - fact * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            swap_next[i] = 1;
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = 1e-300;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swap_next[i]) {
            b[i + 1] -= dl[i] * b[i];
        } else {
            const double tmp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tmp - dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    if (n >= 2) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t k = n; k >= 3; --k) {
        const std::size_t i = k - 3;
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double vi : v) s += vi * vi;
    return std::sqrt(s);
}

} // namespace

TridiagPairs tridiag_lowest_eigenpairs(const std::vector<double>& d,
                                       const std::vector<double>& e,
                                       int n_pairs) {
    const std::size_t n = d.size();
    if (n < 2 || e.size() != n - 1)
        throw numerical_error("tridiag_lowest_eigenpairs: inconsistent matrix dimensions");
    if (n_pairs < 1 || static_cast<std::size_t>(n_pairs) > n)
        throw numerical_error("tridiag_lowest_eigenpairs: invalid eigenpair count");

    std::vector<double> e2(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) e2[i] = e[i] * e[i];

    // Gershgorin bounds
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }

    TridiagPairs out;
    out.values.resize(n_pairs);
    out.vectors.assign(n_pairs, std::vector<double>(n, 0.0));

    for (int j = 0; j < n_pairs; ++j) {
        double a = lo, b = hi;
        for (int it = 0; it < 100 && (b - a) > 1e-15 * std::max({std::abs(a), std::abs(b), 1.0}); ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(d, e2, mid) <= j) a = mid; else b = mid;
        }
        const double lam = 0.5 * (a + b);
        out.values[j] = lam;

        // Inverse iteration.  Orthogonalizing against the already-found pairs
        // inside every sweep (not just at the end) is what separates members
        // of a cluster whose splitting falls below the shift resolution: the
        // solve amplifies the whole near-degenerate subspace, and the
        // projection steers the growth into the orthogonal complement.
        std::vector<double>& v = out.vectors[j];
        auto project_prev = [&]() {
            for (int p = 0; p < j; ++p) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += v[i] * out.vectors[p][i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * out.vectors[p][i];
            }
            return norm2(v);
        };
        bool converged = false;
        for (int attempt = 0; attempt < 2 && !converged; ++attempt) {
            // deterministic starts with no accidental symmetry
            const double freq = attempt == 0 ? 0.7 : 1.9;
            for (std::size_t i = 0; i < n; ++i)
                v[i] = std::cos(freq * static_cast<double>(i)) +
                       0.3 * static_cast<double>(i) / static_cast<double>(n);
            double nrm = project_prev();
            if (nrm < 1e-12) continue;
            for (double& vi : v) vi /= nrm;
            converged = true;
            for (int sweep = 0; sweep < 4; ++sweep) {
                shifted_solve(d, e, lam, v);
                nrm = norm2(v);
                if (!(nrm > 0.0) || !std::isfinite(nrm))
                    throw numerical_error("tridiag_lowest_eigenpairs: inverse iteration diverged");
                for (double& vi : v) vi /= nrm;
                nrm = project_prev();
                if (nrm < 1e-10) { converged = false; break; }
                for (double& vi : v) vi /= nrm;
            }
        }
        if (!converged)
            throw numerical_error("tridiag_lowest_eigenpairs: eigenvector collapsed during orthogonalization");
    }
    return out;
}

} // namespace bjj
