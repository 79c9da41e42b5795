#include "bjj/splitstep.hpp"
#include "bjj/errors.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace bjj {
namespace {

// FFTW plan creation/destruction is not thread-safe; execution of distinct
// plans is.  One process-wide mutex serializes the former.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

struct SplitStepEngine::Impl {
    int n = 0;
    double h = 0.0;
    std::vector<std::complex<double>> state;

    // spectral path
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<double> k2; // dispersion k^2 in FFT ordering

    // finite-difference path
    Eigen::MatrixXd q;      // kinetic eigenvectors (columns)
    Eigen::VectorXd theta;  // kinetic eigenvalues

    // current step factors
    bool have_dt = false;
    bool imag_time = false;
    double dt_mag = 0.0; // dt for real time, tau for imaginary time
    std::vector<std::complex<double>> kin_factor;

    std::vector<std::complex<double>> scratch;
};

SplitStepEngine::SplitStepEngine(const Grid& grid, KineticScheme scheme)
    : grid_(grid), scheme_(scheme), impl_(new Impl) {
    grid.validate();
    impl_->n = grid.n_points;
    impl_->h = grid.h();
    impl_->state.assign(impl_->n, {0.0, 0.0});
    impl_->scratch.assign(impl_->n, {0.0, 0.0});
    if (scheme_ == KineticScheme::Spectral) {
        const int n = impl_->n;
        impl_->buf = fftw_alloc_complex(static_cast<std::size_t>(n));
        if (!impl_->buf) throw numerical_error("SplitStepEngine: fftw allocation failed");
        {
            std::lock_guard<std::mutex> lock(plan_mutex());
            // FFTW_ESTIMATE keeps planning deterministic (no timing feedback).
            impl_->fwd = fftw_plan_dft_1d(n, impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
            impl_->bwd = fftw_plan_dft_1d(n, impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        if (!impl_->fwd || !impl_->bwd) throw numerical_error("SplitStepEngine: fftw planning failed");
        impl_->k2.resize(n);
        const double dk = 2.0 * kPi / (static_cast<double>(n) * impl_->h);
        for (int j = 0; j < n; ++j) {
            const int jj = (j <= n / 2) ? j : j - n;
            const double k = dk * jj;
            impl_->k2[j] = k * k;
        }
    } else {
        const int n = impl_->n;
        Eigen::VectorXd kd = Eigen::VectorXd::Constant(n, 1.0 / (impl_->h * impl_->h));
        Eigen::VectorXd ke = Eigen::VectorXd::Constant(n - 1, -0.5 / (impl_->h * impl_->h));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(kd, ke, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success)
            throw numerical_error("SplitStepEngine: kinetic eigendecomposition failed");
        impl_->q = es.eigenvectors();
        impl_->theta = es.eigenvalues();
    }
}

SplitStepEngine::~SplitStepEngine() {
    if (scheme_ == KineticScheme::Spectral) {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
        if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
        if (impl_->buf) fftw_free(impl_->buf);
    }
    delete impl_;
}

void SplitStepEngine::load(const std::vector<std::complex<double>>& psi) {
    if (static_cast<int>(psi.size()) != impl_->n)
        throw numerical_error("SplitStepEngine::load: size mismatch");
    impl_->state = psi;
}

void SplitStepEngine::store(std::vector<std::complex<double>>& psi) const {
    psi = impl_->state;
}

void SplitStepEngine::set_real_timestep(double dt) {
    if (!(dt > 0.0)) throw numerical_error("SplitStepEngine: timestep must be positive");
    impl_->have_dt = true;
    impl_->imag_time = false;
    impl_->dt_mag = dt;
    const int n = impl_->n;
    impl_->kin_factor.resize(n);
    if (scheme_ == KineticScheme::Spectral) {
        for (int j = 0; j < n; ++j) {
            const double a = 0.5 * impl_->k2[j] * dt;
            impl_->kin_factor[j] = {std::cos(a), -std::sin(a)};
        }
    } else {
        for (int j = 0; j < n; ++j) {
            const double a = impl_->theta[j] * dt;
            impl_->kin_factor[j] = {std::cos(a), -std::sin(a)};
        }
    }
}

void SplitStepEngine::set_imaginary_timestep(double tau) {
    if (!(tau > 0.0)) throw numerical_error("SplitStepEngine: timestep must be positive");
    impl_->have_dt = true;
    impl_->imag_time = true;
    impl_->dt_mag = tau;
    const int n = impl_->n;
    impl_->kin_factor.resize(n);
    if (scheme_ == KineticScheme::Spectral) {
        for (int j = 0; j < n; ++j)
            impl_->kin_factor[j] = {std::exp(-0.5 * impl_->k2[j] * tau), 0.0};
    } else {
        for (int j = 0; j < n; ++j)
            impl_->kin_factor[j] = {std::exp(-impl_->theta[j] * tau), 0.0};
    }
}

void SplitStepEngine::half_potential(const std::vector<double>& v, double u) {
    if (!impl_->have_dt) throw numerical_error("SplitStepEngine: timestep not set");
    if (static_cast<int>(v.size()) != impl_->n)
        throw numerical_error("SplitStepEngine: potential size mismatch");
    const int n = impl_->n;
    if (impl_->imag_time) {
        const double half = 0.5 * impl_->dt_mag;
        for (int i = 0; i < n; ++i) {
            std::complex<double>& p = impl_->state[i];
            const double veff = v[i] + u * std::norm(p);
            p *= std::exp(-half * veff);
        }
    } else {
        const double half = 0.5 * impl_->dt_mag;
        for (int i = 0; i < n; ++i) {
            std::complex<double>& p = impl_->state[i];
            const double a = half * (v[i] + u * std::norm(p));
            p *= std::complex<double>(std::cos(a), -std::sin(a));
        }
    }
}

void SplitStepEngine::full_kinetic() {
    if (!impl_->have_dt) throw numerical_error("SplitStepEngine: timestep not set");
    const int n = impl_->n;
    if (scheme_ == KineticScheme::Spectral) {
        std::memcpy(impl_->buf, impl_->state.data(), sizeof(fftw_complex) * static_cast<std::size_t>(n));
        fftw_execute(impl_->fwd);
        auto* b = reinterpret_cast<std::complex<double>*>(impl_->buf);
        const double scale = 1.0 / static_cast<double>(n);
        for (int j = 0; j < n; ++j) b[j] *= impl_->kin_factor[j] * scale;
        fftw_execute(impl_->bwd);
        std::memcpy(impl_->state.data(), impl_->buf, sizeof(fftw_complex) * static_cast<std::size_t>(n));
    } else {
        Eigen::Map<Eigen::VectorXcd> psi(impl_->state.data(), n);
        Eigen::VectorXcd c = impl_->q.transpose() * psi;
        for (int j = 0; j < n; ++j) c[j] *= impl_->kin_factor[j];
        psi = impl_->q * c;
    }
}

void SplitStepEngine::step(const std::vector<double>& v, double u) {
    half_potential(v, u);
    full_kinetic();
    half_potential(v, u);
}

double SplitStepEngine::max_kinetic_eigenvalue() const {
    if (scheme_ == KineticScheme::Spectral) {
        double m = 0.0;
        for (double k2 : impl_->k2) m = std::max(m, 0.5 * k2);
        return m;
    }
    return impl_->theta.maxCoeff();
}

double SplitStepEngine::norm_squared() const {
    double s = 0.0;
    for (const auto& p : impl_->state) s += std::norm(p);
    return s * impl_->h;
}

void SplitStepEngine::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0) || !std::isfinite(n2))
        throw numerical_error("SplitStepEngine: cannot normalize a null state");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& p : impl_->state) p *= s;
}

namespace {

// kinetic expectation <psi| -1/2 d^2/dx^2 |psi> in the engine's own scheme
double kinetic_energy(const SplitStepEngine::Impl* im, KineticScheme scheme) {
    const int n = im->n;
    if (scheme == KineticScheme::Spectral) {
        std::memcpy(im->buf, im->state.data(), sizeof(fftw_complex) * static_cast<std::size_t>(n));
        fftw_execute(im->fwd);
        const auto* b = reinterpret_cast<const std::complex<double>*>(im->buf);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += 0.5 * im->k2[j] * std::norm(b[j]);
        return s * im->h / static_cast<double>(n);
    }
    Eigen::Map<const Eigen::VectorXcd> psi(im->state.data(), n);
    Eigen::VectorXcd c = im->q.transpose() * psi;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += im->theta[j] * std::norm(c[j]);
    return s * im->h;
}

// (-1/2 d^2/dx^2) psi in the engine's own scheme, into out
void apply_kinetic(const SplitStepEngine::Impl* im, KineticScheme scheme,
                   std::vector<std::complex<double>>& out) {
    const int n = im->n;
    out.resize(n);
    if (scheme == KineticScheme::Spectral) {
        std::memcpy(im->buf, im->state.data(), sizeof(fftw_complex) * static_cast<std::size_t>(n));
        fftw_execute(im->fwd);
        auto* b = reinterpret_cast<std::complex<double>*>(im->buf);
        const double scale = 1.0 / static_cast<double>(n);
        for (int j = 0; j < n; ++j) b[j] *= 0.5 * im->k2[j] * scale;
        fftw_execute(im->bwd);
        std::memcpy(out.data(), im->buf, sizeof(fftw_complex) * static_cast<std::size_t>(n));
        return;
    }
    // direct three-point stencil with hard-wall ends: this is exactly the
    // operator whose eigenbasis drives the FD3 kinetic factor
    const double inv_h2 = 1.0 / (im->h * im->h);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> left = (i > 0) ? im->state[i - 1] : std::complex<double>(0.0);
        const std::complex<double> right = (i + 1 < n) ? im->state[i + 1] : std::complex<double>(0.0);
        out[i] = -0.5 * inv_h2 * (left - 2.0 * im->state[i] + right);
    }
}

} // namespace

double SplitStepEngine::energy(const std::vector<double>& v, double u) const {
    if (static_cast<int>(v.size()) != impl_->n)
        throw numerical_error("SplitStepEngine: potential size mismatch");
    double e = kinetic_energy(impl_, scheme_);
    double s = 0.0;
    for (int i = 0; i < impl_->n; ++i) {
        const double d = std::norm(impl_->state[i]);
        s += v[i] * d + 0.5 * u * d * d;
    }
    return e + s * impl_->h;
}

double SplitStepEngine::chemical_potential(const std::vector<double>& v, double u) const {
    double quartic = 0.0;
    for (const auto& p : impl_->state) {
        const double d = std::norm(p);
        quartic += d * d;
    }
    return energy(v, u) + 0.5 * u * quartic * impl_->h;
}

void SplitStepEngine::residual_field(const std::vector<double>& v, double u, double mu,
                                     std::vector<std::complex<double>>& out) const {
    if (static_cast<int>(v.size()) != impl_->n)
        throw numerical_error("SplitStepEngine: potential size mismatch");
    apply_kinetic(impl_, scheme_, out);
    for (int i = 0; i < impl_->n; ++i)
        out[i] += (v[i] + u * std::norm(impl_->state[i]) - mu) * impl_->state[i];
}

double SplitStepEngine::stationary_residual(const std::vector<double>& v, double u, double mu) const {
    residual_field(v, u, mu, impl_->scratch);
    double s = 0.0;
    for (const auto& r : impl_->scratch) s += std::norm(r);
    return std::sqrt(s * impl_->h);
}

void SplitStepEngine::apply_inverse_shifted_kinetic(std::vector<std::complex<double>>& field,
                                                    double c) const {
    const int n = impl_->n;
    if (static_cast<int>(field.size()) != n)
        throw numerical_error("SplitStepEngine: field size mismatch");
    if (!(c > 0.0)) throw numerical_error("SplitStepEngine: shift must be positive");
    if (scheme_ == KineticScheme::Spectral) {
        std::memcpy(impl_->buf, field.data(), sizeof(fftw_complex) * static_cast<std::size_t>(n));
        fftw_execute(impl_->fwd);
        auto* b = reinterpret_cast<std::complex<double>*>(impl_->buf);
        const double scale = 1.0 / static_cast<double>(n);
        for (int j = 0; j < n; ++j) b[j] *= scale / (0.5 * impl_->k2[j] + c);
        fftw_execute(impl_->bwd);
        std::memcpy(field.data(), impl_->buf, sizeof(fftw_complex) * static_cast<std::size_t>(n));
    } else {
        Eigen::Map<Eigen::VectorXcd> f(field.data(), n);
        Eigen::VectorXcd coef = impl_->q.transpose() * f;
        for (int j = 0; j < n; ++j) coef[j] /= impl_->theta[j] + c;
        f = impl_->q * coef;
    }
}

void SplitStepEngine::project_out(const std::vector<double>& phi) {
    if (static_cast<int>(phi.size()) != impl_->n)
        throw numerical_error("SplitStepEngine: projector size mismatch");
    std::complex<double> dot{0.0, 0.0};
    for (int i = 0; i < impl_->n; ++i) dot += phi[i] * impl_->state[i];
    dot *= impl_->h;
    for (int i = 0; i < impl_->n; ++i) impl_->state[i] -= dot * phi[i];
    normalize();
}

} // namespace bjj
