#pragma once
#include <vector>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include "bjj/errors.hpp"

namespace bjj {

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson limiter).
// Knot abscissae must be strictly increasing.  When the knot values are
// monotone the interpolant is monotone on every interval -- no overshoot
// between knots.  Evaluation outside [x.front(), x.back()] throws; tabulated
// families must never be extrapolated.
class MonotoneCubic {
public:
    MonotoneCubic() = default; // empty; any evaluation throws until assigned

    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::string name = "table")
        : x_(std::move(x)), y_(std::move(y)), name_(std::move(name)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw config_error(name_ + ": need at least two knots and matching array sizes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw config_error(name_ + ": knot abscissae must be strictly increasing");

        // secant slopes
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);

        // endpoint + interior tangents.  The interior estimate is the
        // three-point finite difference (exact for quadratic data on any
        // spacing); the sign guard and the limiter below then trim it only
        // where monotonicity would be lost.
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) m_[i] = 0.0;
            else {
                const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
                m_[i] = (h1 * d[i - 1] + h0 * d[i]) / (h0 + h1);
            }
        }
        // Fritsch-Carlson circle limiter keeps each interval monotone
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) { m_[i] = m_[i + 1] = 0.0; continue; }
            const double a = m_[i] / d[i], b = m_[i + 1] / d[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                m_[i] = t * a * d[i];
                m_[i + 1] = t * b * d[i];
            }
        }
    }

    double x_min() const { return x_.empty() ? std::numeric_limits<double>::quiet_NaN() : x_.front(); }
    double x_max() const { return x_.empty() ? std::numeric_limits<double>::quiet_NaN() : x_.back(); }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& knots_y() const { return y_; }

    bool contains(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }

    double operator()(double x) const {
        if (!contains(x))
            throw bjj::domain_error(name_ + ": x = " + std::to_string(x) + " outside [" +
                                    std::to_string(x_min()) + ", " + std::to_string(x_max()) +
                                    "]; extrapolation is not allowed");
        // binary search for the interval
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x) ? lo = mid : hi = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (x - x_[lo]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[lo] + h * h10 * m_[lo] + h01 * y_[lo + 1] + h * h11 * m_[lo + 1];
    }

    double derivative(double x) const {
        if (!contains(x))
            throw bjj::domain_error(name_ + ": derivative outside tabulated domain");
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= x) ? lo = mid : hi = mid;
        }
        const double h = x_[lo + 1] - x_[lo];
        const double t = (x - x_[lo]) / h;
        const double dh00 = (6 * t * t - 6 * t) / h, dh10 = 3 * t * t - 4 * t + 1;
        const double dh01 = (-6 * t * t + 6 * t) / h, dh11 = 3 * t * t - 2 * t;
        return dh00 * y_[lo] + dh10 * m_[lo] + dh01 * y_[lo + 1] + dh11 * m_[lo + 1];
    }

    // true if knot values increase strictly
    bool strictly_increasing() const {
        for (std::size_t i = 1; i < y_.size(); ++i)
            if (!(y_[i] > y_[i - 1])) return false;
        return true;
    }

private:
    std::vector<double> x_, y_, m_;
    std::string name_;
};

} // namespace bjj
