#pragma once

// Test-only reference computations. Nothing here calls the code paths it is
// used to check.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

// Asymmetric Laplace density in log-income, written out independently.
inline double log_density(double a, double b, double y) {
    const double c = a * b / (a + b);
    return y >= 0 ? c * std::exp(-a * y) : c * std::exp(b * y);
}

// e^y times the log density, evaluated in one exponent so tails stay finite.
inline double income_weighted_density(double a, double b, double y) {
    const double c = a * b / (a + b);
    return y >= 0 ? c * std::exp((1.0 - a) * y) : c * std::exp((1.0 + b) * y);
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

// int_{-inf}^{inf} f(y) dy for f with a kink at y = 0.
template <class F>
double integrate_real_line(F&& f) {
    boost::math::quadrature::exp_sinh<double> es;
    const double right = es.integrate([&](double y) { return f(y); }, 0.0, inf());
    const double left = es.integrate([&](double u) { return f(-u); }, 0.0, inf());
    return left + right;
}

// int_lo^inf f(y) dy, split at 0 when lo < 0.
template <class F>
double integrate_from(F&& f, double lo) {
    boost::math::quadrature::exp_sinh<double> es;
    boost::math::quadrature::tanh_sinh<double> ts;
    if (lo >= 0.0) {
        return es.integrate([&](double y) { return f(y); }, lo, inf());
    }
    return ts.integrate([&](double y) { return f(y); }, lo, 0.0) +
           es.integrate([&](double y) { return f(y); }, 0.0, inf());
}

// int_0^t e^{-r tau} G(y, tau) dtau in closed form, G the Gaussian with mean
// v tau and variance 2 D tau. With c = r + v^2/(4D) and alpha = |y|/(2 sqrt D):
//   e^{v y/(2D)} / (4 sqrt(D c)) * [e^{-2 alpha sqrt c} erfc(alpha/sqrt t - sqrt(c t))
//                                   - e^{2 alpha sqrt c} erfc(alpha/sqrt t + sqrt(c t))]
inline double renewal_integral(double v, double D, double r, double y, double t) {
    const double c = r + v * v / (4.0 * D);
    const double alpha = std::abs(y) / (2.0 * std::sqrt(D));
    const double sc = std::sqrt(c);
    const double st = std::sqrt(t);
    const double first = std::exp(-2.0 * alpha * sc) * std::erfc(alpha / st - sc * st);
    const double second = std::exp(2.0 * alpha * sc) * std::erfc(alpha / st + sc * st);
    return std::exp(v * y / (2.0 * D)) / (4.0 * std::sqrt(D * c)) * (first - second);
}

inline double gaussian(double y, double mean, double variance) {
    return std::exp(-(y - mean) * (y - mean) / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// Transient log-income density of a cohort started at 0, closed form.
inline double transient_density(double v, double D, double r, double y, double t) {
    return std::exp(-r * t) * gaussian(y, v * t, 2.0 * D * t) + r * renewal_integral(v, D, r, y, t);
}

}  // namespace oracle
