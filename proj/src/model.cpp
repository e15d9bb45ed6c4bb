#include "mobility/model.hpp"

#include <cmath>
#include <string>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"

namespace mobility {

namespace {

std::string num(double x) { return format_number(x); }

}  // namespace

void validate(const ModelParams& params) {
    if (!std::isfinite(params.mu)) {
        throw InvalidParams("mu must be finite");
    }
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        throw InvalidParams("sigma must be positive, got " + num(params.sigma));
    }
    if (!(params.r > 0.0) || !std::isfinite(params.r)) {
        throw InvalidParams("resetting rate r must be positive for a stationary state, got " +
                            num(params.r));
    }
    if (!(params.x0 > 0.0) || !std::isfinite(params.x0)) {
        throw InvalidParams("reset level x0 must be positive, got " + num(params.x0));
    }
}

double passage_exponent(double v, double D, double s) {
    const double root = std::sqrt(v * v + 4.0 * D * s);
    // Both forms are algebraically equal; pick the one without cancellation.
    if (v > 0.0) {
        return 2.0 * s / (root + v);
    }
    return (root - v) / (2.0 * D);
}

DerivedCoefficients log_space_coefficients(double v, double D, double r) {
    DerivedCoefficients c;
    c.v = v;
    c.D = D;
    c.r = r;
    c.lambda = std::sqrt(v * v + 4.0 * D * r);
    c.a = passage_exponent(v, D, r);
    // b = (lambda + v) / (2D) = kappa for the mirrored drift.
    c.b = passage_exponent(-v, D, r);
    return c;
}

DerivedCoefficients derive_coefficients(const ModelParams& params) {
    validate(params);
    const double D = 0.5 * params.sigma * params.sigma;
    return log_space_coefficients(params.mu - D, D, params.r);
}

StationaryDistribution::StationaryDistribution(double a, double b, double x0) : a_(a), b_(b), x0_(x0) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw InvalidParams("tail exponents must be positive, got a=" + num(a) + " b=" + num(b));
    }
    if (!(x0 > 0.0) || !std::isfinite(x0)) {
        throw InvalidParams("reset level x0 must be positive");
    }
}

StationaryDistribution StationaryDistribution::from(const DerivedCoefficients& coeffs, double x0) {
    return StationaryDistribution(coeffs.a, coeffs.b, x0);
}

StationaryDistribution StationaryDistribution::from(const ModelParams& params) {
    return from(derive_coefficients(params), params.x0);
}

double StationaryDistribution::log_pdf(double y) const noexcept {
    const double norm = a_ * b_ / (a_ + b_);
    return y >= 0.0 ? norm * std::exp(-a_ * y) : norm * std::exp(b_ * y);
}

double StationaryDistribution::log_cdf(double y) const noexcept {
    const double q = a_ + b_;
    if (y >= 0.0) {
        return 1.0 - (b_ / q) * std::exp(-a_ * y);
    }
    return (a_ / q) * std::exp(b_ * y);
}

double StationaryDistribution::log_quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("cumulative probability must lie in (0,1), got " + num(p));
    }
    const double q = a_ + b_;
    if (p >= a_ / q) {
        return -std::log((1.0 - p) * q / b_) / a_;
    }
    return std::log(p * q / a_) / b_;
}

double stationary_pdf(const StationaryDistribution& dist, double x) {
    if (!(x > 0.0)) {
        throw DomainError("income must be positive, got " + num(x));
    }
    return dist.log_pdf(std::log(x / dist.x0())) / x;
}

double stationary_survival(const StationaryDistribution& dist, double x) {
    if (!(x > 0.0)) {
        throw DomainError("income must be positive, got " + num(x));
    }
    const double y = std::log(x / dist.x0());
    const double a = dist.a();
    const double b = dist.b();
    if (y >= 0.0) {
        return (b / (a + b)) * std::exp(-a * y);
    }
    return 1.0 - (a / (a + b)) * std::exp(b * y);
}

double quantile(const StationaryDistribution& dist, double p) {
    return dist.x0() * std::exp(dist.log_quantile(p));
}

double mean_income(const StationaryDistribution& dist) {
    const double a = dist.a();
    const double b = dist.b();
    if (!(a > 1.0)) {
        throw HeavyTail("mean income diverges for upper tail exponent a=" + num(a) + " <= 1");
    }
    return dist.x0() * a * b / ((a - 1.0) * (b + 1.0));
}

double top_share(const StationaryDistribution& dist, double p) {
    const double a = dist.a();
    const double b = dist.b();
    if (!(a > 1.0)) {
        throw HeavyTail("top share undefined for upper tail exponent a=" + num(a) + " <= 1");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError("top fraction must lie in (0,1], got " + num(p));
    }
    if (p == 1.0) {
        return 1.0;
    }
    const double q = a + b;
    if (p <= b / q) {
        // Threshold at or above x0.
        return ((b + 1.0) / q) * std::pow(p * q / b, (a - 1.0) / a);
    }
    // Threshold below x0: e^{b y_p} = (1 - p) q / a.
    const double growth = std::log((1.0 - p) * q / a) * (b + 1.0) / b;
    return 1.0 - ((a - 1.0) / q) * std::exp(growth);
}

}  // namespace mobility
