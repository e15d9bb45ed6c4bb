#include "mobility/mfpt.hpp"

#include <cmath>
#include <string>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"

namespace mobility {

double fpt_laplace_kernel(const DerivedCoefficients& coeffs, double s, double delta) {
    if (!(s >= 0.0) || !(delta >= 0.0)) {
        throw DomainError("Laplace variable and passage distance must be non-negative");
    }
    if (delta == 0.0) {
        return 1.0;
    }
    return std::exp(-passage_exponent(coeffs.v, coeffs.D, s) * delta);
}

double mfpt_levels(const ModelParams& params, double x_start, double x_target) {
    const DerivedCoefficients c = derive_coefficients(params);
    if (!(x_start > 0.0)) {
        throw DomainError("start income must be positive, got " + format_number(x_start));
    }
    if (x_target < x_start) {
        throw DomainError("downward passage is not supported (target " + format_number(x_target) +
                          " below start " + format_number(x_start) + ")");
    }
    if (x_target < params.x0) {
        throw DomainError("target income " + format_number(x_target) +
                          " lies below the reset level x0=" + format_number(params.x0));
    }
    if (x_start == x_target) {
        return 0.0;
    }
    const double upper = std::pow(x_target / params.x0, c.a);
    const double lower = std::pow(x_start / params.x0, c.a);
    return (upper - lower) / params.r;
}

double mfpt_percentiles(const ModelParams& params, double p_start, double p_target) {
    if (!(p_start > 0.0 && p_target < 1.0 && p_start < p_target)) {
        throw DomainError("percentiles must satisfy 0 < start < target < 1, got " +
                          format_number(p_start) + " -> " + format_number(p_target));
    }
    const auto dist = StationaryDistribution::from(params);
    const double x_start = quantile(dist, p_start);
    const double x_target = quantile(dist, p_target);
    if (x_start < params.x0) {
        throw DomainError("start percentile " + format_number(p_start) + " maps to income " +
                          format_number(x_start) + " below the reset level x0=" +
                          format_number(params.x0));
    }
    return mfpt_levels(params, x_start, x_target);
}

double mfpt(const ModelParams& params, const PassageQuery& query) {
    switch (query.mode) {
        case PassageMode::Levels:
            return mfpt_levels(params, query.start, query.target);
        case PassageMode::Percentiles:
            return mfpt_percentiles(params, query.start, query.target);
    }
    throw DomainError("unknown passage mode");
}

}  // namespace mobility
