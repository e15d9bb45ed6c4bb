#pragma once

#include "mobility/model.hpp"

namespace mobility {

// Mean first passage time upward in income under resetting.
//
// With q(s|x) the Laplace transform of the reset-free passage time from x to
// the target, the renewal identity gives
//     T(x_s) = (1 - q(r|x_s)) / (r q(r|x0)).
// Reset-free log-income is Brownian with drift v, so
//     q(s|x) = exp(-kappa(s) ln(x_t/x)),   kappa(r) = a,
// which collapses to T = ((x_t/x0)^a - (x_s/x0)^a) / r for x_t >= x0.

/// exp(-kappa(s) * delta). DomainError if s < 0 or delta < 0.
double fpt_laplace_kernel(const DerivedCoefficients& coeffs, double s, double delta);

/// Years to first reach x_target from x_start. Requires 0 < x_start <= x_target
/// and x_target >= x0; downward passage is rejected with DomainError.
double mfpt_levels(const ModelParams& params, double x_start, double x_target);

/// mfpt_levels between two quantiles of the stationary distribution.
/// Requires 0 < p_start < p_target < 1 and quantile(p_start) >= x0.
double mfpt_percentiles(const ModelParams& params, double p_start, double p_target);

enum class PassageMode { Levels, Percentiles };

struct PassageQuery {
    double start = 0.0;
    double target = 0.0;
    PassageMode mode = PassageMode::Percentiles;
};

double mfpt(const ModelParams& params, const PassageQuery& query);

}  // namespace mobility
