#pragma once

#include <cstddef>
#include <vector>

#include "mobility/model.hpp"

namespace mobility {

// Mixing time of GBM-SR: how long a cohort injected at x0 takes to come
// within `epsilon` total variation of the stationary law.
//
// The transient log-income density follows from the renewal construction
//     P(y,t) = e^{-rt} G(y,t) + r * int_0^t e^{-r tau} G(y,tau) dtau,
// where G is the reset-free Gaussian propagator (mean v tau, variance 2 D tau).
// Since P - P_st = e^{-rt} G(y,t) - r int_t^inf e^{-r tau} G dtau, the total
// variation distance is bounded by e^{-rt}.

struct MixingConfig {
    double epsilon = 0.05;
    // Log-income grid: stationary quantiles [tail, 1 - tail], widened to
    // cover the cohort's Gaussian component out to `widening_sd` standard
    // deviations at the envelope time (1/r) ln(1/epsilon). Made odd.
    std::size_t grid_points = 2001;
    double grid_tail_mass = 1e-6;
    double widening_sd = 6.0;
    // Renewal integrals stop where e^{-r tau} falls below this.
    double tau_cutoff_weight = 1e-12;
    double scan_step = 0.05;        // years
    double time_tolerance = 1e-4;   // bisection bracket width, years
    double quadrature_tolerance = 1e-6;

    static MixingConfig one_over_e();
    void validate() const;
};

struct LogIncomeGrid {
    double lower = 0.0;
    double step = 0.0;
    std::size_t size = 0;
    std::size_t zero_index = 0;  // y = 0 is always a node, at an even index

    double at(std::size_t i) const noexcept { return lower + step * static_cast<double>(i); }
    double upper() const noexcept { return at(size - 1); }
};

LogIncomeGrid make_grid(const DerivedCoefficients& coeffs, const MixingConfig& config);

/// Truncation time of the renewal integral, -ln(weight) / r.
double tau_cutoff(const DerivedCoefficients& coeffs, const MixingConfig& config);

/// Transient log-income density of a cohort started at y = 0. r = 0 gives
/// the plain Gaussian. DomainError if t <= 0.
double transient_pdf(const DerivedCoefficients& coeffs, double y, double t);
double transient_pdf(const DerivedCoefficients& coeffs, double y, double t, const MixingConfig& config);

/// Evaluates transient densities and distances on one fixed grid.
class MixingEvaluator {
public:
    MixingEvaluator(const DerivedCoefficients& coeffs, const MixingConfig& config);

    const LogIncomeGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& stationary() const noexcept { return stationary_; }

    std::vector<double> transient(double t) const;
    /// Grid integral of the transient density.
    double mass(double t) const;
    /// Half the L1 distance between the transient and stationary densities;
    /// 1 at t = 0.
    double tv_distance(double t) const;

private:
    DerivedCoefficients coeffs_;
    MixingConfig config_;
    LogIncomeGrid grid_;
    std::vector<double> stationary_;
};

double tv_distance(const DerivedCoefficients& coeffs, double t, const MixingConfig& config);

struct MixingResult {
    double time = 0.0;
    std::vector<double> scan_times;  // coarse scan and bisection points, in evaluation order
    std::vector<double> scan_tv;
};

/// Smallest t with tv_distance(t) <= epsilon: coarse scan, then bisection.
/// NotConverged if the scan passes 10 (1/r) ln(1/epsilon) without crossing.
MixingResult mixing_time_detailed(const ModelParams& params, const MixingConfig& config);
double mixing_time(const ModelParams& params, const MixingConfig& config);

}  // namespace mobility
