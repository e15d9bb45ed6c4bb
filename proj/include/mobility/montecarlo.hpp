#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobility/model.hpp"

namespace mobility {

// Brute-force path simulation of GBM-SR, used as an independent check of the
// closed forms. Reset times are exact exponentials and reset-free log-income
// increments are exact Gaussians, so only barrier monitoring in first-passage
// runs is discretized.
//
// Every path draws from its own Philox streams keyed by (seed, path index), so
// results are bit-identical for any thread count.

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-2;         // years
    double horizon = 100.0;   // years; burn-in for stationary reference samples
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    std::optional<double> fpt_horizon_cap;  // default: 50 x analytic MFPT
    unsigned threads = 1;
    // Each dt step is subdivided 2^refine_levels times by Brownian-bridge
    // midpoint refinement of the coarse path, so runs that differ only in
    // refine_levels share their coarse increments.
    unsigned refine_levels = 0;

    void validate() const;
};

struct SimResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t n_effective = 0;      // paths that finished before the cap
    double truncated_fraction = 0.0;  // paths stopped at the cap (counted at the cap)
    std::vector<std::string> warnings;
};

/// Incomes at time burn_in of n paths started at x0. DomainError unless
/// burn_in >= 10 / r.
std::vector<double> sample_stationary(const ModelParams& params, std::size_t n, double burn_in,
                                      std::uint64_t seed, unsigned threads = 1);

/// Share of the sample total held by the largest ceil(p n) values.
double empirical_top_share(std::span<const double> samples, double p);

/// Sample mean with its standard error.
SimResult sample_mean(std::span<const double> samples);

/// Mean first passage time from x_start up to x_target by simulation.
SimResult empirical_mfpt(const ModelParams& params, double x_start, double x_target, const SimConfig& config);

struct TvPoint {
    double t = 0.0;
    double tv = 0.0;
    // Expected TV of a sample of this size drawn from the stationary law
    // itself, under the same binning.
    double noise_floor = 0.0;
};

struct EmpiricalTv {
    std::vector<TvPoint> points;  // in the order of the requested times
    double bin_width = 0.0;       // log-income
    std::size_t bins = 0;         // including the two overflow bins
};

/// Histogram total variation between n_paths cohort paths started at x0 and
/// the stationary law binned identically. Bin width is Freedman-Diaconis on a
/// stationary sample of the same size.
EmpiricalTv empirical_tv(const ModelParams& params, std::span<const double> times, const SimConfig& config);

}  // namespace mobility
