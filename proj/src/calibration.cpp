#include "mobility/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"
#include "mobility/parallel.hpp"

namespace mobility {

void CalibrationConfig::validate() const {
    if (!(sigma_fixed > 0.0)) {
        throw InvalidParams("sigma_fixed must be positive");
    }
    if (!(share_fraction > 0.0 && share_fraction < 1.0)) {
        throw InvalidParams("share_fraction must lie in (0,1)");
    }
    if (!(a_lower > 1.0) || !(a_upper > a_lower)) {
        throw InvalidParams("tail-exponent bracket must satisfy 1 < lower < upper");
    }
    if (!(share_tolerance > 0.0)) {
        throw InvalidParams("share_tolerance must be positive");
    }
    if (scan_points < 2) {
        throw InvalidParams("scan_points must be at least 2");
    }
}

double reset_rate(double separations, double employment, const CalibrationConfig& config) {
    if (!(employment > 0.0)) {
        throw DomainError("employment must be positive");
    }
    if (!(separations >= 0.0)) {
        throw DomainError("separations must be non-negative");
    }
    const double ratio = separations / employment;
    double rate = ratio;
    if (config.hazard_transform) {
        if (ratio >= 1.0) {
            throw DomainError("hazard transform needs separations < employment");
        }
        rate = -std::log1p(-ratio);
    }
    if (!(rate > 0.0)) {
        throw NonPositiveRate("resetting rate is zero: no separations recorded, so no stationary state");
    }
    return rate;
}

double share_curve(double a, double r, double D, double share_fraction) {
    return top_share(StationaryDistribution(a, r / (D * a)), share_fraction);
}

namespace {

// Bisection down to adjacent doubles; f(lo) and f(hi) have opposite signs.
template <class F>
double bisect(F&& f, double lo, double hi, double f_lo) {
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double f_mid = f(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CalibrationResult calibrate_year(const YearObservation& obs, const CalibrationConfig& config) {
    config.validate();
    if (!(obs.top1_share > 0.0 && obs.top1_share < 1.0)) {
        throw DomainError("year " + std::to_string(obs.year) + ": top share must lie in (0,1), got " +
                          format_number(obs.top1_share));
    }
    const double r = reset_rate(obs.separations, obs.employment, config);
    const double sigma = config.sigma_fixed;
    const double D = 0.5 * sigma * sigma;
    const double target = obs.top1_share;
    const double p = config.share_fraction;

    auto residual = [&](double a) { return share_curve(a, r, D, p) - target; };

    // Log-spaced scan: the curve is not monotone in a, so every sign change is
    // bracketed separately.
    const std::size_t n = config.scan_points;
    const double log_lo = std::log(config.a_lower);
    const double log_hi = std::log(config.a_upper);
    std::vector<double> grid(n);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        grid[i] = i == 0 ? config.a_lower : (i + 1 == n ? config.a_upper : std::exp(log_lo + t * (log_hi - log_lo)));
        values[i] = residual(grid[i]);
    }

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (values[i] == 0.0) {
            roots.push_back(grid[i]);
        } else if ((values[i] < 0.0) != (values[i + 1] < 0.0) && values[i + 1] != 0.0) {
            roots.push_back(bisect(residual, grid[i], grid[i + 1], values[i]));
        }
    }
    if (values[n - 1] == 0.0) {
        roots.push_back(grid[n - 1]);
    }

    if (roots.empty()) {
        if (values.front() < 0.0) {
            // Target exceeds the share reached at the heavy-tail edge; the
            // curve tends to 1 only as a -> 1.
            throw HeavyTail("year " + std::to_string(obs.year) + ": top share " + format_number(target) +
                            " requires a tail exponent a <= " + format_number(config.a_lower) +
                            " (infinite mean); try a different sigma_fixed");
        }
        throw NoRoot("year " + std::to_string(obs.year) + ": no tail exponent in [" +
                     format_number(config.a_lower) + ", " + format_number(config.a_upper) +
                     "] reproduces top share " + format_number(target) + " with r=" + format_number(r) +
                     " and sigma=" + format_number(sigma) + "; consider adjusting sigma_fixed");
    }

    CalibrationResult out;
    out.roots = roots;
    out.bracket_lower = config.a_lower;
    out.bracket_upper = config.a_upper;

    const double a = roots.front();  // SmallestTailExponent
    if (roots.size() > 1) {
        std::string list;
        for (double root : roots) {
            list += (list.empty() ? "" : " ") + format_number(root);
        }
        out.warnings.push_back("MultipleRoots: share curve crosses target " + std::to_string(roots.size()) +
                               " times (a = " + list + "); selected smallest a");
    }

    const double b = r / (D * a);
    out.params = ModelParams{D * (b - a) + D, sigma, r, 1.0};
    out.coeffs = derive_coefficients(out.params);
    out.achieved_share = top_share(StationaryDistribution::from(out.coeffs), p);
    out.share_error = std::abs(out.achieved_share - target);
    if (out.share_error > config.share_tolerance) {
        throw NotConverged("year " + std::to_string(obs.year) + ": calibrated share error " +
                           format_number(out.share_error) + " exceeds tolerance " +
                           format_number(config.share_tolerance));
    }
    return out;
}

PanelCalibration calibrate_panel(std::span<const YearObservation> panel, const CalibrationConfig& config,
                                 unsigned threads) {
    for (std::size_t i = 1; i < panel.size(); ++i) {
        if (panel[i].year <= panel[i - 1].year) {
            throw DomainError("panel years must be strictly increasing (" + std::to_string(panel[i - 1].year) +
                              " then " + std::to_string(panel[i].year) + ")");
        }
    }
    std::vector<std::optional<CalibrationResult>> results(panel.size());
    std::vector<std::optional<YearFailure>> failures(panel.size());
    parallel_for(panel.size(), threads, [&](std::size_t i) {
        try {
            results[i] = calibrate_year(panel[i], config);
        } catch (const MobilityError& e) {
            failures[i] = YearFailure{panel[i].year, e.kind(), e.what()};
        }
    });

    PanelCalibration out;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (results[i]) {
            out.rows.push_back({panel[i].year, std::move(*results[i])});
        } else {
            out.failures.push_back(std::move(*failures[i]));
        }
    }
    return out;
}

}  // namespace mobility
