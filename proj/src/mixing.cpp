#include "mobility/mixing.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "mobility/errors.hpp"

namespace mobility {

MixingConfig MixingConfig::one_over_e() {
    MixingConfig config;
    config.epsilon = std::exp(-1.0);
    return config;
}

void MixingConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidParams("mixing threshold epsilon must lie in (0,1)");
    }
    if (grid_points < 3) {
        throw InvalidParams("log-income grid needs at least 3 points");
    }
    if (!(grid_tail_mass > 0.0 && grid_tail_mass < 5e-6)) {
        // Both tails together must leave at least 1 - 1e-5 of the mass on the grid.
        throw InvalidParams("grid_tail_mass must lie in (0, 5e-6)");
    }
    if (!(scan_step > 0.0) || !(time_tolerance > 0.0) || !(quadrature_tolerance > 0.0)) {
        throw InvalidParams("scan step and tolerances must be positive");
    }
    if (!(tau_cutoff_weight > 0.0 && tau_cutoff_weight < 1.0)) {
        throw InvalidParams("tau_cutoff_weight must lie in (0,1)");
    }
}

LogIncomeGrid make_grid(const DerivedCoefficients& coeffs, const MixingConfig& config) {
    config.validate();
    const StationaryDistribution dist(coeffs.a, coeffs.b);
    const double t_ref = std::log(1.0 / config.epsilon) / coeffs.r;
    const double spread = config.widening_sd * std::sqrt(2.0 * coeffs.D * t_ref);
    const double drift = coeffs.v * t_ref;
    const double lo = std::min(dist.log_quantile(config.grid_tail_mass), std::min(0.0, drift) - spread);
    const double hi = std::max(dist.log_quantile(1.0 - config.grid_tail_mass), std::max(0.0, drift) + spread);

    LogIncomeGrid grid;
    grid.size = config.grid_points | 1u;
    // Two spare intervals let the lower edge snap to an even multiple of the
    // step while still reaching `hi`.
    grid.step = (hi - lo) / static_cast<double>(grid.size - 3);
    std::size_t k = static_cast<std::size_t>(std::ceil(-lo / grid.step));
    if (k % 2 == 1) {
        ++k;
    }
    grid.zero_index = k;
    grid.lower = -static_cast<double>(k) * grid.step;
    return grid;
}

double tau_cutoff(const DerivedCoefficients& coeffs, const MixingConfig& config) {
    if (!(coeffs.r > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return -std::log(config.tau_cutoff_weight) / coeffs.r;
}

namespace {

double gaussian(double y, double mean, double variance) {
    const double d = y - mean;
    return std::exp(-d * d / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

// r * int_0^upper e^{-r tau} G(y, tau) dtau with tau = u^2. The substituted
// integrand e^{-r u^2} exp(-(y - v u^2)^2 / (4 D u^2)) / sqrt(pi D) stays
// bounded as u -> 0, unlike G itself.
double renewal_integral(const DerivedCoefficients& c, double y, double upper, double rel_tol) {
    if (!(c.r > 0.0) || !(upper > 0.0)) {
        return 0.0;
    }
    const double scale = 1.0 / std::sqrt(std::numbers::pi * c.D);
    auto f = [&](double u) {
        if (u <= 0.0) {
            return y == 0.0 ? scale : 0.0;
        }
        const double tau = u * u;
        const double d = y - c.v * tau;
        return scale * std::exp(-c.r * tau - d * d / (4.0 * c.D * tau));
    };
    const double u_max = std::sqrt(upper);
    double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, u_max, 15, rel_tol);
    return c.r * value;
}

double transient_impl(const DerivedCoefficients& c, double y, double t, double cutoff, double rel_tol) {
    if (!(t > 0.0)) {
        throw DomainError("transient density needs t > 0");
    }
    const double direct = std::exp(-c.r * t) * gaussian(y, c.v * t, 2.0 * c.D * t);
    return direct + renewal_integral(c, y, std::min(t, cutoff), rel_tol);
}

// Relative tolerance per grid point; far below the mass tolerance so the
// accumulated grid error is dominated by Simpson, not the inner quadrature.
constexpr double kInnerRelTol = 1e-10;

}  // namespace

double transient_pdf(const DerivedCoefficients& coeffs, double y, double t) {
    return transient_impl(coeffs, y, t, std::numeric_limits<double>::infinity(), kInnerRelTol);
}

double transient_pdf(const DerivedCoefficients& coeffs, double y, double t, const MixingConfig& config) {
    return transient_impl(coeffs, y, t, tau_cutoff(coeffs, config), kInnerRelTol);
}

MixingEvaluator::MixingEvaluator(const DerivedCoefficients& coeffs, const MixingConfig& config)
    : coeffs_(coeffs), config_(config), grid_(make_grid(coeffs, config)) {
    const StationaryDistribution dist(coeffs.a, coeffs.b);
    stationary_.resize(grid_.size);
    for (std::size_t i = 0; i < grid_.size; ++i) {
        stationary_[i] = dist.log_pdf(grid_.at(i));
    }
}

std::vector<double> MixingEvaluator::transient(double t) const {
    const double cutoff = tau_cutoff(coeffs_, config_);
    std::vector<double> out(grid_.size);
    for (std::size_t i = 0; i < grid_.size; ++i) {
        out[i] = transient_impl(coeffs_, grid_.at(i), t, cutoff, kInnerRelTol);
    }
    return out;
}

namespace {

// Composite Simpson over an odd number of equally spaced samples.
template <class F>
double simpson(std::size_t n, double h, F&& value) {
    double sum = value(0) + value(n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * value(i);
    }
    return sum * h / 3.0;
}

}  // namespace

double MixingEvaluator::mass(double t) const {
    const auto p = transient(t);
    return simpson(p.size(), grid_.step, [&](std::size_t i) { return p[i]; });
}

double MixingEvaluator::tv_distance(double t) const {
    if (!(t >= 0.0)) {
        throw DomainError("tv_distance needs t >= 0");
    }
    if (t == 0.0) {
        return 1.0;
    }
    const auto p = transient(t);
    const double tv =
        0.5 * simpson(p.size(), grid_.step, [&](std::size_t i) { return std::abs(p[i] - stationary_[i]); });
    return std::clamp(tv, 0.0, 1.0);
}

double tv_distance(const DerivedCoefficients& coeffs, double t, const MixingConfig& config) {
    return MixingEvaluator(coeffs, config).tv_distance(t);
}

MixingResult mixing_time_detailed(const ModelParams& params, const MixingConfig& config) {
    const DerivedCoefficients coeffs = derive_coefficients(params);
    const MixingEvaluator evaluator(coeffs, config);
    const double envelope = std::log(1.0 / config.epsilon) / params.r;
    const double t_limit = 10.0 * envelope;

    MixingResult out;
    auto tv_at = [&](double t) {
        const double tv = evaluator.tv_distance(t);
        out.scan_times.push_back(t);
        out.scan_tv.push_back(tv);
        return tv;
    };

    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 1;; ++k) {
        hi = config.scan_step * static_cast<double>(k);
        if (hi > t_limit) {
            throw NotConverged("total variation did not fall below epsilon within " + std::to_string(t_limit) +
                               " years; check the quadrature configuration");
        }
        if (tv_at(hi) <= config.epsilon) {
            break;
        }
        lo = hi;
    }
    while (hi - lo > config.time_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (tv_at(mid) <= config.epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.time = hi;
    return out;
}

double mixing_time(const ModelParams& params, const MixingConfig& config) {
    return mixing_time_detailed(params, config).time;
}

}  // namespace mobility
