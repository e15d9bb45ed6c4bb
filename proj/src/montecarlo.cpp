#include "mobility/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"
#include "mobility/mfpt.hpp"
#include "mobility/parallel.hpp"
#include "mobility/rng.hpp"

namespace mobility {

namespace {

enum Stream : std::uint32_t {
    kResets = 0,
    kIncrements = 1,
    kBridge = 2,
    kRefineBase = 3,  // level l uses kRefineBase + l - 1
};

constexpr unsigned kMaxRefineLevels = 12;

// Bridge crossings with probability below e^-40 are not sampled.
constexpr double kNegligibleCrossing = 40.0;

}  // namespace

void SimConfig::validate() const {
    if (n_paths == 0) {
        throw InvalidParams("n_paths must be positive");
    }
    if (!(dt > 0.0)) {
        throw InvalidParams("dt must be positive");
    }
    if (!(horizon > 0.0)) {
        throw InvalidParams("horizon must be positive");
    }
    if (fpt_horizon_cap && !(*fpt_horizon_cap > 0.0)) {
        throw InvalidParams("fpt_horizon_cap must be positive");
    }
    if (refine_levels > kMaxRefineLevels) {
        throw InvalidParams("refine_levels must not exceed " + std::to_string(kMaxRefineLevels));
    }
}

std::vector<double> sample_stationary(const ModelParams& params, std::size_t n, double burn_in,
                                      std::uint64_t seed, unsigned threads) {
    const DerivedCoefficients c = derive_coefficients(params);
    if (!(burn_in >= 10.0 / params.r)) {
        throw DomainError("burn-in " + format_number(burn_in) + " shorter than 10/r = " +
                          format_number(10.0 / params.r));
    }
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t path) {
        PathStream resets(seed, path, kResets);
        PathStream increments(seed, path, kIncrements);
        double last_reset = 0.0;
        for (double t = resets.exponential(params.r); t < burn_in; t += resets.exponential(params.r)) {
            last_reset = t;
        }
        const double age = burn_in - last_reset;
        const double y = c.v * age + std::sqrt(2.0 * c.D * age) * increments.normal();
        out[path] = params.x0 * std::exp(y);
    });
    return out;
}

double empirical_top_share(std::span<const double> samples, double p) {
    if (samples.empty()) {
        throw DomainError("empirical top share needs a non-empty sample");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError("top fraction must lie in (0,1]");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double n = static_cast<double>(sorted.size());
    const double raw = p * n;
    const double nearest = std::round(raw);
    const auto k = static_cast<std::size_t>(std::abs(raw - nearest) < 1e-9 * n ? nearest : std::ceil(raw));
    double top = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        total += sorted[i];
        if (i < k) {
            top += sorted[i];
        }
    }
    return top / total;
}

SimResult sample_mean(std::span<const double> samples) {
    if (samples.empty()) {
        throw DomainError("sample mean needs a non-empty sample");
    }
    SimResult out;
    double sum = 0.0;
    for (double x : samples) {
        sum += x;
    }
    const double n = static_cast<double>(samples.size());
    out.estimate = sum / n;
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - out.estimate) * (x - out.estimate);
    }
    out.standard_error = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out.n_effective = samples.size();
    return out;
}

namespace {

struct PassageOutcome {
    double time = 0.0;
    bool truncated = false;
};

class PassageSimulator {
public:
    PassageSimulator(const DerivedCoefficients& c, double y_start, double barrier, double cap,
                     const SimConfig& config)
        : c_(c), y_start_(y_start), barrier_(barrier), cap_(cap), config_(config),
          fine_(std::size_t{1} << config.refine_levels) {}

    PassageOutcome run(std::size_t path) {
        if (y_start_ >= barrier_) {
            return {0.0, false};
        }
        const std::uint64_t seed = config_.seed;
        PathStream resets(seed, path, kResets);
        PathStream increments(seed, path, kIncrements);
        PathStream bridge(seed, path, kBridge);
        std::vector<PathStream> refine;
        refine.reserve(config_.refine_levels);
        for (unsigned l = 0; l < config_.refine_levels; ++l) {
            refine.emplace_back(seed, path, kRefineBase + l);
        }
        std::vector<double> points(fine_ + 1);

        double t = 0.0;
        double y = y_start_;
        double next_reset = resets.exponential(c_.r);
        while (true) {
            const double segment_end = std::min(next_reset, cap_);
            while (t < segment_end) {
                const double h = std::min(config_.dt, segment_end - t);
                points.front() = y;
                points.back() = y + c_.v * h + std::sqrt(2.0 * c_.D * h) * increments.normal();
                refine_path(points, h, refine);
                const double hs = h / static_cast<double>(fine_);
                for (std::size_t j = 0; j < fine_; ++j) {
                    const double ya = points[j];
                    const double yb = points[j + 1];
                    const double t_end = t + hs * static_cast<double>(j + 1);
                    if (yb >= barrier_) {
                        return {t_end, false};
                    }
                    if (config_.bridge_correction) {
                        // Probability that the Brownian bridge between the two
                        // samples touched the barrier (variance rate 2D).
                        const double exponent = (barrier_ - ya) * (barrier_ - yb) / (c_.D * hs);
                        if (exponent < kNegligibleCrossing && bridge.uniform() < std::exp(-exponent)) {
                            return {t_end, false};
                        }
                    }
                }
                y = points.back();
                t += h;
            }
            if (t >= cap_) {
                return {cap_, true};
            }
            y = 0.0;
            next_reset = t + resets.exponential(c_.r);
        }
    }

private:
    // Fills interior points of a coarse step by midpoint refinement.
    void refine_path(std::vector<double>& points, double h, std::vector<PathStream>& refine) const {
        std::size_t half = fine_ / 2;
        for (unsigned level = 0; half >= 1; ++level, half /= 2) {
            const double parent = h * static_cast<double>(2 * half) / static_cast<double>(fine_);
            const double sd = std::sqrt(2.0 * c_.D * parent / 4.0);
            for (std::size_t j = half; j < fine_; j += 2 * half) {
                points[j] = 0.5 * (points[j - half] + points[j + half]) + sd * refine[level].normal();
            }
        }
    }

    DerivedCoefficients c_;
    double y_start_;
    double barrier_;
    double cap_;
    const SimConfig& config_;
    std::size_t fine_;
};

}  // namespace

SimResult empirical_mfpt(const ModelParams& params, double x_start, double x_target, const SimConfig& config) {
    config.validate();
    const double analytic = mfpt_levels(params, x_start, x_target);  // validates the query
    const DerivedCoefficients c = derive_coefficients(params);
    SimResult out;
    if (x_start == x_target) {
        out.n_effective = config.n_paths;
        return out;
    }
    const double cap = config.fpt_horizon_cap.value_or(50.0 * analytic);
    const double y_start = std::log(x_start / params.x0);
    const double barrier = std::log(x_target / params.x0);

    std::vector<PassageOutcome> outcomes(config.n_paths);
    parallel_for(config.n_paths, config.threads, [&](std::size_t path) {
        PassageSimulator sim(c, y_start, barrier, cap, config);
        outcomes[path] = sim.run(path);
    });

    std::vector<double> times(outcomes.size());
    std::size_t truncated = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        times[i] = outcomes[i].time;
        truncated += outcomes[i].truncated ? 1 : 0;
    }
    out = sample_mean(times);
    out.n_effective = config.n_paths - truncated;
    out.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(config.n_paths);
    if (out.truncated_fraction > 1e-4) {
        out.warnings.push_back("truncated fraction " + format_number(out.truncated_fraction) +
                               " exceeds 1e-4; estimate is biased low");
    }
    return out;
}

namespace {

double quantile_of_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

EmpiricalTv empirical_tv(const ModelParams& params, std::span<const double> times, const SimConfig& config) {
    config.validate();
    const DerivedCoefficients c = derive_coefficients(params);
    for (double t : times) {
        if (!(t > 0.0)) {
            throw DomainError("empirical_tv times must be positive");
        }
    }
    const StationaryDistribution dist = StationaryDistribution::from(c, params.x0);
    const std::size_t n = config.n_paths;

    // Freedman-Diaconis width from a stationary reference sample.
    std::vector<double> reference =
        sample_stationary(params, n, std::max(config.horizon, 10.0 / params.r), mix_seed(config.seed), config.threads);
    for (double& x : reference) {
        x = std::log(x / params.x0);
    }
    std::sort(reference.begin(), reference.end());
    const double iqr = quantile_of_sorted(reference, 0.75) - quantile_of_sorted(reference, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));

    // Bin range: stationary bulk plus the cohort's Gaussian at the latest time.
    const double t_max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    const double spread = 6.0 * std::sqrt(2.0 * c.D * t_max);
    const double lo = std::min(dist.log_quantile(1e-7), std::min(0.0, c.v * t_max) - spread);
    const double hi = std::max(dist.log_quantile(1.0 - 1e-7), std::max(0.0, c.v * t_max) + spread);
    const auto inner = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    const std::size_t bins = inner + 2;
    auto bin_of = [&](double y) -> std::size_t {
        if (y < lo) {
            return 0;
        }
        const auto k = static_cast<std::size_t>((y - lo) / width);
        return k >= inner ? bins - 1 : k + 1;
    };

    std::vector<double> stationary_prob(bins);
    {
        double prev = 0.0;
        for (std::size_t k = 0; k + 1 < bins; ++k) {
            const double edge = lo + width * static_cast<double>(k);
            const double cdf = dist.log_cdf(edge);
            stationary_prob[k] = cdf - prev;
            prev = cdf;
        }
        stationary_prob[bins - 1] = 1.0 - prev;
    }

    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return times[x] < times[y]; });

    // Bin index of every path at every time; counts are integers, so the
    // reduction is exact and order-independent.
    const std::size_t m = times.size();
    std::vector<std::uint32_t> assignment(n * m);
    parallel_for(n, config.threads, [&](std::size_t path) {
        PathStream resets(config.seed, path, kResets);
        PathStream increments(config.seed, path, kIncrements);
        double t = 0.0;
        double y = 0.0;
        double next_reset = resets.exponential(params.r);
        for (std::size_t idx : order) {
            const double target = times[idx];
            while (next_reset <= target) {
                t = next_reset;
                y = 0.0;
                next_reset += resets.exponential(params.r);
            }
            const double h = target - t;
            if (h > 0.0) {
                y += c.v * h + std::sqrt(2.0 * c.D * h) * increments.normal();
                t = target;
            }
            assignment[path * m + idx] = static_cast<std::uint32_t>(bin_of(y));
        }
    });

    EmpiricalTv out;
    out.bin_width = width;
    out.bins = bins;
    double floor = 0.0;
    for (double p : stationary_prob) {
        floor += std::sqrt(2.0 * p * (1.0 - p) / (std::numbers::pi * static_cast<double>(n)));
    }
    floor *= 0.5;
    std::vector<std::size_t> counts(bins);
    for (std::size_t idx = 0; idx < m; ++idx) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t path = 0; path < n; ++path) {
            ++counts[assignment[path * m + idx]];
        }
        double l1 = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            l1 += std::abs(static_cast<double>(counts[k]) / static_cast<double>(n) - stationary_prob[k]);
        }
        out.points.push_back({times[idx], 0.5 * l1, floor});
    }
    return out;
}

}  // namespace mobility
