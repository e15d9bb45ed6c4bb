#pragma once

// Geometric Brownian motion with stochastic resetting (GBM-SR).
//
// Income follows dx = mu x dt + sigma x dW and is reset to x0 at Poisson
// times of rate r. In log-income y = ln(x/x0) this is a drift-diffusion with
// drift v = mu - sigma^2/2 and diffusion coefficient D = sigma^2/2, reset to
// y = 0. Its stationary law is an asymmetric Laplace in y (double Pareto in x)
// with upper exponent a and lower exponent b.
//
// All incomes are measured in units of x0 unless x0 is set explicitly.

namespace mobility {

struct ModelParams {
    double mu = 0.0;     // drift, 1/year
    double sigma = 0.0;  // volatility, 1/sqrt(year)
    double r = 0.0;      // resetting rate, 1/year
    double x0 = 1.0;     // reset income level
};

struct DerivedCoefficients {
    double v = 0.0;       // log-income drift
    double D = 0.0;       // log-income diffusion coefficient
    double lambda = 0.0;  // sqrt(v^2 + 4 D r)
    double a = 0.0;       // upper (Pareto) tail exponent
    double b = 0.0;       // lower tail exponent
    double r = 0.0;       // resetting rate carried along for convenience
};

/// Throws InvalidParams unless sigma > 0, r > 0, x0 > 0 and mu is finite.
void validate(const ModelParams& params);

DerivedCoefficients derive_coefficients(const ModelParams& params);

/// Coefficients of the log-space process directly from (v, D, r). r may be 0
/// here, in which case a and b are not meaningful; used for reset-free
/// propagators.
DerivedCoefficients log_space_coefficients(double v, double D, double r);

/// Rate of exponential decay in distance of the reset-free first-passage
/// Laplace transform: kappa(s) = (sqrt(v^2 + 4 D s) - v) / (2 D).
/// kappa(r) is the upper tail exponent a.
double passage_exponent(double v, double D, double s);

/// Stationary law of GBM-SR. Immutable.
class StationaryDistribution {
public:
    /// Throws InvalidParams unless a > 0, b > 0, x0 > 0.
    StationaryDistribution(double a, double b, double x0 = 1.0);

    static StationaryDistribution from(const DerivedCoefficients& coeffs, double x0 = 1.0);
    static StationaryDistribution from(const ModelParams& params);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double x0() const noexcept { return x0_; }

    /// Density of y = ln(x/x0).
    double log_pdf(double y) const noexcept;
    /// P(Y <= y).
    double log_cdf(double y) const noexcept;
    /// Inverse of log_cdf, closed form.
    double log_quantile(double p) const;

private:
    double a_;
    double b_;
    double x0_;
};

/// Density in income, p_y(ln(x/x0)) / x. DomainError if x <= 0.
double stationary_pdf(const StationaryDistribution& dist, double x);

/// P(X > x). DomainError if x <= 0.
double stationary_survival(const StationaryDistribution& dist, double x);

/// Income at cumulative probability p. DomainError unless 0 < p < 1.
double quantile(const StationaryDistribution& dist, double p);

/// E[X] = x0 a b / ((a - 1)(b + 1)). HeavyTail if a <= 1.
double mean_income(const StationaryDistribution& dist);

/// Fraction of total income held by the richest fraction p of the
/// population. HeavyTail if a <= 1, DomainError unless 0 < p <= 1.
double top_share(const StationaryDistribution& dist, double p);

}  // namespace mobility
