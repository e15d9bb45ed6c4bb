#pragma once

#include <span>
#include <string>
#include <vector>

#include "mobility/model.hpp"

namespace mobility {

struct YearObservation {
    int year = 0;
    double top1_share = 0.0;   // fraction in (0,1)
    double separations = 0.0;  // workers who left or changed jobs during the year
    double employment = 0.0;   // employed workers
};

enum class RootSelection {
    SmallestTailExponent,  // heaviest admissible tail
};

struct CalibrationConfig {
    double sigma_fixed = 0.2;
    double share_fraction = 0.01;
    double a_lower = 1.0 + 1e-6;
    double a_upper = 100.0;
    double share_tolerance = 1e-10;
    bool hazard_transform = false;
    RootSelection root_selection = RootSelection::SmallestTailExponent;
    // Log-spaced points used to locate sign changes before bisection.
    std::size_t scan_points = 600;

    void validate() const;
};

struct CalibrationResult {
    ModelParams params;
    DerivedCoefficients coeffs;
    double achieved_share = 0.0;
    double share_error = 0.0;     // |achieved - observed|
    std::vector<double> roots;    // every bracketed root, ascending
    double bracket_lower = 0.0;
    double bracket_upper = 0.0;
    std::vector<std::string> warnings;

    bool multiple_roots() const noexcept { return roots.size() > 1; }
};

/// separations / employment, or -ln(1 - separations/employment) under the
/// hazard transform. NonPositiveRate for a zero rate.
double reset_rate(double separations, double employment, const CalibrationConfig& config);

/// Top share along the identification curve b = r / (D a) for fixed r and D.
double share_curve(double a, double r, double D, double share_fraction);

/// Solves top_share(a, r/(D a)) = observed share for a with sigma fixed.
/// NoRoot when no admissible exponent reproduces the share, HeavyTail when
/// only a <= 1 would.
CalibrationResult calibrate_year(const YearObservation& obs, const CalibrationConfig& config);

struct YearCalibration {
    int year = 0;
    CalibrationResult result;
};

struct YearFailure {
    int year = 0;
    std::string kind;
    std::string message;
};

struct PanelCalibration {
    std::vector<YearCalibration> rows;
    std::vector<YearFailure> failures;
};

/// Independent per-year calibration. Failed years are recorded, not fatal.
/// Years must be strictly increasing (DomainError otherwise).
PanelCalibration calibrate_panel(std::span<const YearObservation> panel,
                                 const CalibrationConfig& config, unsigned threads = 1);

}  // namespace mobility
