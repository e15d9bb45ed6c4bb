#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mobility/calibration.hpp"
#include "mobility/mixing.hpp"
#include "mobility/panel.hpp"

namespace mobility {

// Full yearly pipeline: calibrate each year, then convert its parameters into
// a mixing time and MFPTs between percentile pairs.

struct PercentilePair {
    double start = 0.5;   // cumulative probability
    double target = 0.75;

    /// mfpt_p50_p75_years style column name.
    std::string column_name() const;
};

/// "50:75,50:90" -> {{0.50,0.75},{0.50,0.90}}. Percent units, start < target.
std::vector<PercentilePair> parse_percentile_pairs(std::string_view text);

struct SigmaSweep {
    double lower = 0.1;
    double upper = 0.4;
    std::size_t count = 4;

    std::vector<double> values() const;
};

/// "lo:hi:n" with 0 < lo <= hi and n >= 1 (n = 1 requires lo == hi).
SigmaSweep parse_sigma_sweep(std::string_view text);

struct ReportConfig {
    CalibrationConfig calibration;
    MixingConfig mixing;
    std::vector<PercentilePair> pairs{{0.50, 0.75}, {0.50, 0.90}};
    std::optional<SigmaSweep> sigma_sweep;
    int precision = 6;               // significant digits in every output file
    unsigned threads = 1;
    std::uint64_t seed = 1;
    std::size_t validation_paths = 0;  // > 0 writes a Monte Carlo top-share check
    bool write_json = false;
};

struct MobilityReportRow {
    int year = 0;
    ModelParams params;
    double a = 0.0;
    double b = 0.0;
    double mixing_time_years = 0.0;
    std::vector<double> mfpt_years;  // one per percentile pair
    double share_error = 0.0;
    std::vector<std::string> warnings;
};

struct MobilityReport {
    std::vector<MobilityReportRow> rows;
    std::vector<YearFailure> failures;
};

/// Years are independent and may be processed concurrently; rows come back in
/// panel order. A year that fails at any stage is listed in `failures`.
MobilityReport build_report(const PanelFile& panel, const ReportConfig& config);

std::string report_header(const std::vector<PercentilePair>& pairs);
std::string report_csv(const MobilityReport& report, const ReportConfig& config);
std::string report_json(const MobilityReport& report, const ReportConfig& config);
std::string failures_csv(const std::vector<YearFailure>& failures);

/// Numeric CSV as read back for charting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable parse_numeric_csv(std::string_view text);

std::string mixing_chart_svg(const CsvTable& report_table);
std::string mfpt_chart_svg(const CsvTable& report_table);

/// Long table: one row per (sigma, year); failed cells marked in `status`.
std::string sigma_sweep_csv(const PanelFile& panel, const ReportConfig& config);

/// Observed vs model vs simulated top shares per calibrated year.
std::string validation_csv(const PanelFile& panel, const MobilityReport& report, const ReportConfig& config);

/// Parameters table written by `calibrate`:
/// year,r,mu,sigma,a,b,share_error,n_roots,warnings
std::string params_csv(const PanelCalibration& calibration, int precision = 6);

struct YearParams {
    int year = 0;
    ModelParams params;
};

/// Reads year, r, mu and sigma back from a parameters table (other columns
/// are ignored). x0 is 1.
std::vector<YearParams> parse_params_csv(std::string_view text, const std::string& source);

/// Quote-aware split of one CSV line.
std::vector<std::string> split_csv_line(std::string_view line);

struct ReportOutcome {
    int exit_code = 0;  // 0 success, 1 fatal error, 2 some years failed
    std::vector<std::filesystem::path> files;
    std::vector<YearFailure> failures;
    std::string error;
};

/// Runs the pipeline on a normalized panel and writes report.csv, the two
/// charts, and optional json, sweep and validation files. Nothing is written
/// when the run fails fatally.
ReportOutcome run_report(const std::filesystem::path& input, const std::filesystem::path& output_dir,
                         const ReportConfig& config);

/// Writes every (name, content) pair into dir via temporary files and renames.
/// Either all files appear or none do.
std::vector<std::filesystem::path> write_files_atomically(
    const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace mobility
