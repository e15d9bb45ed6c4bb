#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobility/calibration.hpp"

namespace mobility {

// Yearly input panel.
//
// The normalized CSV is the one input contract:
//     year,top1_share,separations,employment
// UTF-8, '.' decimal separator, no thousands separators, shares as fractions.
// Other sources (WID long exports, labor-flow tables) are converted into it.

inline constexpr std::string_view kPanelHeader = "year,top1_share,separations,employment";

struct PanelFile {
    std::vector<YearObservation> rows;
    std::string source;                    // file path or label
    std::string format = "normalized-csv";
};

/// Throws ValidationError (naming source, row and constraint) on the first
/// violated panel invariant.
void validate_panel(const PanelFile& panel);

PanelFile parse_panel(std::string_view text, const std::string& source);
PanelFile load_panel(const std::filesystem::path& path);

/// Canonical text: the header, then one line per row with shortest
/// round-trip number formatting.
std::string format_panel(const PanelFile& panel);
void write_panel(const std::filesystem::path& path, const PanelFile& panel);

struct WidLongOptions {
    char delimiter = ';';
    std::string country_column = "country";
    std::string variable_column = "variable";
    std::string percentile_column = "percentile";
    std::string year_column = "year";
    std::string value_column = "value";
    // WID publishes shares as fractions; set when a file carries percents.
    bool values_in_percent = false;
};

/// Year -> share (fraction) for one (variable, percentile, country) series.
std::map<int, double> parse_wid_long(std::string_view text, const std::string& source,
                                     const std::string& variable_code, const std::string& percentile_code,
                                     const std::string& country_code, const WidLongOptions& options = {});
std::map<int, double> adapt_wid_long(const std::filesystem::path& path, const std::string& variable_code,
                                     const std::string& percentile_code, const std::string& country_code,
                                     const WidLongOptions& options = {});

struct LaborFlow {
    int year = 0;
    double separations = 0.0;
    double employment = 0.0;
};

inline constexpr std::string_view kLaborFlowHeader = "year,separations,employment";

std::vector<LaborFlow> parse_labor_flows(std::string_view text, const std::string& source);
std::vector<LaborFlow> load_labor_flows(const std::filesystem::path& path);

struct MergedPanel {
    PanelFile panel;
    std::vector<int> unmatched_years;  // present in only one of the inputs
};

/// Joins shares and flows on year; years missing from either side are listed,
/// not guessed.
MergedPanel merge_panel(const std::map<int, double>& shares, std::span<const LaborFlow> flows,
                        const std::string& source);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace mobility
