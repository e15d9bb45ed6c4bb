#include "mobility/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"

namespace mobility {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(unquote(line.substr(start)));
            return out;
        }
        out.push_back(unquote(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

// Lines with their 1-based line numbers; blank lines are dropped.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find('\n', start);
        const std::string_view line = text.substr(start, pos == std::string_view::npos ? text.size() - start : pos - start);
        ++number;
        if (!trim(line).empty()) {
            out.emplace_back(number, line);
        }
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view field, const std::string& source, std::size_t row, const std::string& column) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError(source, row, "column '" + column + "': cannot parse '" + std::string(field) + "' as a number");
    }
    return value;
}

int parse_year(std::string_view field, const std::string& source, std::size_t row, const std::string& column) {
    int value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError(source, row, "column '" + column + "': cannot parse '" + std::string(field) + "' as a year");
    }
    return value;
}

void check_share(double share, const std::string& source, std::size_t row) {
    if (share > 1.0 && share <= 100.0) {
        throw ValidationError(source, row,
                              "top1_share " + format_number(share) +
                                  " share looks like a percent; shares must be fractions in (0,1)");
    }
    if (!(share > 0.0 && share < 1.0)) {
        throw ValidationError(source, row, "top1_share " + format_number(share) + " outside (0,1)");
    }
}

void check_counts(double separations, double employment, const std::string& source, std::size_t row) {
    if (!(separations >= 0.0)) {
        throw ValidationError(source, row, "separations must be non-negative");
    }
    if (!(employment > 0.0)) {
        throw ValidationError(source, row, "employment must be positive");
    }
}

void check_year_order(int previous, int year, const std::string& source, std::size_t row) {
    if (year == previous) {
        throw ValidationError(source, row, "duplicate year " + std::to_string(year));
    }
    if (year < previous) {
        throw ValidationError(source, row, "years not strictly increasing (" + std::to_string(year) + " after " +
                                                std::to_string(previous) + ")");
    }
}

void expect_header(std::string_view got, std::string_view want, const std::string& source, std::size_t row) {
    if (trim(got) != want) {
        throw ParseError(source, row, "expected header '" + std::string(want) + "', got '" + std::string(trim(got)) + "'");
    }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading " + path.string());
    }
    return buf.str();
}

void validate_panel(const PanelFile& panel) {
    // Row numbers count the header as row 1, matching parse_panel.
    for (std::size_t i = 0; i < panel.rows.size(); ++i) {
        const auto& obs = panel.rows[i];
        const std::size_t row = i + 2;
        check_share(obs.top1_share, panel.source, row);
        check_counts(obs.separations, obs.employment, panel.source, row);
        if (i > 0) {
            check_year_order(panel.rows[i - 1].year, obs.year, panel.source, row);
        }
    }
}

PanelFile parse_panel(std::string_view text, const std::string& source) {
    const auto lines = lines_of(text);
    if (lines.empty()) {
        throw ParseError(source, 1, "empty file; expected header '" + std::string(kPanelHeader) + "'");
    }
    expect_header(lines.front().second, kPanelHeader, source, lines.front().first);

    PanelFile panel;
    panel.source = source;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [row, line] = lines[i];
        const auto fields = split(line, ',');
        if (fields.size() != 4) {
            throw ParseError(source, row, "expected 4 fields, got " + std::to_string(fields.size()));
        }
        YearObservation obs;
        obs.year = parse_year(fields[0], source, row, "year");
        obs.top1_share = parse_double(fields[1], source, row, "top1_share");
        obs.separations = parse_double(fields[2], source, row, "separations");
        obs.employment = parse_double(fields[3], source, row, "employment");
        check_share(obs.top1_share, source, row);
        check_counts(obs.separations, obs.employment, source, row);
        if (!panel.rows.empty()) {
            check_year_order(panel.rows.back().year, obs.year, source, row);
        }
        panel.rows.push_back(obs);
    }
    return panel;
}

PanelFile load_panel(const std::filesystem::path& path) {
    return parse_panel(read_text_file(path), path.string());
}

std::string format_panel(const PanelFile& panel) {
    std::string out(kPanelHeader);
    out += '\n';
    for (const auto& obs : panel.rows) {
        out += std::to_string(obs.year) + ',' + format_exact(obs.top1_share) + ',' + format_exact(obs.separations) +
               ',' + format_exact(obs.employment) + '\n';
    }
    return out;
}

void write_panel(const std::filesystem::path& path, const PanelFile& panel) {
    validate_panel(panel);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << format_panel(panel);
    if (!out) {
        throw IoError("error writing " + path.string());
    }
}

std::map<int, double> parse_wid_long(std::string_view text, const std::string& source,
                                     const std::string& variable_code, const std::string& percentile_code,
                                     const std::string& country_code, const WidLongOptions& options) {
    const auto lines = lines_of(text);
    if (lines.empty()) {
        throw ParseError(source, 1, "empty file");
    }
    const auto header = split(lines.front().second, options.delimiter);
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ParseError(source, lines.front().first, "missing column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_country = column(options.country_column);
    const std::size_t c_variable = column(options.variable_column);
    const std::size_t c_percentile = column(options.percentile_column);
    const std::size_t c_year = column(options.year_column);
    const std::size_t c_value = column(options.value_column);
    const std::size_t needed = std::max({c_country, c_variable, c_percentile, c_year, c_value}) + 1;

    std::map<int, double> series;
    std::map<int, std::size_t> first_row;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [row, line] = lines[i];
        const auto fields = split(line, options.delimiter);
        if (fields.size() < needed) {
            throw ParseError(source, row, "expected at least " + std::to_string(needed) + " fields, got " +
                                              std::to_string(fields.size()));
        }
        if (fields[c_country] != country_code || fields[c_variable] != variable_code ||
            fields[c_percentile] != percentile_code) {
            continue;
        }
        const int year = parse_year(fields[c_year], source, row, options.year_column);
        double value = parse_double(fields[c_value], source, row, options.value_column);
        if (options.values_in_percent) {
            value /= 100.0;
        }
        check_share(value, source, row);
        const auto [it, inserted] = series.emplace(year, value);
        if (!inserted && it->second != value) {
            throw ValidationError(source, row,
                                  "ambiguous source: year " + std::to_string(year) + " already has value " +
                                      format_number(it->second) + " (row " + std::to_string(first_row[year]) + ")");
        }
        first_row.emplace(year, row);
    }
    if (series.empty()) {
        throw MissingSeries(source + ": no rows for country '" + country_code + "', variable '" + variable_code +
                            "', percentile '" + percentile_code + "'");
    }
    return series;
}

std::map<int, double> adapt_wid_long(const std::filesystem::path& path, const std::string& variable_code,
                                     const std::string& percentile_code, const std::string& country_code,
                                     const WidLongOptions& options) {
    return parse_wid_long(read_text_file(path), path.string(), variable_code, percentile_code, country_code, options);
}

std::vector<LaborFlow> parse_labor_flows(std::string_view text, const std::string& source) {
    const auto lines = lines_of(text);
    if (lines.empty()) {
        throw ParseError(source, 1, "empty file; expected header '" + std::string(kLaborFlowHeader) + "'");
    }
    expect_header(lines.front().second, kLaborFlowHeader, source, lines.front().first);
    std::vector<LaborFlow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto [row, line] = lines[i];
        const auto fields = split(line, ',');
        if (fields.size() != 3) {
            throw ParseError(source, row, "expected 3 fields, got " + std::to_string(fields.size()));
        }
        LaborFlow flow{parse_year(fields[0], source, row, "year"), parse_double(fields[1], source, row, "separations"),
                       parse_double(fields[2], source, row, "employment")};
        check_counts(flow.separations, flow.employment, source, row);
        if (!out.empty()) {
            check_year_order(out.back().year, flow.year, source, row);
        }
        out.push_back(flow);
    }
    return out;
}

std::vector<LaborFlow> load_labor_flows(const std::filesystem::path& path) {
    return parse_labor_flows(read_text_file(path), path.string());
}

MergedPanel merge_panel(const std::map<int, double>& shares, std::span<const LaborFlow> flows,
                        const std::string& source) {
    MergedPanel out;
    out.panel.source = source;
    std::set<int> flow_years;
    for (const auto& flow : flows) {
        flow_years.insert(flow.year);
        const auto it = shares.find(flow.year);
        if (it == shares.end()) {
            out.unmatched_years.push_back(flow.year);
            continue;
        }
        out.panel.rows.push_back({flow.year, it->second, flow.separations, flow.employment});
    }
    for (const auto& [year, share] : shares) {
        if (!flow_years.contains(year)) {
            out.unmatched_years.push_back(year);
        }
    }
    std::sort(out.unmatched_years.begin(), out.unmatched_years.end());
    std::sort(out.panel.rows.begin(), out.panel.rows.end(),
              [](const YearObservation& x, const YearObservation& y) { return x.year < y.year; });
    validate_panel(out.panel);
    return out;
}

}  // namespace mobility
