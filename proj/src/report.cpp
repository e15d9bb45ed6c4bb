#include "mobility/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>

#include "mobility/errors.hpp"
#include "mobility/format.hpp"
#include "mobility/mfpt.hpp"
#include "mobility/montecarlo.hpp"
#include "mobility/parallel.hpp"
#include "mobility/rng.hpp"
#include "mobility/svg_chart.hpp"

namespace mobility {

namespace {

std::vector<std::string_view> split(std::string_view text, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(delimiter, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double to_double(std::string_view s, const std::string& what) {
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DomainError("cannot parse " + what + " '" + std::string(s) + "'");
    }
    return value;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return out + "\"";
}

double rounded(double value, int precision) { return std::stod(format_number(value, precision)); }

}  // namespace

std::string PercentilePair::column_name() const {
    return "mfpt_p" + format_number(start * 100.0) + "_p" + format_number(target * 100.0) + "_years";
}

std::vector<PercentilePair> parse_percentile_pairs(std::string_view text) {
    std::vector<PercentilePair> out;
    for (auto item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
            throw DomainError("percentile pair '" + std::string(item) + "' must look like 50:75");
        }
        const double start = to_double(parts[0], "percentile") / 100.0;
        const double target = to_double(parts[1], "percentile") / 100.0;
        if (!(start > 0.0 && target < 1.0 && start < target)) {
            throw DomainError("percentile pair '" + std::string(item) + "' must satisfy 0 < start < target < 100");
        }
        out.push_back({start, target});
    }
    if (out.empty()) {
        throw DomainError("at least one percentile pair is required");
    }
    return out;
}

std::vector<double> SigmaSweep::values() const {
    if (count == 1) {
        return {lower};
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lower + (upper - lower) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

SigmaSweep parse_sigma_sweep(std::string_view text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw DomainError("sigma sweep '" + std::string(text) + "' must look like lo:hi:n");
    }
    SigmaSweep sweep;
    sweep.lower = to_double(parts[0], "sigma");
    sweep.upper = to_double(parts[1], "sigma");
    const double count = to_double(parts[2], "sweep count");
    if (!(sweep.lower > 0.0) || sweep.upper < sweep.lower || !(count >= 1.0) || count != std::floor(count)) {
        throw DomainError("sigma sweep needs 0 < lo <= hi and an integer n >= 1");
    }
    sweep.count = static_cast<std::size_t>(count);
    if (sweep.count == 1 && sweep.upper != sweep.lower) {
        throw DomainError("sigma sweep with n = 1 needs lo == hi");
    }
    return sweep;
}

MobilityReport build_report(const PanelFile& panel, const ReportConfig& config) {
    const auto& rows = panel.rows;
    std::vector<std::optional<MobilityReportRow>> done(rows.size());
    std::vector<std::optional<YearFailure>> failed(rows.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].year <= rows[i - 1].year) {
            throw DomainError("panel years must be strictly increasing");
        }
    }
    parallel_for(rows.size(), config.threads, [&](std::size_t i) {
        try {
            const CalibrationResult cal = calibrate_year(rows[i], config.calibration);
            MobilityReportRow row;
            row.year = rows[i].year;
            row.params = cal.params;
            row.a = cal.coeffs.a;
            row.b = cal.coeffs.b;
            row.share_error = cal.share_error;
            row.warnings = cal.warnings;
            row.mixing_time_years = mixing_time(cal.params, config.mixing);
            for (const auto& pair : config.pairs) {
                row.mfpt_years.push_back(mfpt_percentiles(cal.params, pair.start, pair.target));
            }
            done[i] = std::move(row);
        } catch (const MobilityError& e) {
            failed[i] = YearFailure{rows[i].year, e.kind(), e.what()};
        }
    });
    MobilityReport out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (done[i]) {
            out.rows.push_back(std::move(*done[i]));
        } else {
            out.failures.push_back(std::move(*failed[i]));
        }
    }
    return out;
}

std::string report_header(const std::vector<PercentilePair>& pairs) {
    std::string header = "year,r,mu,sigma,a,b,mixing_time_years";
    for (const auto& pair : pairs) {
        header += "," + pair.column_name();
    }
    return header;
}

std::string report_csv(const MobilityReport& report, const ReportConfig& config) {
    const int digits = config.precision;
    std::string out = report_header(config.pairs) + "\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.year);
        for (double v : {row.params.r, row.params.mu, row.params.sigma, row.a, row.b, row.mixing_time_years}) {
            out += "," + format_number(v, digits);
        }
        for (double v : row.mfpt_years) {
            out += "," + format_number(v, digits);
        }
        out += "\n";
    }
    return out;
}

std::string report_json(const MobilityReport& report, const ReportConfig& config) {
    using nlohmann::json;
    const int digits = config.precision;
    json doc;
    doc["config"] = {
        {"sigma_fixed", rounded(config.calibration.sigma_fixed, digits)},
        {"share_fraction", rounded(config.calibration.share_fraction, digits)},
        {"hazard_transform", config.calibration.hazard_transform},
        {"epsilon", rounded(config.mixing.epsilon, digits)},
    };
    json pairs = json::array();
    for (const auto& pair : config.pairs) {
        pairs.push_back({{"start", rounded(pair.start, digits)}, {"target", rounded(pair.target, digits)}});
    }
    doc["config"]["percentile_pairs"] = pairs;

    json rows = json::array();
    for (const auto& row : report.rows) {
        json mfpt = json::object();
        for (std::size_t k = 0; k < config.pairs.size(); ++k) {
            mfpt[config.pairs[k].column_name()] = rounded(row.mfpt_years[k], digits);
        }
        rows.push_back({
            {"year", row.year},
            {"r", rounded(row.params.r, digits)},
            {"mu", rounded(row.params.mu, digits)},
            {"sigma", rounded(row.params.sigma, digits)},
            {"a", rounded(row.a, digits)},
            {"b", rounded(row.b, digits)},
            {"mixing_time_years", rounded(row.mixing_time_years, digits)},
            {"mfpt", mfpt},
            {"share_error", rounded(row.share_error, digits)},
            {"warnings", row.warnings},
        });
    }
    doc["rows"] = rows;
    json failures = json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"year", f.year}, {"kind", f.kind}, {"message", f.message}});
    }
    doc["failures"] = failures;
    return doc.dump(2) + "\n";
}

std::string failures_csv(const std::vector<YearFailure>& failures) {
    std::string out = "year,kind,message\n";
    for (const auto& f : failures) {
        out += std::to_string(f.year) + "," + csv_quote(f.kind) + "," + csv_quote(f.message) + "\n";
    }
    return out;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_numeric_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (first) {
            for (auto f : fields) {
                table.header.emplace_back(f);
            }
            first = false;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DomainError("ragged CSV row");
        }
        std::vector<double> row;
        for (auto f : fields) {
            row.push_back(to_double(f, "CSV value"));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

ChartSeries series_from(const CsvTable& table, std::size_t x_col, std::size_t y_col, std::string label) {
    ChartSeries s{std::move(label), {}};
    for (const auto& row : table.rows) {
        s.points.emplace_back(row[x_col], row[y_col]);
    }
    return s;
}

std::size_t require_column(const CsvTable& table, std::string_view name) {
    const auto col = table.column(name);
    if (!col) {
        throw DomainError("report table lacks column '" + std::string(name) + "'");
    }
    return *col;
}

}  // namespace

std::string mixing_chart_svg(const CsvTable& table) {
    LineChart chart;
    chart.title = "Mixing time per year";
    chart.x_label = "year";
    chart.y_label = "mixing time (years)";
    chart.series.push_back(
        series_from(table, require_column(table, "year"), require_column(table, "mixing_time_years"), "mixing time"));
    return render_svg(chart);
}

std::string mfpt_chart_svg(const CsvTable& table) {
    LineChart chart;
    chart.title = "Mean first passage time per year";
    chart.x_label = "year";
    chart.y_label = "MFPT (years)";
    const std::size_t x = require_column(table, "year");
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& name = table.header[c];
        if (name.rfind("mfpt_", 0) == 0) {
            // mfpt_p50_p75_years -> p50 -> p75
            std::string label = name.substr(5, name.size() - 5 - 6);
            std::replace(label.begin(), label.end(), '_', ' ');
            const auto space = label.find(' ');
            if (space != std::string::npos) {
                label.replace(space, 1, " -> ");
            }
            chart.series.push_back(series_from(table, x, c, label));
        }
    }
    return render_svg(chart);
}

std::string sigma_sweep_csv(const PanelFile& panel, const ReportConfig& config) {
    if (!config.sigma_sweep) {
        return {};
    }
    const int digits = config.precision;
    std::string out = "sigma,year,a,b,mu,mixing_time_years";
    for (const auto& pair : config.pairs) {
        out += "," + pair.column_name();
    }
    out += ",status\n";
    for (double sigma : config.sigma_sweep->values()) {
        ReportConfig local = config;
        local.calibration.sigma_fixed = sigma;
        const MobilityReport report = build_report(panel, local);
        std::size_t ok = 0;
        std::size_t bad = 0;
        for (const auto& obs : panel.rows) {
            out += format_number(sigma, digits) + "," + std::to_string(obs.year);
            if (ok < report.rows.size() && report.rows[ok].year == obs.year) {
                const auto& row = report.rows[ok++];
                for (double v : {row.a, row.b, row.params.mu, row.mixing_time_years}) {
                    out += "," + format_number(v, digits);
                }
                for (double v : row.mfpt_years) {
                    out += "," + format_number(v, digits);
                }
                out += row.warnings.empty() ? ",ok\n" : ",ok-multiple-roots\n";
            } else {
                for (std::size_t k = 0; k < 4 + config.pairs.size(); ++k) {
                    out += ",";
                }
                out += "," + report.failures[bad++].kind + "\n";
            }
        }
    }
    return out;
}

std::string validation_csv(const PanelFile& panel, const MobilityReport& report, const ReportConfig& config) {
    const int digits = config.precision;
    const double p = config.calibration.share_fraction;
    std::string out = "year,top1_share_observed,top1_share_model,top1_share_simulated\n";
    std::size_t obs = 0;
    for (const auto& row : report.rows) {
        while (panel.rows[obs].year != row.year) {
            ++obs;
        }
        const double burn_in = 20.0 / row.params.r;
        const auto seed = mix_seed(config.seed ^ static_cast<std::uint64_t>(row.year));
        const auto samples = sample_stationary(row.params, config.validation_paths, burn_in, seed, config.threads);
        const double model = top_share(StationaryDistribution(row.a, row.b), p);
        out += std::to_string(row.year) + "," + format_number(panel.rows[obs].top1_share, digits) + "," +
               format_number(model, digits) + "," + format_number(empirical_top_share(samples, p), digits) + "\n";
    }
    return out;
}

std::string params_csv(const PanelCalibration& calibration, int precision) {
    std::string out = "year,r,mu,sigma,a,b,share_error,n_roots,warnings\n";
    for (const auto& [year, cal] : calibration.rows) {
        out += std::to_string(year);
        for (double v : {cal.params.r, cal.params.mu, cal.params.sigma, cal.coeffs.a, cal.coeffs.b, cal.share_error}) {
            out += "," + format_number(v, precision);
        }
        std::string warnings;
        for (const auto& w : cal.warnings) {
            warnings += (warnings.empty() ? "" : "; ") + w;
        }
        out += "," + std::to_string(cal.roots.size()) + "," + csv_quote(warnings) + "\n";
    }
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                out.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back();
        } else if (ch != '\r') {
            out.back() += ch;
        }
    }
    return out;
}

std::vector<YearParams> parse_params_csv(std::string_view text, const std::string& source) {
    std::vector<YearParams> out;
    std::vector<std::string> header;
    std::size_t c_year = 0, c_r = 0, c_mu = 0, c_sigma = 0;
    std::size_t row = 0;
    for (auto line : split(text, '\n')) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (header.empty()) {
            header = fields;
            auto col = [&](const char* name) {
                const auto it = std::find(header.begin(), header.end(), name);
                if (it == header.end()) {
                    throw ParseError(source, row, std::string("missing column '") + name + "'");
                }
                return static_cast<std::size_t>(it - header.begin());
            };
            c_year = col("year");
            c_r = col("r");
            c_mu = col("mu");
            c_sigma = col("sigma");
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError(source, row, "expected " + std::to_string(header.size()) + " fields");
        }
        try {
            YearParams yp;
            yp.year = static_cast<int>(to_double(fields[c_year], "year"));
            yp.params.r = to_double(fields[c_r], "r");
            yp.params.mu = to_double(fields[c_mu], "mu");
            yp.params.sigma = to_double(fields[c_sigma], "sigma");
            validate(yp.params);
            out.push_back(yp);
        } catch (const MobilityError& e) {
            throw ParseError(source, row, e.what());
        }
    }
    if (header.empty()) {
        throw ParseError(source, 1, "empty parameters file");
    }
    return out;
}

std::vector<std::filesystem::path> write_files_atomically(
    const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) {
            fs::remove(t, ec);
        }
    };
    for (const auto& [name, content] : files) {
        const fs::path tmp = dir / (name + ".partial");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        out.close();
        if (!out) {
            cleanup();
            throw IoError("cannot write " + tmp.string());
        }
    }
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const fs::path final_path = dir / files[i].first;
        fs::rename(temps[i], final_path, ec);
        if (ec) {
            for (const auto& w : written) {
                fs::remove(w, ec);
            }
            cleanup();
            throw IoError("cannot move output into place at " + final_path.string());
        }
        written.push_back(final_path);
    }
    return written;
}

ReportOutcome run_report(const std::filesystem::path& input, const std::filesystem::path& output_dir,
                         const ReportConfig& config) {
    ReportOutcome outcome;
    try {
        const PanelFile panel = load_panel(input);
        if (panel.rows.empty()) {
            outcome.exit_code = 1;
            outcome.error = input.string() + ": panel has no rows";
            return outcome;
        }
        const MobilityReport report = build_report(panel, config);
        outcome.failures = report.failures;
        if (report.rows.empty()) {
            outcome.exit_code = 1;
            outcome.error = "every year failed; nothing to report";
            return outcome;
        }

        std::vector<std::pair<std::string, std::string>> files;
        const std::string csv = report_csv(report, config);
        const CsvTable table = parse_numeric_csv(csv);  // charts see only the CSV contents
        files.emplace_back("report.csv", csv);
        files.emplace_back("mixing_time.svg", mixing_chart_svg(table));
        files.emplace_back("mfpt.svg", mfpt_chart_svg(table));
        if (config.write_json) {
            files.emplace_back("report.json", report_json(report, config));
        }
        if (config.sigma_sweep) {
            files.emplace_back("sigma_sweep.csv", sigma_sweep_csv(panel, config));
        }
        if (config.validation_paths > 0) {
            files.emplace_back("validation.csv", validation_csv(panel, report, config));
        }
        if (!report.failures.empty()) {
            files.emplace_back("failures.csv", failures_csv(report.failures));
        }
        outcome.files = write_files_atomically(output_dir, files);
        outcome.exit_code = report.failures.empty() ? 0 : 2;
    } catch (const MobilityError& e) {
        outcome.exit_code = 1;
        outcome.error = e.what();
        outcome.files.clear();
    }
    return outcome;
}

}  // namespace mobility
