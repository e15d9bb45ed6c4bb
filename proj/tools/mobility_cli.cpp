// mobility_cli: yearly income-mobility pipeline for GBM with stochastic resetting.
//
//   calibrate  panel -> per-year parameters
//   mixing     parameters -> mixing time
//   mfpt       parameters -> mean first passage times
//   simulate   Monte Carlo oracle runs
//   report     full pipeline with CSV/JSON/SVG outputs
//   ingest     WID long export + labor-flow table -> normalized panel

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "mobility/calibration.hpp"
#include "mobility/errors.hpp"
#include "mobility/format.hpp"
#include "mobility/mfpt.hpp"
#include "mobility/mixing.hpp"
#include "mobility/montecarlo.hpp"
#include "mobility/panel.hpp"
#include "mobility/report.hpp"

namespace fs = std::filesystem;
using namespace mobility;

namespace {

struct ParamSource {
    std::string params_file;
    std::optional<double> mu;
    std::optional<double> sigma;
    std::optional<double> r;

    void add_to(CLI::App* app) {
        app->add_option("--params", params_file, "Parameters CSV written by `calibrate`");
        app->add_option("--mu", mu, "Drift (1/year) for a single parameter set");
        app->add_option("--sigma", sigma, "Volatility (1/sqrt(year))");
        app->add_option("--r", r, "Resetting rate (1/year)");
    }

    std::vector<YearParams> load() const {
        if (!params_file.empty()) {
            return parse_params_csv(read_text_file(params_file), params_file);
        }
        if (!mu || !sigma || !r) {
            throw InvalidParams("give either --params FILE or all of --mu, --sigma, --r");
        }
        ModelParams p{*mu, *sigma, *r, 1.0};
        validate(p);
        return {YearParams{0, p}};
    }
};

struct Output {
    std::string output_dir;
    std::string format = "csv";
    int precision = 6;

    void add_to(CLI::App* app) {
        app->add_option("--output-dir", output_dir, "Directory for output files (default: stdout)");
        app->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--precision", precision, "Significant digits in numeric output")->check(CLI::Range(1, 17));
    }

    // Emits a rectangular table as CSV or JSON records.
    void emit(const std::string& name, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) const {
        std::string text;
        if (format == "json") {
            nlohmann::json doc = nlohmann::json::array();
            for (const auto& row : rows) {
                nlohmann::json rec = nlohmann::json::object();
                for (std::size_t i = 0; i < header.size(); ++i) {
                    char* end = nullptr;
                    const double v = std::strtod(row[i].c_str(), &end);
                    if (!row[i].empty() && end && *end == '\0') {
                        rec[header[i]] = v;
                    } else {
                        rec[header[i]] = row[i];
                    }
                }
                doc.push_back(rec);
            }
            text = doc.dump(2) + "\n";
        } else {
            for (std::size_t i = 0; i < header.size(); ++i) {
                text += (i ? "," : "") + header[i];
            }
            text += "\n";
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    text += (i ? "," : "") + row[i];
                }
                text += "\n";
            }
        }
        write(name + "." + format, text);
    }

    void write(const std::string& file_name, const std::string& text) const {
        if (output_dir.empty()) {
            std::cout << text;
        } else {
            write_files_atomically(output_dir, {{file_name, text}});
        }
    }

    std::string num(double v) const { return format_number(v, precision); }
};

void print_failures(const std::vector<YearFailure>& failures) {
    for (const auto& f : failures) {
        std::cerr << "year " << f.year << " failed [" << f.kind << "]: " << f.message << "\n";
    }
}

struct MixingFlags {
    double epsilon = 0.05;
    std::string preset;
    std::size_t grid_points = 2001;

    void add_to(CLI::App* app) {
        app->add_option("--epsilon", epsilon, "Total-variation threshold")->check(CLI::Range(0.0, 1.0));
        app->add_option("--epsilon-preset", preset, "Named threshold")->check(CLI::IsMember({"one-over-e"}));
        app->add_option("--grid-points", grid_points, "Log-income grid points");
    }

    MixingConfig config() const {
        MixingConfig cfg;
        cfg.epsilon = preset == "one-over-e" ? std::exp(-1.0) : epsilon;
        cfg.grid_points = grid_points;
        cfg.validate();
        return cfg;
    }
};

struct CalibrationFlags {
    double sigma = 0.2;
    double share_fraction = 0.01;
    bool hazard = false;

    void add_to(CLI::App* app) {
        app->add_option("--sigma", sigma, "Fixed volatility used for identification");
        app->add_option("--share-fraction", share_fraction, "Top fraction matched by the share target");
        app->add_flag("--hazard-transform", hazard, "Use r = -ln(1 - separations/employment)");
    }

    CalibrationConfig config() const {
        CalibrationConfig cfg;
        cfg.sigma_fixed = sigma;
        cfg.share_fraction = share_fraction;
        cfg.hazard_transform = hazard;
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Income mobility under geometric Brownian motion with stochastic resetting"};
    app.set_config("--config", "", "Optional key = value config file (flags override it)");
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Calibrate each panel year");
    std::string cal_input;
    CalibrationFlags cal_flags;
    Output cal_out;
    calibrate->add_option("--input", cal_input, "Normalized panel CSV")->required();
    cal_flags.add_to(calibrate);
    cal_out.add_to(calibrate);

    // mixing
    auto* mixing = app.add_subcommand("mixing", "Mixing time per parameter set");
    ParamSource mix_params;
    MixingFlags mix_flags;
    Output mix_out;
    mix_params.add_to(mixing);
    mix_flags.add_to(mixing);
    mix_out.add_to(mixing);

    // mfpt
    auto* mfpt_cmd = app.add_subcommand("mfpt", "Mean first passage times per parameter set");
    ParamSource mfpt_params;
    std::string pairs_text = "50:75,50:90";
    std::string levels_text;
    Output mfpt_out;
    mfpt_params.add_to(mfpt_cmd);
    mfpt_cmd->add_option("--percentile-pairs", pairs_text, "start:target percentile pairs");
    mfpt_cmd->add_option("--levels", levels_text, "start:target income pairs in units of x0, e.g. 1:2");
    mfpt_out.add_to(mfpt_cmd);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo oracle runs");
    ParamSource sim_params;
    std::string kind = "mfpt";
    SimConfig sim;
    bool no_bridge = false;
    double x_start = 1.0;
    double x_target = 2.0;
    double share_p = 0.01;
    std::string times_text = "0.5,1,2,4,8";
    Output sim_out;
    sim_params.add_to(simulate);
    simulate->add_option("--kind", kind, "What to simulate")
        ->check(CLI::IsMember({"stationary", "top-share", "mfpt", "tv"}));
    simulate->add_option("--paths", sim.n_paths, "Number of paths");
    simulate->add_option("--dt", sim.dt, "Time step (years)");
    simulate->add_option("--horizon", sim.horizon, "Burn-in horizon for stationary samples (years)");
    simulate->add_option("--seed", sim.seed, "64-bit seed");
    simulate->add_option("--refine-levels", sim.refine_levels, "Bridge refinement levels per step");
    simulate->add_flag("--no-bridge", no_bridge, "Disable Brownian-bridge crossing correction");
    simulate->add_option("--x-start", x_start, "Start income (units of x0)");
    simulate->add_option("--x-target", x_target, "Target income (units of x0)");
    simulate->add_option("--p", share_p, "Top fraction for --kind top-share");
    simulate->add_option("--times", times_text, "Comma-separated times for --kind tv");
    sim_out.add_to(simulate);

    // report
    auto* report = app.add_subcommand("report", "Full per-year pipeline");
    std::string report_input;
    std::string report_dir = "report";
    CalibrationFlags rep_cal;
    MixingFlags rep_mix;
    std::string rep_pairs = "50:75,50:90";
    std::string sweep_text;
    std::uint64_t rep_seed = 1;
    std::size_t validation_paths = 0;
    std::string rep_format = "csv";
    int rep_precision = 6;
    report->add_option("--input", report_input, "Normalized panel CSV")->required();
    report->add_option("--output-dir", report_dir, "Output directory");
    rep_cal.add_to(report);
    rep_mix.add_to(report);
    report->add_option("--percentile-pairs", rep_pairs, "start:target percentile pairs");
    report->add_option("--sigma-sweep", sweep_text, "lo:hi:n sensitivity sweep over sigma");
    report->add_option("--seed", rep_seed, "Seed for Monte Carlo validation");
    report->add_option("--validation-paths", validation_paths, "Monte Carlo paths per year for validation.csv");
    report->add_option("--format", rep_format, "Also write report.json when json")
        ->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--precision", rep_precision, "Significant digits")->check(CLI::Range(1, 17));

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build a normalized panel from WID and labor-flow files");
    std::string wid_path, flows_path, ingest_output;
    std::string wid_variable, wid_percentile, wid_country;
    std::string wid_delimiter = ";";
    bool wid_percent = false;
    ingest->add_option("--wid", wid_path, "WID long-format export")->required();
    ingest->add_option("--wid-variable", wid_variable, "WID variable code")->required();
    ingest->add_option("--wid-percentile", wid_percentile, "WID percentile code")->required();
    ingest->add_option("--wid-country", wid_country, "WID country code")->required();
    ingest->add_option("--wid-delimiter", wid_delimiter, "Field delimiter of the WID file");
    ingest->add_flag("--wid-percent", wid_percent, "WID values are percents");
    ingest->add_option("--flows", flows_path, "CSV with header year,separations,employment")->required();
    ingest->add_option("--output", ingest_output, "Normalized panel CSV to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*calibrate) {
            const PanelFile panel = load_panel(cal_input);
            const auto result = calibrate_panel(panel.rows, cal_flags.config(), threads);
            print_failures(result.failures);
            if (cal_out.format == "json") {
                std::vector<std::vector<std::string>> rows;
                for (const auto& [year, cal] : result.rows) {
                    std::string warnings;
                    for (const auto& w : cal.warnings) {
                        warnings += (warnings.empty() ? "" : "; ") + w;
                    }
                    rows.push_back({std::to_string(year), cal_out.num(cal.params.r), cal_out.num(cal.params.mu),
                                    cal_out.num(cal.params.sigma), cal_out.num(cal.coeffs.a),
                                    cal_out.num(cal.coeffs.b), cal_out.num(cal.share_error),
                                    std::to_string(cal.roots.size()), warnings});
                }
                cal_out.emit("params", {"year", "r", "mu", "sigma", "a", "b", "share_error", "n_roots", "warnings"},
                             rows);
            } else {
                cal_out.write("params.csv", params_csv(result, cal_out.precision));
            }
            if (result.rows.empty()) {
                return 1;
            }
            return result.failures.empty() ? 0 : 2;
        }

        if (*mixing) {
            const MixingConfig cfg = mix_flags.config();
            const auto sets = mix_params.load();
            std::vector<std::vector<std::string>> rows(sets.size());
            for (std::size_t i = 0; i < sets.size(); ++i) {
                rows[i] = {std::to_string(sets[i].year), mix_out.num(mixing_time(sets[i].params, cfg))};
            }
            mix_out.emit("mixing", {"year", "mixing_time_years"}, rows);
            return 0;
        }

        if (*mfpt_cmd) {
            const auto sets = mfpt_params.load();
            std::vector<std::string> header{"year"};
            std::vector<PassageQuery> queries;
            if (!levels_text.empty()) {
                std::istringstream in(levels_text);
                std::string item;
                while (std::getline(in, item, ',')) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos) {
                        throw DomainError("level pair '" + item + "' must look like 1:2");
                    }
                    PassageQuery q{std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)),
                                   PassageMode::Levels};
                    queries.push_back(q);
                    header.push_back("mfpt_x" + format_number(q.start) + "_x" + format_number(q.target) + "_years");
                }
            } else {
                for (const auto& pair : parse_percentile_pairs(pairs_text)) {
                    queries.push_back({pair.start, pair.target, PassageMode::Percentiles});
                    header.push_back(pair.column_name());
                }
            }
            std::vector<std::vector<std::string>> rows;
            for (const auto& set : sets) {
                std::vector<std::string> row{std::to_string(set.year)};
                for (const auto& q : queries) {
                    row.push_back(mfpt_out.num(mfpt(set.params, q)));
                }
                rows.push_back(std::move(row));
            }
            mfpt_out.emit("mfpt", header, rows);
            return 0;
        }

        if (*simulate) {
            const auto sets = sim_params.load();
            if (sets.size() != 1) {
                throw InvalidParams("simulate takes a single parameter set (--mu/--sigma/--r)");
            }
            const ModelParams params = sets.front().params;
            sim.bridge_correction = !no_bridge;
            sim.threads = threads;
            sim.validate();
            if (kind == "mfpt") {
                const SimResult res = empirical_mfpt(params, x_start, x_target, sim);
                for (const auto& w : res.warnings) {
                    std::cerr << "warning: " << w << "\n";
                }
                sim_out.emit("simulate_mfpt",
                             {"x_start", "x_target", "analytic_years", "estimate_years", "standard_error",
                              "n_effective", "truncated_fraction"},
                             {{sim_out.num(x_start), sim_out.num(x_target),
                               sim_out.num(mfpt_levels(params, x_start, x_target)), sim_out.num(res.estimate),
                               sim_out.num(res.standard_error), std::to_string(res.n_effective),
                               sim_out.num(res.truncated_fraction)}});
            } else if (kind == "stationary" || kind == "top-share") {
                const double burn_in = std::max(sim.horizon, 10.0 / params.r);
                const auto samples = sample_stationary(params, sim.n_paths, burn_in, sim.seed, sim.threads);
                const auto dist = StationaryDistribution::from(params);
                if (kind == "stationary") {
                    const SimResult mean = sample_mean(samples);
                    double analytic_mean = std::nan("");
                    if (dist.a() > 1.0) {
                        analytic_mean = mean_income(dist);
                    }
                    sim_out.emit("simulate_stationary",
                                 {"n", "burn_in", "mean_income", "standard_error", "analytic_mean_income"},
                                 {{std::to_string(samples.size()), sim_out.num(burn_in), sim_out.num(mean.estimate),
                                   sim_out.num(mean.standard_error), sim_out.num(analytic_mean)}});
                } else {
                    sim_out.emit("simulate_top_share", {"p", "empirical_share", "analytic_share"},
                                 {{sim_out.num(share_p), sim_out.num(empirical_top_share(samples, share_p)),
                                   sim_out.num(top_share(dist, share_p))}});
                }
            } else {
                std::vector<double> times;
                std::istringstream in(times_text);
                std::string item;
                while (std::getline(in, item, ',')) {
                    times.push_back(std::stod(item));
                }
                const EmpiricalTv tv = empirical_tv(params, times, sim);
                const DerivedCoefficients coeffs = derive_coefficients(params);
                const MixingEvaluator grid(coeffs, MixingConfig{});
                std::vector<std::vector<std::string>> rows;
                for (const auto& pt : tv.points) {
                    rows.push_back({sim_out.num(pt.t), sim_out.num(pt.tv), sim_out.num(pt.noise_floor),
                                    sim_out.num(grid.tv_distance(pt.t)), sim_out.num(std::exp(-params.r * pt.t))});
                }
                sim_out.emit("simulate_tv", {"t", "empirical_tv", "noise_floor", "grid_tv", "envelope"}, rows);
            }
            return 0;
        }

        if (*report) {
            ReportConfig cfg;
            cfg.calibration = rep_cal.config();
            cfg.mixing = rep_mix.config();
            cfg.pairs = parse_percentile_pairs(rep_pairs);
            if (!sweep_text.empty()) {
                cfg.sigma_sweep = parse_sigma_sweep(sweep_text);
            }
            cfg.precision = rep_precision;
            cfg.threads = threads;
            cfg.seed = rep_seed;
            cfg.validation_paths = validation_paths;
            cfg.write_json = rep_format == "json";
            const ReportOutcome outcome = run_report(report_input, report_dir, cfg);
            if (!outcome.error.empty()) {
                std::cerr << "error: " << outcome.error << "\n";
            }
            print_failures(outcome.failures);
            for (const auto& f : outcome.files) {
                std::cout << f.string() << "\n";
            }
            return outcome.exit_code;
        }

        if (*ingest) {
            if (wid_delimiter.size() != 1) {
                throw InvalidParams("--wid-delimiter must be a single character");
            }
            WidLongOptions opts;
            opts.delimiter = wid_delimiter.front();
            opts.values_in_percent = wid_percent;
            const auto shares = adapt_wid_long(wid_path, wid_variable, wid_percentile, wid_country, opts);
            const auto flows = load_labor_flows(flows_path);
            const MergedPanel merged = merge_panel(shares, flows, ingest_output);
            for (int year : merged.unmatched_years) {
                std::cerr << "note: year " << year << " present in only one input; skipped\n";
            }
            write_panel(ingest_output, merged.panel);
            return 0;
        }
    } catch (const MobilityError& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
