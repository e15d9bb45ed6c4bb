// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mobility/calibration.hpp"
#include "mobility/errors.hpp"
#include "mobility/mfpt.hpp"
#include "mobility/mixing.hpp"
#include "mobility/montecarlo.hpp"
#include "mobility/report.hpp"
#include "oracles.hpp"

using namespace mobility;
namespace fs = std::filesystem;

namespace {

const ModelParams kBase{0.105, 0.2, 0.25};
int g_failed = 0;

void verdict(bool ok, bool gating, int id, const std::string& name, const std::string& detail) {
    const char* tag = ok ? "PASS" : (gating ? "FAIL" : "FAIL (non-gating)");
    std::printf("%s %d %s: %s\n", tag, id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok && gating) {
        ++g_failed;
    }
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double forward_share(double a, double r, double D, double p) {
    const double b = r / (D * a);
    const double q = a + b;
    if (p <= b / q) {
        return (b + 1.0) / q * std::pow(p * q / b, (a - 1.0) / a);
    }
    return 1.0 - (a - 1.0) / q * std::pow((1.0 - p) * q / a, (b + 1.0) / b);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& capture) {
    const std::string cmd = std::string(MOBILITY_CLI) + " " + args + " > '" + capture.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<double> g_stationary_sample;

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    g_stationary_sample = sample_stationary(kBase, 100000, 40.0, 1);
    std::vector<double> xs = g_stationary_sample;
    std::sort(xs.begin(), xs.end());
    // survival of the asymmetric Laplace law, written out here
    const double a = 2.0, b = 6.25;
    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = std::log(xs[i]);
        const double cdf = y >= 0 ? 1.0 - b / (a + b) * std::exp(-a * y) : a / (a + b) * std::exp(b * y);
        ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - cdf)});
    }
    const double secs = seconds_since(t0);
    verdict(ks < 0.01 && secs < 30.0, true, 1, "stationary-law oracle",
            "KS " + fmt("%.5f", ks) + " (< 0.01), " + fmt("%.2f", secs) + " s (< 30 s)");
}

void criterion_2() {
    const auto dist = StationaryDistribution::from(kBase);
    const double closed = top_share(dist, 0.01);
    const double a = 2.0, b = 6.25;
    // log-income cut leaving mass 0.01 above it, then partial mean over mean
    const double cut = std::log(b / ((a + b) * 0.01)) / a;
    const auto weighted = [&](double y) { return oracle::income_weighted_density(a, b, y); };
    const double numeric = oracle::integrate_from(weighted, cut) / oracle::integrate_real_line(weighted);
    const double empirical = empirical_top_share(g_stationary_sample, 0.01);
    const bool ok = std::abs(closed - numeric) <= 1e-8 && std::abs(empirical - closed) <= 0.005;
    verdict(ok, true, 2, "top-share identity",
            "closed form " + fmt("%.10f", closed) + ", partial-mean integral " + fmt("%.10f", numeric) + " (|diff| " +
                fmt("%.1e", std::abs(closed - numeric)) + " <= 1e-8), empirical " + fmt("%.6f", empirical) +
                " (+-0.005)");
    std::printf("     note: the listed value 0.100967 differs from the closed form by %.2e; it does not round from it\n",
                std::abs(closed - 0.100967));
}

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    SimConfig cfg;  // 1e5 paths, dt 1e-2, bridge on
    const double analytic = mfpt_levels(kBase, 1.0, 2.0);
    const auto sim = empirical_mfpt(kBase, 1.0, 2.0, cfg);
    const double secs = seconds_since(t0);
    const double rel = std::abs(sim.estimate / analytic - 1.0);
    const double p75 = mfpt_percentiles(kBase, 0.50, 0.75);
    const double p90 = mfpt_percentiles(kBase, 0.50, 0.90);
    const bool ok = std::abs(analytic - 12.0) < 1e-12 && rel < 0.02 && secs < 120.0 &&
                    std::abs(p75 - 6.060606) <= 1e-6 && std::abs(p90 - 24.242424) <= 1e-6;
    verdict(ok, true, 3, "MFPT oracle",
            "analytic " + fmt("%.6f", analytic) + ", simulated " + fmt("%.5f", sim.estimate) + " +- " +
                fmt("%.5f", sim.standard_error) + " (rel " + fmt("%.4f", rel) + " < 0.02), " + fmt("%.1f", secs) +
                " s (< 120 s); 50->75 " + fmt("%.7f", p75) + ", 50->90 " + fmt("%.7f", p90));
}

void criterion_4() {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> umu(-0.1, 0.3), usig(0.05, 0.5), ur(0.02, 2.0), ux(0.0, 3.0);
    double worst = 0.0;
    int checked = 0;
    for (int set = 0; set < 20; ++set) {
        const ModelParams p{umu(gen), usig(gen), ur(gen)};
        for (int k = 0; k < 100; ++k) {
            double x[3] = {std::exp(ux(gen)), std::exp(ux(gen)), std::exp(ux(gen))};
            std::sort(x, x + 3);
            const double direct = mfpt_levels(p, x[0], x[2]);
            const double split = mfpt_levels(p, x[0], x[1]) + mfpt_levels(p, x[1], x[2]);
            if (direct > 0) {
                worst = std::max(worst, std::abs(split - direct) / direct);
            }
            ++checked;
        }
    }
    verdict(worst <= 1e-12 && checked == 2000, true, 4, "MFPT additivity",
            std::to_string(checked) + " triples on 20 parameter sets, worst relative gap " + fmt("%.2e", worst) +
                " (<= 1e-12)");
}

void criterion_5() {
    const auto c = derive_coefficients(kBase);
    double worst_excess = -1.0;
    std::size_t scanned = 0;
    const MixingConfig one_over_e = MixingConfig::one_over_e();
    MixingResult at_preset;
    for (const MixingConfig& cfg : {MixingConfig{}, one_over_e}) {
        const auto res = mixing_time_detailed(kBase, cfg);
        if (cfg.epsilon == one_over_e.epsilon) {
            at_preset = res;
        }
        for (std::size_t i = 0; i < res.scan_times.size(); ++i) {
            worst_excess = std::max(worst_excess, res.scan_tv[i] - std::exp(-c.r * res.scan_times[i]));
        }
        scanned += res.scan_times.size();
    }
    MixingConfig doubled = one_over_e;
    doubled.grid_points = 2 * one_over_e.grid_points - 1;
    const double fine = mixing_time(kBase, doubled);
    const double t = at_preset.time;
    const bool ok = worst_excess <= 1e-3 && t > 0.0 && t <= 4.0 && std::abs(fine - t) < 1e-3;
    verdict(ok, true, 5, "mixing envelope",
            "max tv - e^{-rt} over " + std::to_string(scanned) + " scanned t = " + fmt("%.2e", worst_excess) +
                " (<= 1e-3); mixing time at 1/e " + fmt("%.6f", t) + " in (0, 4]; doubled grid " + fmt("%.6f", fine) +
                " (|diff| " + fmt("%.1e", std::abs(fine - t)) + " < 1e-3)");
}

void criterion_6() {
    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> ua(1.1, 40.0), ur(0.05, 0.5), us(0.1, 0.4);
    int accepted = 0, other_branch = 0;
    double worst = 0.0;
    while (accepted < 200) {
        const double a_star = ua(gen), r = ur(gen), sigma = us(gen);
        const double D = 0.5 * sigma * sigma;
        const double target = forward_share(a_star, r, D, 0.01);
        // a_star counts only if no smaller exponent reproduces the share
        bool smaller = false;
        double prev = forward_share(1.0 + 1e-6, r, D, 0.01) - target;
        for (int i = 1; i <= 20000 && !smaller; ++i) {
            const double a = std::exp(std::log(1.0 + 1e-6) + (std::log(a_star * (1 - 1e-3)) - std::log(1.0 + 1e-6)) * i / 20000);
            const double cur = forward_share(a, r, D, 0.01) - target;
            smaller = (prev < 0) != (cur < 0);
            prev = cur;
        }
        if (smaller) {
            ++other_branch;
            continue;
        }
        CalibrationConfig cfg;
        cfg.sigma_fixed = sigma;
        try {
            const auto res = calibrate_year({2000, target, r * 1e6, 1e6}, cfg);
            worst = std::max(worst, std::abs(res.coeffs.a - a_star));
        } catch (const MobilityError& e) {
            worst = std::numeric_limits<double>::infinity();
        }
        ++accepted;
    }
    bool multi_ok = false;
    std::string multi;
    try {
        const auto res = calibrate_year({2000, 0.049, 0.25e6, 1e6}, CalibrationConfig{});
        multi_ok = res.multiple_roots() && std::abs(res.coeffs.a / res.roots.front() - 1.0) < 1e-12 && std::abs(res.coeffs.a - 2.959277) < 1e-6 &&
                   !res.warnings.empty();
        multi = "roots";
        for (double r : res.roots) {
            multi += " " + fmt("%.6f", r);
        }
        multi += ", selected " + fmt("%.6f", res.coeffs.a);
    } catch (const MobilityError& e) {
        multi = std::string("error ") + e.what();
    }
    verdict(worst < 1e-6 && multi_ok, true, 6, "calibration round trip",
            "200 draws on the selected branch (" + std::to_string(other_branch) +
                " draws skipped as not the smallest root), worst |a - a*| " + fmt("%.2e", worst) +
                " (< 1e-6); share 0.049: " + multi);
}

void criterion_7(const fs::path& work) {
    std::ofstream(work / "panel.csv") << "year,top1_share,separations,employment\n"
                                         "2000,0.10096504174462822,250000,1000000\n"
                                         "2001,0.06,200000,1000000\n"
                                         "2002,0.15,300000,1000000\n";
    const std::string input = "'" + (work / "panel.csv").string() + "'";
    const std::string rep = "report --input " + input +
                            " --format json --sigma-sweep 0.15:0.25:3 --validation-paths 20000 --seed 9 --output-dir ";
    bool ok = true;
    std::size_t files = 0;
    ok &= run_cli(rep + "'" + (work / "r1").string() + "'", work / "r1.log") == 0;
    ok &= run_cli(rep + "'" + (work / "r2").string() + "'", work / "r2.log") == 0;
    ok &= run_cli("--threads 4 " + rep + "'" + (work / "r3").string() + "'", work / "r3.log") == 0;
    if (ok) {
        for (const auto& e : fs::directory_iterator(work / "r1")) {
            const auto text = slurp(e.path());
            ok &= text == slurp(work / "r2" / e.path().filename()) && text == slurp(work / "r3" / e.path().filename());
            ++files;
        }
    }
    const std::string sim = "simulate --mu 0.105 --sigma 0.2 --r 0.25 --seed 9 ";
    const char* kinds[] = {"--kind mfpt --paths 20000", "--kind tv --paths 50000 --times 0.5,2,8",
                           "--kind top-share --paths 50000"};
    int runs = 0;
    for (const char* kind : kinds) {
        const auto a = work / ("s" + std::to_string(runs) + "a"), b = work / ("s" + std::to_string(runs) + "b"),
                   c = work / ("s" + std::to_string(runs) + "c");
        ok &= run_cli(sim + kind, a) == 0 && run_cli(sim + kind, b) == 0 && run_cli("--threads 4 " + sim + kind, c) == 0;
        ok &= slurp(a) == slurp(b) && slurp(a) == slurp(c) && !slurp(a).empty();
        ++runs;
    }
    verdict(ok && files == 6, true, 7, "determinism",
            "report: " + std::to_string(files) + " files byte-identical over two runs and --threads 4; simulate: " +
                std::to_string(runs) + " kinds byte-identical over two runs and --threads 4");
}

PanelFile synthetic_panel() {
    PanelFile p;
    p.source = "synthetic 1995-2021";
    for (int year = 1995; year <= 2021; ++year) {
        const double s = (year - 1995) / 26.0;
        const double r = 0.18 + 0.06 * std::sin(6.0 * s);
        const double a = 1.9 + 0.35 * std::cos(5.0 * s);
        p.rows.push_back({year, forward_share(a, r, 0.02, 0.01), std::round(r * 550000.0), 550000.0});
    }
    return p;
}

void criterion_8(const fs::path& work) {
    PanelFile panel;
    std::string origin;
    if (const char* env = std::getenv("MOBILITY_PANEL"); env && *env) {
        origin = std::string("MOBILITY_PANEL=") + env;
        try {
            panel = load_panel(env);
        } catch (const MobilityError& e) {
            verdict(false, false, 8, "qualitative replication", std::string("cannot load panel: ") + e.what());
            return;
        }
    } else {
        origin = "synthetic 1995-2021 panel (set MOBILITY_PANEL to a normalized CSV for real data)";
        panel = synthetic_panel();
    }
    write_panel(work / "rep_panel.csv", panel);
    ReportConfig cfg;
    cfg.sigma_sweep = SigmaSweep{0.1, 0.4, 4};
    const auto out = run_report(work / "rep_panel.csv", work / "rep", cfg);
    bool full = out.exit_code == 0;
    std::size_t years = 0;
    if (full) {
        years = parse_numeric_csv(slurp(work / "rep" / "report.csv")).rows.size();
        full = years == panel.rows.size();
    }
    verdict(full, false, 8, "qualitative replication",
            origin + ": " + std::to_string(years) + " of " + std::to_string(panel.rows.size()) +
                " years reported, exit code " + std::to_string(out.exit_code) + (out.error.empty() ? "" : ", " + out.error));
    if (!fs::exists(work / "rep" / "sigma_sweep.csv")) {
        return;
    }
    // 1999 sensitivity against the published 4.8 years
    const auto sweep = slurp(work / "rep" / "sigma_sweep.csv");
    std::istringstream lines(sweep);
    std::string line;
    std::getline(lines, line);
    std::printf("     1999 mixing time vs sigma (reference 4.8 years):\n");
    while (std::getline(lines, line)) {
        const auto f = split_csv_line(line);
        if (f.size() < 6 || f[1] != "1999") {
            continue;
        }
        std::string preset = "n/a";
        try {
            auto obs = std::find_if(panel.rows.begin(), panel.rows.end(), [](const auto& o) { return o.year == 1999; });
            CalibrationConfig cal;
            cal.sigma_fixed = std::stod(f[0]);
            const auto res = calibrate_year(*obs, cal);
            preset = fmt("%.4f", mixing_time(res.params, MixingConfig::one_over_e()));
        } catch (const std::exception&) {
        }
        std::printf("       sigma %-6s epsilon 0.05: %-9s epsilon 1/e: %-9s status %s\n", f[0].c_str(), f[5].c_str(),
                    preset.c_str(), f.back().c_str());
    }
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "mobility_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(work);
    criterion_8(work);
    std::printf("%s: %d gating criteria failed\n", g_failed == 0 ? "ACCEPTED" : "REJECTED", g_failed);
    return g_failed == 0 ? 0 : 1;
}
