#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mobility/errors.hpp"
#include "mobility/panel.hpp"

using namespace mobility;

namespace {

std::string panel_text(const std::string& body) { return std::string(kPanelHeader) + "\n" + body; }

template <class Fn>
std::string error_of(Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("mobility_panel_" + name);
}

}  // namespace

TEST_CASE("a valid row") {
    const auto p = parse_panel(panel_text("1999,0.0850,95000,545000\n"), "panel.csv");
    REQUIRE(p.rows.size() == 1);
    CHECK(p.rows[0].year == 1999);
    CHECK(p.rows[0].top1_share == 0.085);
    CHECK(p.rows[0].separations == 95000);
    CHECK(p.rows[0].employment == 545000);
    CHECK(p.source == "panel.csv");
    CHECK(p.format == "normalized-csv");
}

TEST_CASE("windows line endings and blank lines") {
    const auto p = parse_panel("year,top1_share,separations,employment\r\n1999,0.085,95000,545000\r\n\r\n2000,0.09,1,2\r\n", "x");
    CHECK(p.rows.size() == 2);
}

TEST_CASE("rejected inputs name the file, row and constraint") {
    SUBCASE("percent instead of fraction") {
        try {
            parse_panel(panel_text("1998,0.08,1,2\n1999,8.5,95000,545000\n"), "p.csv");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.file() == "p.csv");
            CHECK(e.row() == 3);
            CHECK(contains(e.what(), "share looks like a percent"));
            CHECK(contains(e.what(), "p.csv:3"));
        }
    }
    SUBCASE("duplicate year") {
        try {
            parse_panel(panel_text("1999,0.08,1,2\n1999,0.09,1,2\n"), "p.csv");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.row() == 3);
            CHECK(contains(e.what(), "duplicate year"));
        }
    }
    SUBCASE("unordered years") {
        CHECK(contains(error_of([] { parse_panel(panel_text("2000,0.08,1,2\n1999,0.09,1,2\n"), "p.csv"); }),
                       "years not strictly increasing"));
    }
    SUBCASE("malformed number reports the column") {
        try {
            parse_panel(panel_text("1999,0.08,abc,2\n"), "p.csv");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row() == 2);
            CHECK(contains(e.what(), "column 'separations'"));
        }
    }
    SUBCASE("other constraints") {
        CHECK(contains(error_of([] { parse_panel(panel_text("1999,0,1,2\n"), "p.csv"); }), "outside (0,1)"));
        CHECK(contains(error_of([] { parse_panel(panel_text("1999,150,1,2\n"), "p.csv"); }), "outside (0,1)"));
        CHECK(contains(error_of([] { parse_panel(panel_text("1999,0.1,-1,2\n"), "p.csv"); }), "separations"));
        CHECK(contains(error_of([] { parse_panel(panel_text("1999,0.1,1,0\n"), "p.csv"); }), "employment"));
        CHECK_THROWS_AS(parse_panel(panel_text("1999,0.1,1\n"), "p.csv"), ParseError);
        CHECK_THROWS_AS(parse_panel("year,share\n1999,0.1\n", "p.csv"), ParseError);
        CHECK_THROWS_AS(parse_panel("", "p.csv"), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_panel("/nonexistent/panel.csv"), IoError);
    }
}

TEST_CASE("load after write is the identity") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> share(1e-4, 0.9), count(0.0, 1e7);
    PanelFile p;
    p.source = "generated";
    for (int year = 1990; year < 2030; ++year) {
        const double emp = 1.0 + count(gen);
        p.rows.push_back({year, share(gen), std::floor(count(gen)), emp});
    }
    p.rows[3].separations = 0.0;
    p.rows[4].top1_share = 0.1;  // exact decimal
    const auto path = temp_file("roundtrip.csv");
    write_panel(path, p);
    const auto back = load_panel(path);
    REQUIRE(back.rows.size() == p.rows.size());
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        CHECK(back.rows[i].year == p.rows[i].year);
        CHECK(back.rows[i].top1_share == p.rows[i].top1_share);
        CHECK(back.rows[i].separations == p.rows[i].separations);
        CHECK(back.rows[i].employment == p.rows[i].employment);
    }
    CHECK(format_panel(back) == format_panel(p));
    CHECK(read_text_file(path) == format_panel(p));
    std::filesystem::remove(path);

    PanelFile bad = p;
    bad.rows[2].top1_share = 12.0;
    CHECK_THROWS_AS(write_panel(path, bad), ValidationError);
    CHECK(!std::filesystem::exists(path));
}

TEST_CASE("wid long format") {
    const std::string text =
        "country;variable;percentile;year;value\n"
        "MK;sptinc992j;p99p100;1999;0.0912\n"
        "MK;sptinc992j;p90p100;1999;0.3100\n"
        "RS;sptinc992j;p99p100;1999;0.1000\n";
    SUBCASE("filter") {
        const auto m = parse_wid_long(text, "wid.csv", "sptinc992j", "p99p100", "MK");
        REQUIRE(m.size() == 1);
        CHECK(m.at(1999) == 0.0912);
    }
    SUBCASE("no match") {
        CHECK_THROWS_AS(parse_wid_long(text, "wid.csv", "sptinc992j", "p99.9p100", "MK"), MissingSeries);
    }
    SUBCASE("conflicting duplicates") {
        const std::string dup = text + "MK;sptinc992j;p99p100;1999;0.0950\n";
        try {
            parse_wid_long(dup, "wid.csv", "sptinc992j", "p99p100", "MK");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.row() == 5);
            CHECK(contains(e.what(), "ambiguous source"));
        }
        // identical repeats are harmless
        const std::string same = text + "MK;sptinc992j;p99p100;1999;0.0912\n";
        CHECK(parse_wid_long(same, "wid.csv", "sptinc992j", "p99p100", "MK").size() == 1);
    }
    SUBCASE("comma delimited, other column order, percents") {
        const std::string csv = "year,value,percentile,variable,country\n2001,9.5,p99p100,sptinc992j,MK\n";
        WidLongOptions opt;
        opt.delimiter = ',';
        CHECK(contains(error_of([&] { parse_wid_long(csv, "w", "sptinc992j", "p99p100", "MK", opt); }),
                       "share looks like a percent"));
        opt.values_in_percent = true;
        CHECK(parse_wid_long(csv, "w", "sptinc992j", "p99p100", "MK", opt).at(2001) == doctest::Approx(0.095));
    }
    SUBCASE("missing column and bad year") {
        CHECK_THROWS_AS(parse_wid_long("country;variable;year;value\n", "w", "v", "p", "c"), ParseError);
        try {
            parse_wid_long("country;variable;percentile;year;value\nMK;v;p;19x9;0.1\n", "w", "v", "p", "MK");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row() == 2);
        }
    }
}

TEST_CASE("labor flows and merging") {
    const auto flows = parse_labor_flows("year,separations,employment\n1998,10,100\n1999,20,100\n2000,30,100\n", "f.csv");
    REQUIRE(flows.size() == 3);
    CHECK(flows[1].separations == 20);
    const std::map<int, double> shares{{1999, 0.09}, {2000, 0.1}, {2001, 0.11}};
    const auto merged = merge_panel(shares, flows, "merged");
    REQUIRE(merged.panel.rows.size() == 2);
    CHECK(merged.panel.rows[0].year == 1999);
    CHECK(merged.panel.rows[0].top1_share == 0.09);
    CHECK(merged.panel.rows[1].separations == 30);
    CHECK(merged.unmatched_years == std::vector<int>{1998, 2001});
    CHECK_THROWS_AS(parse_labor_flows("year,separations,employment\n1999,20,0\n", "f.csv"), ValidationError);
    CHECK_THROWS_AS(parse_labor_flows("year,sep,emp\n", "f.csv"), ParseError);
}
