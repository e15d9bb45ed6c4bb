#include "mobility/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mobility/format.hpp"

namespace mobility {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double nice_step(double span, int target) {
    const double raw = span / std::max(target, 1);
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    const double residual = raw / magnitude;
    double step = 10.0;
    if (residual <= 1.0) {
        step = 1.0;
    } else if (residual <= 2.0) {
        step = 2.0;
    } else if (residual <= 5.0) {
        step = 5.0;
    }
    return step * magnitude;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) {
        return {lo};
    }
    const double step = nice_step(hi - lo, target);
    std::vector<double> ticks;
    const double first = std::ceil(lo / step - 1e-9) * step;
    for (double t = first; t <= hi + step * 1e-9; t += step) {
        ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

std::string render_svg(const LineChart& chart) {
    const double left = 70.0;
    const double right = 170.0;
    const double top = 40.0;
    const double bottom = 55.0;
    const double plot_w = chart.width - left - right;
    const double plot_h = chart.height - top - bottom;

    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    for (const auto& s : chart.series) {
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (!std::isfinite(x_lo)) {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    y_lo = std::min(y_lo, 0.0);
    if (x_hi == x_lo) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (y_hi == y_lo) {
        y_hi = y_lo + 1.0;
    }
    const auto y_ticks = nice_ticks(y_lo, y_hi);
    y_hi = std::max(y_hi, y_ticks.back());
    auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto sy = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(chart.width) + "\" height=\"" +
           std::to_string(chart.height) + "\" viewBox=\"0 0 " + std::to_string(chart.width) + " " +
           std::to_string(chart.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + px(left + plot_w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           escape(chart.title) + "</text>\n";
    svg += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(plot_w) + "\" height=\"" + px(plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : y_ticks) {
        const double y = sy(t);
        svg += "<line x1=\"" + px(left - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(left + plot_w) + "\" y2=\"" + px(y) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + px(left - 8) + "\" y=\"" + px(y + 4) + "\" text-anchor=\"end\">" + format_number(t) +
               "</text>\n";
    }
    for (double t : nice_ticks(x_lo, x_hi, 8)) {
        const double x = sx(t);
        svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(top + plot_h) + "\" x2=\"" + px(x) + "\" y2=\"" +
               px(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + px(x) + "\" y=\"" + px(top + plot_h + 19) + "\" text-anchor=\"middle\">" +
               format_number(t) + "</text>\n";
    }
    svg += "<text x=\"" + px(left + plot_w / 2) + "\" y=\"" + px(chart.height - 12.0) + "\" text-anchor=\"middle\">" +
           escape(chart.x_label) + "</text>\n";
    svg += "<text transform=\"translate(18," + px(top + plot_h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           escape(chart.y_label) + "</text>\n";

    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const auto& s = chart.series[i];
        const char* colour = kPalette[i % std::size(kPalette)];
        std::string pts;
        for (const auto& [x, y] : s.points) {
            pts += (pts.empty() ? "" : " ") + px(sx(x)) + "," + px(sy(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + pts +
               "\"/>\n";
        for (const auto& [x, y] : s.points) {
            svg += "<circle cx=\"" + px(sx(x)) + "\" cy=\"" + px(sy(y)) + "\" r=\"2.5\" fill=\"" + colour + "\"/>\n";
        }
        const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
        const double lx = left + plot_w + 12.0;
        svg += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(lx + 20) + "\" y2=\"" + px(ly) +
               "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + px(lx + 26) + "\" y=\"" + px(ly + 4) + "\">" + escape(s.label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace mobility
