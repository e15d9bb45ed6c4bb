#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mobility {

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
    int width = 720;
    int height = 420;
};

/// Minimal standalone SVG: frame, ticks on both axes, one polyline and legend
/// entry per series. Output is a deterministic function of the chart.
std::string render_svg(const LineChart& chart);

/// Up to ~`target` round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace mobility
