#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lexsig {

// Minimal static SVG renderings for the report. No external renderer.

std::string svg_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                          double lo = -1.0, double hi = 1.0);

// Square matrix with values in [-1, 1]; absent cells drawn grey.
std::string svg_heatmap(const std::string& title, const std::vector<std::string>& labels,
                        const std::vector<std::vector<std::optional<double>>>& cells);

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series);

}  // namespace lexsig
