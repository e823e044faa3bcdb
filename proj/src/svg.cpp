#include "lexsig/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lexsig {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string open_svg(int w, int h, const std::string& title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
        w, h, w / 2, escape(title));
}

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

// Blue for negative, red for positive.
std::string diverging(double v) {
    v = std::clamp(v, -1.0, 1.0);
    const int fade = static_cast<int>(std::lround(255 * (1.0 - std::abs(v))));
    return v >= 0 ? fmt::format("rgb(255,{0},{0})", fade) : fmt::format("rgb({0},{0},255)", fade);
}

}  // namespace

std::string svg_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                          double lo, double hi) {
    const int left = 50, top = 30, plot_h = 240, bar_w = 36, gap = 12;
    const int w = left + static_cast<int>(bars.size()) * (bar_w + gap) + 20;
    const int h = top + plot_h + 50;
    auto y_of = [&](double v) { return top + plot_h * (hi - std::clamp(v, lo, hi)) / (hi - lo); };
    std::string s = open_svg(std::max(w, 200), h, title);
    const double y0 = y_of(std::clamp(0.0, lo, hi));
    s += fmt::format("<line x1=\"{}\" y1=\"{:.1f}\" x2=\"{}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", left, y0, w - 10, y0);
    for (double t : {lo, (lo + hi) / 2, hi})
        s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 4, y_of(t) + 4, t);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const int x = left + gap / 2 + static_cast<int>(i) * (bar_w + gap);
        const double y = y_of(bars[i].second);
        s += fmt::format("<rect x=\"{}\" y=\"{:.1f}\" width=\"{}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x,
                         std::min(y, y0), bar_w, std::abs(y0 - y), palette(i));
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x + bar_w / 2,
                         top + plot_h + 16, escape(bars[i].first));
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">{:.2f}</text>\n",
                         x + bar_w / 2, top + plot_h + 30, bars[i].second);
    }
    return s + "</svg>\n";
}

std::string svg_heatmap(const std::string& title, const std::vector<std::string>& labels,
                        const std::vector<std::vector<std::optional<double>>>& cells) {
    const int cell = 40, left = 80, top = 40;
    const int n = static_cast<int>(labels.size());
    std::string s = open_svg(left + n * cell + 20, top + n * cell + 20, title);
    for (int i = 0; i < n; ++i) {
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 4, top + i * cell + cell / 2 + 4,
                         escape(labels[static_cast<std::size_t>(i)]));
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + i * cell + cell / 2, top - 6,
                         escape(labels[static_cast<std::size_t>(i)]));
        for (int j = 0; j < n; ++j) {
            const auto& v = cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"white\"/>\n",
                             left + j * cell, top + i * cell, cell, cell, v ? diverging(*v) : "#cccccc");
            if (v)
                s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">{:.2f}</text>\n",
                                 left + j * cell + cell / 2, top + i * cell + cell / 2 + 3, *v);
        }
    }
    return s + "</svg>\n";
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series) {
    const int left = 60, top = 30, plot_w = 420, plot_h = 260, legend_w = 90;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& se : series)
        for (auto [x, y] : se.points) {
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
    if (!(x1 > x0)) x0 -= 1, x1 += 1;
    if (!(y1 > y0)) y0 -= 1, y1 += 1;
    auto px = [&](double x) { return left + plot_w * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return top + plot_h * (y1 - y) / (y1 - y0); };
    std::string s = open_svg(left + plot_w + legend_w + 20, top + plot_h + 50, title);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                     plot_w, plot_h);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2, top + plot_h + 36,
                     escape(x_label));
    s += fmt::format("<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
                     top + plot_h / 2, top + plot_h / 2, escape(y_label));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", left, top + plot_h + 16, x0);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", left + plot_w, top + plot_h + 16, x1);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", left - 4, top + plot_h, y0);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", left - 4, top + 8, y1);
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::string pts;
        for (auto [x, y] : series[i].points) pts += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
        s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, palette(i));
        const int ly = top + 12 + static_cast<int>(i) * 16;
        s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                         left + plot_w + 10, ly, left + plot_w + 28, palette(i));
        s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + plot_w + 32, ly + 4, escape(series[i].name));
    }
    return s + "</svg>\n";
}

}  // namespace lexsig
