#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "snf/errors.hpp"

namespace snf {

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
    bool dashed = false;
};

struct SvgChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    double vline_x = std::numeric_limits<double>::quiet_NaN();  // train/test boundary
    std::string vline_label;
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

/// Deterministic standalone SVG line chart. Byte output depends only on the
/// inputs; callers pre-transform axes (e.g. pass log10 N as x).
inline void write_line_chart(const std::filesystem::path& path,
                             const std::vector<SvgSeries>& series,
                             const SvgChartOptions& options) {
    if (series.empty()) throw ArgumentError("write_line_chart: no series");
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    std::size_t total_points = 0;
    for (const SvgSeries& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
            ++total_points;
        }
    }
    if (total_points == 0) throw ArgumentError("write_line_chart: no finite data points");
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double width = 800, height = 560;
    const double ml = 80, mr = 30, mt = 50, mb = 70;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
    const auto py = [&](double y) { return mt + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("write_line_chart: cannot open " + path.string());
    using detail::fmt_num;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"18\">" << options.title << "</text>\n";

    // Axes with 5 ticks each.
    out << "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" "
        << "font-size=\"12\" fill=\"#222\">\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
        << mt + ph << "\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        out << "<line x1=\"" << fmt_num(px(fx)) << "\" y1=\"" << mt + ph << "\" x2=\""
            << fmt_num(px(fx)) << "\" y2=\"" << mt + ph + 5 << "\"/>\n";
        out << "<text x=\"" << fmt_num(px(fx)) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" stroke=\"none\">" << fmt_num(fx) << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt_num(py(fy)) << "\" x2=\"" << ml
            << "\" y2=\"" << fmt_num(py(fy)) << "\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt_num(py(fy) + 4)
            << "\" text-anchor=\"end\" stroke=\"none\">" << fmt_num(fy) << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 20
        << "\" text-anchor=\"middle\" stroke=\"none\" font-size=\"14\">" << options.x_label
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" stroke=\"none\" "
        << "font-size=\"14\" transform=\"rotate(-90 20 " << mt + ph / 2 << ")\">"
        << options.y_label << "</text>\n";
    out << "</g>\n";

    if (std::isfinite(options.vline_x) && options.vline_x >= x_min &&
        options.vline_x <= x_max) {
        out << "<line x1=\"" << fmt_num(px(options.vline_x)) << "\" y1=\"" << mt << "\" x2=\""
            << fmt_num(px(options.vline_x)) << "\" y2=\"" << mt + ph
            << "\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";
        if (!options.vline_label.empty()) {
            out << "<text x=\"" << fmt_num(px(options.vline_x) + 5) << "\" y=\"" << mt + 14
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666\">"
                << options.vline_label << "</text>\n";
        }
    }

    for (const SvgSeries& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"5 3\"";
        out << " points=\"";
        bool first = true;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!first) out << " ";
            out << fmt_num(px(x)) << "," << fmt_num(py(y));
            first = false;
        }
        out << "\"/>\n";
    }

    // Legend.
    double ly = mt + 14;
    for (const SvgSeries& s : series) {
        out << "<line x1=\"" << ml + pw - 170 << "\" y1=\"" << fmt_num(ly - 4) << "\" x2=\""
            << ml + pw - 145 << "\" y2=\"" << fmt_num(ly - 4) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"";
        if (s.dashed) out << " stroke-dasharray=\"5 3\"";
        out << "/>\n";
        out << "<text x=\"" << ml + pw - 140 << "\" y=\"" << fmt_num(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    if (!out) throw ArgumentError("write_line_chart: write failed for " + path.string());
}

}  // namespace snf
