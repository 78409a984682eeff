#pragma once

// Minimal SVG plotting: bars, lines and min/max ribbons on linear axes.
// Output depends only on the inputs, so figures can be diffed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ulda/io.hpp"

namespace ulda::svg {

inline std::string num(double v) { return io::format_fixed(v, 2); }

inline std::string escape(const std::string& s) {
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

struct Series {
    enum class Kind { kBars, kLine, kRibbon } kind = Kind::kLine;
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;   // bars/line values, ribbon lower edge
    std::vector<double> y2;  // ribbon upper edge
    double opacity = 1.0;
};

/// One chart panel. NaN points break lines and ribbons.
class Plot {
public:
    Plot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    Plot& bars(std::string label, std::string color, std::vector<double> x, std::vector<double> y, double opacity = 0.6) {
        series_.push_back({Series::Kind::kBars, std::move(label), std::move(color), std::move(x), std::move(y), {}, opacity});
        return *this;
    }
    Plot& line(std::string label, std::string color, std::vector<double> x, std::vector<double> y) {
        series_.push_back({Series::Kind::kLine, std::move(label), std::move(color), std::move(x), std::move(y), {}, 1.0});
        return *this;
    }
    Plot& ribbon(std::string label, std::string color, std::vector<double> x, std::vector<double> lo,
                 std::vector<double> hi, double opacity = 0.25) {
        series_.push_back({Series::Kind::kRibbon, std::move(label), std::move(color), std::move(x), std::move(lo),
                           std::move(hi), opacity});
        return *this;
    }

    /// Renders at (left, top) in a width x height box.
    std::string render(double left, double top, double width, double height) const {
        constexpr double ml = 60, mr = 20, mt = 30, mb = 45;
        double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
        bool any = false;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                for (double v : {s.y[i], s.y2.empty() ? s.y[i] : s.y2[i]}) {
                    if (std::isnan(v) || std::isnan(s.x[i])) continue;
                    if (!any) {
                        x0 = x1 = s.x[i];
                        y0 = y1 = v;
                        any = true;
                    }
                    x0 = std::min(x0, s.x[i]);
                    x1 = std::max(x1, s.x[i]);
                    y0 = std::min(y0, v);
                    y1 = std::max(y1, v);
                }
            }
        }
        y0 = std::min(y0, 0.0);
        if (!(x1 > x0)) x1 = x0 + 1;
        if (!(y1 > y0)) y1 = y0 + 1;
        y1 += 0.05 * (y1 - y0);

        const double pw = width - ml - mr, ph = height - mt - mb;
        auto sx = [&](double x) { return left + ml + (x - x0) / (x1 - x0) * pw; };
        auto sy = [&](double y) { return top + mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

        std::string o;
        o += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
        o += "<text x=\"" + num(left + width / 2) + "\" y=\"" + num(top + 18) +
             "\" text-anchor=\"middle\" font-size=\"13\">" + escape(title_) + "</text>\n";
        o += "<rect x=\"" + num(left + ml) + "\" y=\"" + num(top + mt) + "\" width=\"" + num(pw) + "\" height=\"" +
             num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
            o += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(top + mt + ph + 15) + "\" text-anchor=\"middle\">" +
                 tick(xv) + "</text>\n";
            o += "<text x=\"" + num(left + ml - 5) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" +
                 tick(yv) + "</text>\n";
        }
        o += "<text x=\"" + num(left + ml + pw / 2) + "\" y=\"" + num(top + height - 8) +
             "\" text-anchor=\"middle\">" + escape(x_label_) + "</text>\n";
        o += "<text x=\"" + num(left + 14) + "\" y=\"" + num(top + mt + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
             num(left + 14) + " " + num(top + mt + ph / 2) + ")\">" + escape(y_label_) + "</text>\n";

        for (const auto& s : series_) {
            switch (s.kind) {
                case Series::Kind::kBars: {
                    const double bw = s.x.size() > 1 ? 0.9 * pw / static_cast<double>(s.x.size()) : 0.5 * pw;
                    for (std::size_t i = 0; i < s.x.size(); ++i) {
                        if (std::isnan(s.y[i]) || s.y[i] == 0.0) continue;
                        const double top_y = sy(std::max(s.y[i], 0.0)), base = sy(std::min(s.y[i], 0.0));
                        o += "<rect x=\"" + num(sx(s.x[i]) - bw / 2) + "\" y=\"" + num(top_y) + "\" width=\"" + num(bw) +
                             "\" height=\"" + num(base - top_y) + "\" fill=\"" + s.color + "\" fill-opacity=\"" +
                             num(s.opacity) + "\"/>\n";
                    }
                    break;
                }
                case Series::Kind::kLine: {
                    std::string pts;
                    auto flush = [&] {
                        if (!pts.empty())
                            o += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
                                 pts + "\"/>\n";
                        pts.clear();
                    };
                    for (std::size_t i = 0; i < s.x.size(); ++i) {
                        if (std::isnan(s.y[i])) {
                            flush();
                            continue;
                        }
                        if (!pts.empty()) pts += ' ';
                        pts += num(sx(s.x[i])) + "," + num(sy(s.y[i]));
                    }
                    flush();
                    break;
                }
                case Series::Kind::kRibbon: {
                    std::size_t i = 0;
                    while (i < s.x.size()) {
                        while (i < s.x.size() && (std::isnan(s.y[i]) || std::isnan(s.y2[i]))) ++i;
                        const std::size_t start = i;
                        while (i < s.x.size() && !std::isnan(s.y[i]) && !std::isnan(s.y2[i])) ++i;
                        if (i == start) continue;
                        std::string pts;
                        for (std::size_t k = start; k < i; ++k) pts += num(sx(s.x[k])) + "," + num(sy(s.y2[k])) + " ";
                        for (std::size_t k = i; k-- > start;) pts += num(sx(s.x[k])) + "," + num(sy(s.y[k])) + " ";
                        pts.pop_back();
                        o += "<polygon fill=\"" + s.color + "\" fill-opacity=\"" + num(s.opacity) +
                             "\" stroke=\"none\" points=\"" + pts + "\"/>\n";
                    }
                    break;
                }
            }
        }
        // Legend
        double ly = top + mt + 12;
        for (const auto& s : series_) {
            if (s.label.empty()) continue;
            o += "<rect x=\"" + num(left + ml + pw - 130) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"10\" fill=\"" +
                 s.color + "\"/>\n";
            o += "<text x=\"" + num(left + ml + pw - 112) + "\" y=\"" + num(ly) + "\">" + escape(s.label) + "</text>\n";
            ly += 15;
        }
        o += "</g>\n";
        return o;
    }

private:
    static std::string tick(double v) {
        const double a = std::abs(v);
        if (a != 0.0 && (a < 0.01 || a >= 1e5)) {
            // Coarse scientific notation for tiny/huge values.
            const int e = static_cast<int>(std::floor(std::log10(a)));
            return num(v / std::pow(10.0, e)) + "e" + std::to_string(e);
        }
        return num(v);
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

/// Stacks panels vertically into one document.
inline std::string document(const std::vector<Plot>& panels, double width = 720, double panel_height = 360) {
    const double height = panel_height * static_cast<double>(panels.size());
    std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                    "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        o += panels[i].render(0, panel_height * static_cast<double>(i), width, panel_height);
    o += "</svg>\n";
    return o;
}

}  // namespace ulda::svg
