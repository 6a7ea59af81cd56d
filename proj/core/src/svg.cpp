#include "hfrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace hfrisk::svg {
namespace {

constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string header(double width, double height, const std::string& title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2:.1f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
        width, height, width / 2, escape(title));
}

struct Scale {
    double lo;
    double hi;
    double px_lo;
    double px_hi;

    double operator()(double v) const {
        if (hi == lo) return (px_lo + px_hi) / 2;
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

std::string axis_ticks(const Scale& s, double y_axis, int n, bool horizontal, double other_lo, double other_hi) {
    std::string out;
    for (int k = 0; k <= n; ++k) {
        const double v = s.lo + (s.hi - s.lo) * k / n;
        const double p = s(v);
        if (horizontal) {
            out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#e0e0e0\"/>\n"
                               "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.3g}</text>\n",
                               p, other_lo, other_hi, y_axis + 14, v);
        } else {
            out += fmt::format("<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#e0e0e0\"/>\n"
                               "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.3g}</text>\n",
                               p, other_lo, other_hi, y_axis - 4, p + 4, v);
        }
    }
    return out;
}

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

std::string bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                      const std::string& axis_label) {
    const double left = 170;
    const double right = 30;
    const double top = 40;
    const double row_h = 18;
    const double width = 640;
    const double height = top + row_h * static_cast<double>(bars.size()) + 50;
    double max_v = 0.0;
    for (const auto& [_, v] : bars) max_v = std::max(max_v, v);
    if (max_v <= 0.0) max_v = 1.0;
    const Scale x{0.0, max_v, left, width - right};
    const double bottom = height - 40;

    std::string out = header(width, height, title);
    out += axis_ticks(x, bottom, 4, true, top, bottom);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = top + row_h * static_cast<double>(i);
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", left,
                           y + 2, x(bars[i].second) - left, row_h - 4, palette[0]);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6,
                           y + row_h / 2 + 4, escape(bars[i].first));
    }
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", (left + width - right) / 2,
                       height - 8, escape(axis_label));
    out += "</svg>\n";
    return out;
}

std::string box_plot(const std::string& title, const std::vector<Box>& boxes, const std::string& axis_label) {
    const double left = 60;
    const double top = 40;
    const double slot = 110;
    const double width = left + slot * static_cast<double>(std::max<std::size_t>(boxes.size(), 1)) + 20;
    const double height = 360;
    const double bottom = height - 50;
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& b : boxes) {
        lo = std::min(lo, b.whisker_low);
        hi = std::max(hi, b.whisker_high);
    }
    if (lo > hi) std::swap(lo, hi);
    const double pad = std::max((hi - lo) * 0.1, 0.005);
    const Scale y{lo - pad, hi + pad, bottom, top};

    std::string out = header(width, height, title);
    out += axis_ticks(y, left, 5, false, left, width - 20);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double half = slot * 0.25;
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx,
                           y(b.whisker_low), y(b.q1));
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", cx,
                           y(b.q3), y(b.whisker_high));
        for (double w : {b.whisker_low, b.whisker_high}) {
            out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{2:.2f}\" x2=\"{1:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
                               cx - half / 2, cx + half / 2, y(w));
        }
        out += fmt::format(
            "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#9ecae1\" stroke=\"black\"/>\n",
            cx - half, y(b.q3), 2 * half, y(b.q1) - y(b.q3));
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{2:.2f}\" x2=\"{1:.2f}\" y2=\"{2:.2f}\" stroke=\"black\" "
                           "stroke-width=\"2\"/>\n",
                           cx - half, cx + half, y(b.median));
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", cx, bottom + 16,
                           escape(b.label));
    }
    out += fmt::format("<text x=\"14\" y=\"{:.2f}\" transform=\"rotate(-90 14 {:.2f})\" text-anchor=\"middle\">{}</text>\n",
                       (top + bottom) / 2, (top + bottom) / 2, escape(axis_label));
    out += "</svg>\n";
    return out;
}

std::string roc_plot(const std::string& title, const std::vector<Series>& curves) {
    const double size = 420;
    const double left = 50;
    const double top = 40;
    const double width = left + size + 180;
    const double height = top + size + 50;
    const Scale x{0.0, 1.0, left, left + size};
    const Scale y{0.0, 1.0, top + size, top};

    std::string out = header(width, height, title);
    out += axis_ticks(x, top + size, 5, true, top, top + size);
    out += axis_ticks(y, left, 5, false, left, left + size);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" "
                       "stroke-dasharray=\"4 4\"/>\n",
                       x(0), y(0), x(1), y(1));
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* colour = palette[i % std::size(palette)];
        std::string pts;
        for (const auto& [fx, fy] : curves[i].points) pts += fmt::format("{:.2f},{:.2f} ", x(fx), y(fy));
        if (!pts.empty()) pts.pop_back();
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, pts);
        const double ly = top + 10 + 16 * static_cast<double>(i);
        out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
                           "stroke-width=\"2\"/>\n<text x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
                           left + size + 15, ly, left + size + 35, colour, left + size + 40, ly + 4,
                           escape(curves[i].name));
    }
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">False positive rate</text>\n",
                       left + size / 2, height - 8);
    out += fmt::format("<text x=\"14\" y=\"{0:.2f}\" transform=\"rotate(-90 14 {0:.2f})\" "
                       "text-anchor=\"middle\">True positive rate</text>\n",
                       top + size / 2);
    out += "</svg>\n";
    return out;
}

std::string beeswarm(const std::string& title, const ShapSummary& summary) {
    const double left = 170;
    const double top = 40;
    const double row_h = 22;
    const double width = 680;
    const double n_rows = static_cast<double>(summary.ranking.size());
    const double height = top + row_h * n_rows + 50;
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& p : summary.beeswarm) {
        lo = std::min(lo, p.attribution);
        hi = std::max(hi, p.attribution);
    }
    if (lo == hi) hi = lo + 1.0;
    const Scale x{lo, hi, left, width - 30};
    const double bottom = top + row_h * n_rows;

    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < summary.ranking.size(); ++i) row_of[summary.ranking[i].first] = i;
    // Colour by within-feature value rank.
    std::map<std::string, std::vector<double>> sorted_values;
    for (const auto& p : summary.beeswarm) {
        if (p.value) sorted_values[p.feature].push_back(*p.value);
    }
    for (auto& [_, v] : sorted_values) std::sort(v.begin(), v.end());

    std::string out = header(width, height, title);
    out += axis_ticks(x, bottom, 4, true, top, bottom);
    for (std::size_t i = 0; i < summary.ranking.size(); ++i) {
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6,
                           top + row_h * (static_cast<double>(i) + 0.5) + 4, escape(summary.ranking[i].first));
    }
    std::map<std::string, std::size_t> seen;
    for (const auto& p : summary.beeswarm) {
        const auto r = row_of.at(p.feature);
        const std::size_t k = seen[p.feature]++;
        // Deterministic vertical jitter from the point's ordinal.
        const double jitter = (static_cast<double>((k * 7919) % 97) / 96.0 - 0.5) * row_h * 0.7;
        const double cy = top + row_h * (static_cast<double>(r) + 0.5) + jitter;
        std::string colour = "#999999";
        if (p.value) {
            const auto& v = sorted_values[p.feature];
            const auto lo_it = std::lower_bound(v.begin(), v.end(), *p.value);
            const double t = v.size() > 1 ? static_cast<double>(lo_it - v.begin()) / static_cast<double>(v.size() - 1) : 0.5;
            colour = fmt::format("#{:02x}{:02x}{:02x}", static_cast<int>(30 + 200 * t), 60,
                                 static_cast<int>(230 - 200 * t));
        }
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                           x(p.attribution), cy, colour);
    }
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"gray\"/>\n", x(0.0),
                       top, bottom);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">Attribution (log-odds)</text>\n",
                       (left + width - 30) / 2, height - 8);
    out += "</svg>\n";
    return out;
}

}  // namespace hfrisk::svg
