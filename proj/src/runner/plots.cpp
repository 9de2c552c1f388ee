#include "bohm/runner/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bohm/detail/text.hpp"

namespace bohm::runner {

using detail::format_double;

std::string gnuplot_blocks(const std::vector<Series>& series, const std::string& columns, std::uint64_t hash) {
    std::string out = "# config_hash=" + detail::format_hash(hash) + "\n# " + columns + "\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (s > 0) out += "\n\n";
        out += "# " + series[s].label + "\n";
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            out += format_double(series[s].x[i]) + " " + format_double(series[s].y[i]) + "\n";
    }
    return out;
}

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0, kMargin = 50.0;

const char* colour(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
    return palette[i % 7];
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

// Short fixed-precision label; the data files carry full precision.
std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, std::uint64_t hash) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
        for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!(x0 < x1)) x0 -= 0.5, x1 += 0.5;
    if (!(y0 < y1)) y0 -= 0.5, y1 += 0.5;
    const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
    auto px = [&](double v) { return kMargin + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return kHeight - kMargin - (v - y0) / (y1 - y0) * ph; };

    std::string out = "<!-- config_hash=" + detail::format_hash(hash) + " -->\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape(title) + "</text>\n";
    out += "<rect x=\"50\" y=\"50\" width=\"540\" height=\"300\" fill=\"none\" stroke=\"black\"/>\n";
    auto text = [&](double x, double y, const std::string& s, const char* anchor) {
        out += "<text x=\"" + label(x) + "\" y=\"" + label(y) + "\" text-anchor=\"" + anchor +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s) + "</text>\n";
    };
    text(kMargin, kHeight - kMargin + 16, label(x0), "start");
    text(kWidth - kMargin, kHeight - kMargin + 16, label(x1), "end");
    text(kMargin - 4, kHeight - kMargin, label(y0), "end");
    text(kMargin - 4, kMargin + 10, label(y1), "end");
    text(kWidth / 2, kHeight - 12, xlabel, "middle");
    text(14, kHeight / 2, ylabel, "middle");
    for (std::size_t s = 0; s < series.size(); ++s) {
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour(s)) + "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (i > 0) out += ' ';
            out += label(px(series[s].x[i])) + "," + label(py(series[s].y[i]));
        }
        out += "\"/>\n";
    }
    if (series.size() <= 8) {
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double y = kMargin + 14 + 14 * static_cast<double>(s);
            out += "<text x=\"580\" y=\"" + label(y) + "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
                   colour(s) + "\">" + escape(series[s].label) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace bohm::runner
