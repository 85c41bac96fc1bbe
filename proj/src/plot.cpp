#include "pmlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pmlab {

namespace {

constexpr double kW = 640, kH = 440;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
        lo = std::floor(lo);
        hi = std::ceil(hi);
    }
};

} // namespace

std::string loglog_svg(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<PlotSeries>& series,
                       const std::vector<GuideLine>& guides) {
    Range rx, ry;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (s.x[i] > 0 && s.y[i] > 0) {
                rx.add(std::log10(s.x[i]));
                ry.add(std::log10(s.y[i]));
            }
        }
    }
    rx.finish();
    ry.finish();
    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double lx) { return kLeft + (lx - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double ly) { return kTop + (ry.hi - ly) / (ry.hi - ry.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << esc(title) << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = rx.lo; d <= rx.hi + 1e-9; d += 1) {
        o << "<line x1=\"" << num(px(d)) << "\" y1=\"" << kTop << "\" x2=\"" << num(px(d))
          << "\" y2=\"" << kTop + ph << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << num(px(d)) << "\" y=\"" << kTop + ph + 16
          << "\" text-anchor=\"middle\">1e" << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ry.lo; d <= ry.hi + 1e-9; d += 1) {
        o << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(d)) << "\" x2=\"" << kLeft + pw
          << "\" y2=\"" << num(py(d)) << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(d) + 4)
          << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
    }
    o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\">"
      << esc(xlabel) << "</text>\n";
    o << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + ph / 2 << ")\">" << esc(ylabel) << "</text>\n";

    o << "<clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";
    int legend = 0;
    std::ostringstream keys;
    auto key = [&](const std::string& label, const char* color, bool dashed) {
        const double y = kTop + 14 + 16 * legend++;
        keys << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << y << "\" x2=\""
             << kLeft + pw - 126 << "\" y2=\"" << y << "\" stroke=\"" << color << "\""
             << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        keys << "<text x=\"" << kLeft + pw - 120 << "\" y=\"" << y + 4 << "\">" << esc(label)
             << "</text>\n";
    };
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % 6];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
            const double X = px(std::log10(s.x[i])), Y = py(std::log10(s.y[i]));
            pts << num(X) << ',' << num(Y) << ' ';
            if (s.markers) {
                o << "<circle cx=\"" << num(X) << "\" cy=\"" << num(Y) << "\" r=\"2.5\" fill=\""
                  << color << "\"/>\n";
            }
        }
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts.str()
          << "\"/>\n";
        key(s.label, color, false);
    }
    for (const auto& g : guides) {
        if (!(g.x0 > 0 && g.y0 > 0)) continue;
        const double lx0 = std::log10(g.x0), ly0 = std::log10(g.y0);
        const double ya = ly0 + g.slope * (rx.lo - lx0), yb = ly0 + g.slope * (rx.hi - lx0);
        o << "<line x1=\"" << num(px(rx.lo)) << "\" y1=\"" << num(py(ya)) << "\" x2=\""
          << num(px(rx.hi)) << "\" y2=\"" << num(py(yb))
          << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
        key(g.label, "#555", true);
    }
    o << "</g>\n" << keys.str() << "</svg>\n";
    return o.str();
}

} // namespace pmlab
