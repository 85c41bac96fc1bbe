#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pmlab {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = true;
};

struct GuideLine {
    std::string label;
    double slope = 0.0;
    /// The line passes through (x0, y0).
    double x0 = 1.0;
    double y0 = 1.0;
};

/// Standalone SVG document with log-scaled axes.  Nonpositive points are
/// skipped.
[[nodiscard]] std::string loglog_svg(const std::string& title, const std::string& xlabel,
                                     const std::string& ylabel,
                                     const std::vector<PlotSeries>& series,
                                     const std::vector<GuideLine>& guides = {});

} // namespace pmlab
