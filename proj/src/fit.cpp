#include "pmlab/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace pmlab {

void DecaySeries::validate() const {
    if (ns.size() != values.size()) throw std::invalid_argument("decay series: length mismatch");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i > 0 && ns[i] <= ns[i - 1]) {
            throw std::invalid_argument("decay series: n must be strictly increasing");
        }
        if (!(values[i] >= 0.0)) throw std::invalid_argument("decay series: negative value");
    }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return f;
}

FitResult fit_poly_log(const DecaySeries& series, bool use_log_correction, FitWindow window) {
    series.validate();
    if (!(window.lo < window.hi)) throw std::invalid_argument("fit_poly_log: empty window");
    if (use_log_correction && !(series.meta.alpha > 0.0)) {
        throw std::invalid_argument("fit_poly_log: correction needs alpha in the series meta");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < series.ns.size(); ++i) {
        const std::size_t n = series.ns[i];
        if (n < window.lo || n > window.hi) continue;
        if (!(series.values[i] > 0.0)) {
            throw std::domain_error("fit_poly_log: nonpositive value at n = " + std::to_string(n));
        }
        if (use_log_correction && n < 2) {
            throw std::domain_error("fit_poly_log: log log n undefined at n = 1");
        }
        const double logn = std::log(static_cast<double>(n));
        double v = std::log(series.values[i]);
        if (use_log_correction) v -= std::log(logn) / series.meta.alpha;
        lx.push_back(logn);
        ly.push_back(v);
    }
    if (lx.size() < 5) {
        throw std::invalid_argument("fit_poly_log: " + std::to_string(lx.size()) +
                                    " points in window, need 5");
    }
    const LineFit line = fit_line(lx, ly);
    FitResult r;
    r.slope = line.slope;
    r.intercept = line.intercept;
    r.residual_rms = line.residual_rms;
    r.log_log_correction_used = use_log_correction;
    r.window = window;
    r.points = lx.size();
    return r;
}

} // namespace pmlab
