#pragma once

// Least-squares fits of decay series on log-log axes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pmlab {

struct DecayMeta {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string policy;
    std::size_t mesh_cells = 0;
    double mesh_grading = 0.0;
    std::string observables;
};

/// (n, D_n) pairs, n strictly increasing, D_n >= 0.
struct DecaySeries {
    std::vector<std::size_t> ns;
    std::vector<double> values;
    DecayMeta meta;

    /// Throws std::invalid_argument if the invariants fail.
    void validate() const;
};

struct FitWindow {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    bool log_log_correction_used = false;
    double residual_rms = 0.0;
    FitWindow window;
    std::size_t points = 0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least squares y = intercept + slope x, centered to avoid
/// cancellation.  Needs at least two distinct x.
[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fits log D_n = c + s log n over window.lo <= n <= window.hi.  With the
/// correction, (1/alpha) log log n is subtracted from log D_n first (alpha
/// from series.meta).  Needs five points, all positive.
[[nodiscard]] FitResult fit_poly_log(const DecaySeries& series, bool use_log_correction,
                                     FitWindow window);

} // namespace pmlab
