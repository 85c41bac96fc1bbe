#pragma once

// Numerical experiments: memory loss, correlations, preimage ladders,
// covering times, distortion and the averaging error.

#include "pmlab/arcs.hpp"
#include "pmlab/cone_params.hpp"
#include "pmlab/density.hpp"
#include "pmlab/fit.hpp"
#include "pmlab/map_core.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pmlab {

/// Unique ceil(ratio^k) <= n_max for k = 0, 1, ..., followed by n_max.
[[nodiscard]] std::vector<std::size_t> geometric_checkpoints(std::size_t n_max,
                                                             double ratio = 1.2);

/// [max(10, n_max/20), n_max]
[[nodiscard]] FitWindow default_fit_window(std::size_t n_max);

/// n^{1-1/alpha} (log n)^{1/alpha}
[[nodiscard]] double decay_envelope(double n, double alpha);

struct MemoryLossOptions {
    /// Empty: geometric_checkpoints(n_max).
    std::vector<std::size_t> checkpoints;
    bool use_log_correction = true;
    std::optional<FitWindow> window;
    /// Cone used for the entry check; defaults to a = a_min(alpha).
    std::optional<ConeParams> cone;
    double mass_tol = 1e-8;
    double cone_tol = 1e-6;
    std::string observables;
};

struct MemoryLossResult {
    DecaySeries series;
    /// Empty when D_n vanishes somewhere in the window (e.g. phi = psi).
    std::optional<FitResult> fit;
    std::optional<FitResult> fit_uncorrected;
    /// Why the fit was skipped, if it was.
    std::string fit_note;
    /// ||phi||_1 + ||psi||_1
    double norm_sum = 0.0;
    /// C = max over checkpoints n >= 10 of D_n / (norm_sum * envelope(n)).
    double envelope_constant = 0.0;
    /// Largest ratio over the second half [n_max/2, n_max] divided by the
    /// largest ratio over [10, n_max/2).  <= 1 means the envelope constant is
    /// set by the transient, not by a ratio still growing at the end.
    double tail_ratio = 0.0;
    [[nodiscard]] bool envelope_holds() const { return tail_ratio <= 1.0; }
};

/// Pushes phi and psi through the first n_max maps of seq and records
/// D_n = ||P_1^n phi - P_1^n psi||_1 at the checkpoints.  Both inputs must
/// lie in C2 and have equal mass.
[[nodiscard]] MemoryLossResult memory_loss_experiment(const MapSequence& seq,
                                                      const ConeDensity& phi,
                                                      const ConeDensity& psi, std::size_t n_max,
                                                      const MemoryLossOptions& options = {});

struct C1MemoryLossResult {
    MemoryLossResult run;
    ShiftParams shift;
};

/// Shifts two C^1 observables of equal mean by a common psi + lambda x + nu
/// into C2 and runs memory_loss_experiment on the shifted densities.
[[nodiscard]] C1MemoryLossResult c1_memory_loss_experiment(
    const MapSequence& seq, const C1Observable& phi, const C1Observable& psi,
    const ConeParams& cone, MeshPtr mesh, std::size_t n_max, const MemoryLossOptions& options = {});

struct CorrelationResult {
    std::vector<std::size_t> ns;
    /// |int psi (phi o T_1^n) - int psi * int phi o T_1^n|
    std::vector<double> correlation;
    /// ||phi||_inf * ||P_1^n psi - m(psi) P_1^n 1||_1
    std::vector<double> bound;
    double phi_sup = 0.0;
    /// min over checkpoints of bound - correlation
    double min_slack = 0.0;
};

/// Evaluated through the transfer operator: int psi (phi o T^n) dm equals
/// int phi P^n psi dm, so no orbit is ever followed pointwise.
[[nodiscard]] CorrelationResult correlation_experiment(
    const MapSequence& seq, const ConeDensity& psi, const std::function<double(double)>& phi,
    double phi_sup, std::size_t n_max, std::vector<std::size_t> checkpoints = {});

struct LadderFit {
    /// log a_n against log n on [n_max/10, n_max].
    FitResult fit;
    /// max over 1 <= n <= n_max of a_n n^{1/alpha}
    double c_alpha = 0.0;
    /// Slope of log a_n against n on the same window.
    double geometric_rate = 0.0;
    std::vector<double> ladder;
};

/// Ladder of the single map T_beta (beta = alpha unless given).
[[nodiscard]] LadderFit an_asymptotics(double alpha, std::size_t n_max,
                                       std::optional<double> beta = {});

inline constexpr std::size_t kCoverGuard = 10'000'000;

/// Steps until push_arc along seq (from index start) turns `arcs` into the
/// full circle.  Throws std::runtime_error if the sequence runs out or the
/// guard is reached.
[[nodiscard]] std::size_t cover_time(const MapSequence& seq, std::size_t start,
                                     const ArcSet& arcs, std::size_t guard = kCoverGuard);

struct CoverPoint {
    double eps = 0.0;
    /// From [0, 2 eps).
    std::size_t worst = 0;
    /// From [1/3 - eps, 1/3 + eps).
    std::size_t control = 0;
    /// [3 c_alpha / (2 eps)]^alpha
    double predicted = 0.0;
};

struct CoverScan {
    std::vector<CoverPoint> points;
    /// log(worst time) against log(1/eps); window holds the index range.
    FitResult fit;
    FitResult control_fit;
    /// max over eps of worst time * eps^alpha
    double c_cov = 0.0;
    double c_alpha = 0.0;
};

[[nodiscard]] CoverScan covering_time_scan(const MapSequence& seq,
                                           std::span<const double> eps_list);

struct DistortionResult {
    /// per_step[k]: sup over grid pairs after k+1 steps.
    std::vector<double> per_step;
    double sup = 0.0;
    /// First k such that T_1^k(J) has 2/3 in its interior or runs through
    /// 1 == 0; n when that never happens within n steps.
    std::size_t first_split = 0;
};

/// sup over a, b on an evenly spaced grid of J of |log (T_1^k)'(a) - log
/// (T_1^k)'(b)|, k = 1..n.  A degenerate J (lo == hi) is a single point.
[[nodiscard]] DistortionResult distortion_scan(const MapSequence& seq, Arc J, std::size_t n,
                                               std::size_t grid = 257);

/// n^{-1/alpha} (kappa (1/alpha - 1) log n)^{1/alpha}, n >= 3.
[[nodiscard]] double epsilon_schedule(double n, double alpha, double kappa);

struct AveragingScan {
    std::vector<double> eps;
    /// ||A_eps f - f||_1
    std::vector<double> error;
    /// log error against log eps.
    LineFit fit;
    /// max over eps of error / (||f||_1 eps^{1-alpha})
    double constant = 0.0;
};

[[nodiscard]] AveragingScan averaging_error_scan(const ConeDensity& f,
                                                 std::span<const double> eps_list);

/// 2^{-k} for k = k_lo..k_hi.
[[nodiscard]] std::vector<double> dyadic(int k_lo, int k_hi);

} // namespace pmlab
