#include "pmlab/experiments.hpp"

#include "pmlab/cones.hpp"
#include "pmlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pmlab {

std::vector<std::size_t> geometric_checkpoints(std::size_t n_max, double ratio) {
    if (n_max < 1) throw std::invalid_argument("checkpoints: n_max must be >= 1");
    if (!(ratio > 1.0)) throw std::invalid_argument("checkpoints: ratio must exceed 1");
    std::vector<std::size_t> out;
    for (int k = 0;; ++k) {
        const double v = std::ceil(std::pow(ratio, k) - 1e-9);
        if (v > static_cast<double>(n_max)) break;
        const auto n = static_cast<std::size_t>(v);
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    if (out.back() != n_max) out.push_back(n_max);
    return out;
}

FitWindow default_fit_window(std::size_t n_max) {
    return FitWindow{std::max<std::size_t>(10, n_max / 20), n_max};
}

double decay_envelope(double n, double alpha) {
    return std::pow(n, 1.0 - 1.0 / alpha) * std::pow(std::log(n), 1.0 / alpha);
}

namespace {

std::vector<std::size_t> clean_checkpoints(std::vector<std::size_t> cps, std::size_t n_max) {
    if (cps.empty()) return geometric_checkpoints(n_max);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    if (cps.front() == 0) throw std::invalid_argument("checkpoints must be >= 1");
    if (cps.back() > n_max) throw std::invalid_argument("checkpoint beyond n_max");
    return cps;
}

void require_in_cone(const ConeDensity& f, const ConeParams& cone, double tol, const char* name) {
    const ConeReport r = is_in_C2(f, cone, tol);
    if (r.ok) return;
    const ConeViolation& v = r.violations.front();
    throw std::domain_error(std::string(name) + " is not in C2 (a = " + std::to_string(cone.a()) +
                            "): " + v.check + " violated at node " +
                            std::to_string(v.node_index) + ", magnitude " +
                            std::to_string(v.magnitude));
}

} // namespace

MemoryLossResult memory_loss_experiment(const MapSequence& seq, const ConeDensity& phi,
                                        const ConeDensity& psi, std::size_t n_max,
                                        const MemoryLossOptions& options) {
    if (n_max < 1) throw std::invalid_argument("memory loss: n_max must be >= 1");
    if (!phi.mesh().same_as(psi.mesh())) throw std::invalid_argument("memory loss: mesh mismatch");
    const double alpha = seq.alpha();
    if (std::abs(phi.mesh().alpha() - alpha) > 0.0) {
        throw std::invalid_argument("memory loss: mesh alpha differs from the sequence alpha");
    }
    const double m_phi = mass(phi);
    const double m_psi = mass(psi);
    if (std::abs(m_phi - m_psi) > options.mass_tol * std::max(1.0, std::abs(m_phi))) {
        throw std::domain_error("memory loss: masses differ, m(phi) = " + std::to_string(m_phi) +
                                ", m(psi) = " + std::to_string(m_psi));
    }
    const ConeParams cone = options.cone.value_or(ConeParams(alpha));
    require_in_cone(phi, cone, options.cone_tol, "phi");
    require_in_cone(psi, cone, options.cone_tol, "psi");

    const auto cps = clean_checkpoints(options.checkpoints, n_max);

    MemoryLossResult out;
    out.norm_sum = m_phi + m_psi;
    DecaySeries& s = out.series;
    s.meta.alpha = alpha;
    s.meta.seed = seq.seed();
    s.meta.policy = policy_name(seq.policy());
    s.meta.mesh_cells = phi.mesh().cells();
    s.meta.mesh_grading = phi.mesh().grading();
    s.meta.observables = options.observables;

    std::vector<ConeDensity> ds{phi, psi};
    std::size_t next = 0;
    sequential_push_many(seq, ds, n_max, 0, [&](std::size_t k, const std::vector<ConeDensity>& d) {
        if (next < cps.size() && cps[next] == k) {
            s.ns.push_back(k);
            s.values.push_back(l1_distance(d[0], d[1]));
            ++next;
        }
    });

    const FitWindow window = options.window.value_or(default_fit_window(n_max));
    std::size_t in_window = 0;
    bool positive = true;
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
        if (s.ns[i] < window.lo || s.ns[i] > window.hi) continue;
        ++in_window;
        positive = positive && s.values[i] > 0.0;
    }
    if (in_window < 5) {
        out.fit_note = "fewer than 5 checkpoints in the fit window";
    } else if (!positive) {
        out.fit_note = "D_n vanishes inside the fit window";
    } else {
        out.fit = fit_poly_log(s, options.use_log_correction, window);
        out.fit_uncorrected = fit_poly_log(s, false, window);
    }

    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
        const std::size_t n = s.ns[i];
        if (n < 10) continue;
        const double r =
            out.norm_sum > 0.0 ? s.values[i] / (out.norm_sum * decay_envelope(n, alpha)) : 0.0;
        out.envelope_constant = std::max(out.envelope_constant, r);
        if (2 * n >= n_max) {
            late = std::max(late, r);
        } else {
            early = std::max(early, r);
        }
    }
    if (early > 0.0) {
        out.tail_ratio = late / early;
    } else {
        out.tail_ratio = late > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return out;
}

C1MemoryLossResult c1_memory_loss_experiment(const MapSequence& seq, const C1Observable& phi,
                                             const C1Observable& psi, const ConeParams& cone,
                                             MeshPtr mesh, std::size_t n_max,
                                             const MemoryLossOptions& options) {
    const ShiftParams shift =
        c1_shift_params(std::max(phi.sup_norm(), psi.sup_norm()),
                        std::max(phi.deriv_sup_norm(), psi.deriv_sup_norm()), cone);
    const ConeDensity f = apply_shift(phi, shift, mesh);
    const ConeDensity g = apply_shift(psi, shift, mesh);
    MemoryLossOptions opts = options;
    if (!opts.cone) opts.cone = cone;
    return C1MemoryLossResult{memory_loss_experiment(seq, f, g, n_max, opts), shift};
}

CorrelationResult correlation_experiment(const MapSequence& seq, const ConeDensity& psi,
                                         const std::function<double(double)>& phi, double phi_sup,
                                         std::size_t n_max, std::vector<std::size_t> checkpoints) {
    if (!(phi_sup >= 0.0)) throw std::invalid_argument("correlation: sup norm must be >= 0");
    if (n_max < 1) throw std::invalid_argument("correlation: n_max must be >= 1");
    const auto cps = clean_checkpoints(std::move(checkpoints), n_max);
    const double m_psi = mass(psi);

    CorrelationResult out;
    out.phi_sup = phi_sup;
    out.min_slack = std::numeric_limits<double>::infinity();
    std::vector<ConeDensity> ds{psi, ConeDensity::constant(psi.mesh_ptr(), m_psi)};
    std::size_t next = 0;
    sequential_push_many(seq, ds, n_max, 0, [&](std::size_t k, const std::vector<ConeDensity>& d) {
        if (next >= cps.size() || cps[next] != k) return;
        ++next;
        const double c = std::abs(integrate_against(d[0], phi) - integrate_against(d[1], phi));
        const double b = phi_sup * l1_distance(d[0], d[1]);
        out.ns.push_back(k);
        out.correlation.push_back(c);
        out.bound.push_back(b);
        out.min_slack = std::min(out.min_slack, b - c);
    });
    return out;
}

LadderFit an_asymptotics(double alpha, std::size_t n_max, std::optional<double> beta) {
    const FamilyConfig family(alpha);
    if (n_max < 10) throw std::invalid_argument("an_asymptotics: n_max must be >= 10");
    const MapParam map(beta.value_or(alpha));
    if (map.beta() > alpha) throw std::domain_error("an_asymptotics: beta exceeds alpha");

    LadderFit out;
    out.ladder = preimage_ladder(map, n_max).values;
    const std::size_t lo = std::max<std::size_t>(1, n_max / 10);
    std::vector<double> ln, la, n_lin;
    for (std::size_t n = lo; n <= n_max; ++n) {
        ln.push_back(std::log(static_cast<double>(n)));
        la.push_back(std::log(out.ladder[n]));
        n_lin.push_back(static_cast<double>(n));
    }
    const LineFit line = fit_line(ln, la);
    out.fit.slope = line.slope;
    out.fit.intercept = line.intercept;
    out.fit.residual_rms = line.residual_rms;
    out.fit.window = FitWindow{lo, n_max};
    out.fit.points = ln.size();
    out.geometric_rate = fit_line(n_lin, la).slope;
    for (std::size_t n = 1; n <= n_max; ++n) {
        out.c_alpha = std::max(out.c_alpha,
                               out.ladder[n] * std::pow(static_cast<double>(n), 1.0 / alpha));
    }
    return out;
}

std::size_t cover_time(const MapSequence& seq, std::size_t start, const ArcSet& arcs,
                       std::size_t guard) {
    if (!(arcs.total_length() > 0.0)) throw std::invalid_argument("cover_time: empty arc set");
    ArcSet cur = arcs;
    std::size_t k = 0;
    while (!cur.is_full()) {
        if (k >= guard) {
            throw std::runtime_error("cover_time: no cover after " + std::to_string(guard) +
                                     " steps");
        }
        if (start + k >= seq.size()) {
            throw std::runtime_error("cover_time: sequence exhausted after " + std::to_string(k) +
                                     " steps");
        }
        cur = push_arc(seq[start + k], cur);
        ++k;
    }
    return k;
}

CoverScan covering_time_scan(const MapSequence& seq, std::span<const double> eps_list) {
    if (eps_list.size() < 2) throw std::invalid_argument("cover scan: need at least two eps");
    const double alpha = seq.alpha();
    CoverScan out;
    out.c_alpha = an_asymptotics(alpha, 10000).c_alpha;
    std::vector<double> le, lw, lc;
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps < 0.125)) {
            throw std::domain_error("cover scan: eps must lie in (0, 1/8), got " +
                                    std::to_string(eps));
        }
        CoverPoint p;
        p.eps = eps;
        p.worst = cover_time(seq, 0, ArcSet::from_circle_arc(0.0, 2.0 * eps));
        p.control = cover_time(seq, 0, ArcSet::from_circle_arc(1.0 / 3.0 - eps, 2.0 * eps));
        p.predicted = std::pow(3.0 * out.c_alpha / (2.0 * eps), alpha);
        out.points.push_back(p);
        out.c_cov = std::max(out.c_cov, static_cast<double>(p.worst) * std::pow(eps, alpha));
        le.push_back(std::log(1.0 / eps));
        lw.push_back(std::log(static_cast<double>(p.worst)));
        lc.push_back(std::log(static_cast<double>(p.control)));
    }
    auto to_fit = [&](const LineFit& l) {
        FitResult f;
        f.slope = l.slope;
        f.intercept = l.intercept;
        f.residual_rms = l.residual_rms;
        f.window = FitWindow{0, eps_list.size() - 1};
        f.points = eps_list.size();
        return f;
    };
    out.fit = to_fit(fit_line(le, lw));
    out.control_fit = to_fit(fit_line(le, lc));
    return out;
}

namespace {

// The image of a connected arc stops being one monotone piece once it holds
// 2/3 in its interior or runs through 1 == 0.
bool spans_break(const ArcSet& s) {
    if (s.is_full() || s.arcs().size() > 1) return true;
    for (const Arc& a : s.arcs()) {
        if (a.lo < kBranchPoint && a.hi > kBranchPoint) return true;
    }
    return false;
}

} // namespace

DistortionResult distortion_scan(const MapSequence& seq, Arc J, std::size_t n, std::size_t grid) {
    if (!(J.lo >= 0.0 && J.hi <= 1.0 && J.lo <= J.hi)) {
        throw std::invalid_argument("distortion: J must satisfy 0 <= lo <= hi <= 1");
    }
    const auto maps = seq.window(0, n);
    const bool point = !(J.hi > J.lo);
    const std::size_t g = point ? 1 : std::max<std::size_t>(grid, 2);
    std::vector<double> x(g), logd(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        x[i] = J.lo + (J.hi - J.lo) * static_cast<double>(i) / static_cast<double>(g);
    }

    DistortionResult out;
    out.first_split = n;
    ArcSet image = point ? ArcSet() : ArcSet({J});
    for (std::size_t k = 0; k < n; ++k) {
        if (!point && out.first_split == n && spans_break(image)) out.first_split = k;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < g; ++i) {
            logd[i] += std::log(eval_deriv(maps[k], x[i]));
            x[i] = eval_map(maps[k], x[i]);
            if (x[i] >= 1.0) x[i] -= 1.0;
            lo = std::min(lo, logd[i]);
            hi = std::max(hi, logd[i]);
        }
        out.per_step.push_back(hi - lo);
        out.sup = std::max(out.sup, hi - lo);
        if (!point && out.first_split == n) image = push_arc(maps[k], image);
    }
    return out;
}

double epsilon_schedule(double n, double alpha, double kappa) {
    const FamilyConfig family(alpha);
    if (!(n >= 3.0)) throw std::domain_error("epsilon_schedule: n must be >= 3");
    if (!(kappa > 0.0)) throw std::domain_error("epsilon_schedule: kappa must be positive");
    return std::pow(n, -1.0 / alpha) *
           std::pow(kappa * (1.0 / alpha - 1.0) * std::log(n), 1.0 / alpha);
}

AveragingScan averaging_error_scan(const ConeDensity& f, std::span<const double> eps_list) {
    if (eps_list.size() < 2) throw std::invalid_argument("averaging scan: need at least two eps");
    const double alpha = f.mesh().alpha();
    const double norm = mass(f);
    AveragingScan out;
    std::vector<double> le, lerr;
    for (double eps : eps_list) {
        const double err = l1_distance(average_op(f, eps), f);
        out.eps.push_back(eps);
        out.error.push_back(err);
        if (norm > 0.0) out.constant = std::max(out.constant, err / (norm * std::pow(eps, 1.0 - alpha)));
        le.push_back(std::log(eps));
        lerr.push_back(std::log(err));
    }
    out.fit = fit_line(le, lerr);
    return out;
}

std::vector<double> dyadic(int k_lo, int k_hi) {
    std::vector<double> out;
    for (int k = k_lo; k <= k_hi; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

} // namespace pmlab
