// Acceptance run: one PASS/FAIL line per criterion, details indented below.

#include "pmlab/cones.hpp"
#include "pmlab/experiments.hpp"
#include "pmlab/transfer.hpp"
#include "pmlab/ulam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pmlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), s);
    std::istringstream lines(o.detail);
    for (std::string line; std::getline(lines, line);) std::printf("       %s\n", line.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

constexpr double kAlpha = 0.5;
constexpr std::size_t kNMax = 1000;
constexpr double kBandLo = -1.25;
constexpr double kBandHi = -0.85;

struct DecayRun {
    std::string label;
    MemoryLossResult r;
};

std::vector<DecayRun> random_runs;
DecayRun constant_run;
double cover_constant = 0.0;

bool in_band(const MemoryLossResult& r) {
    return r.fit && r.fit->slope >= kBandLo && r.fit->slope <= kBandHi;
}

} // namespace

int main() {
    std::printf("pmlab acceptance run\n");

    criterion(1, "cone invariance under one step", [] {
        std::mt19937_64 rng(2024);
        std::size_t bad = 0, total = 0;
        std::string d;
        for (double alpha : {0.3, 0.5, 0.8}) {
            const ConeParams cone(alpha);
            const auto mesh = GradedMesh::make_default(alpha);
            std::size_t bad_a = 0;
            for (std::uint64_t s = 0; s < 200; ++s) {
                const MapParam map(alpha * (1.0 - uniform(rng)));
                const auto g = pf_grid_step(map, sample_cone_density(s, cone, mesh));
                ++total;
                if (!is_in_C1(g, 1e-6).ok || !is_in_C2(g, cone, 1e-6).ok) ++bad_a;
            }
            bad += bad_a;
            d += fmt("alpha=%.1f: %zu/200 pushed densities outside C2 (a=%.4f)\n", alpha, bad_a, cone.a());
        }
        return Outcome{bad == 0 && total == 600, d};
    });

    criterion(2, "mass conservation", [] {
        const ConeParams cone(kAlpha);
        const auto mesh = GradedMesh::make_default(kAlpha);
        const auto seq = MapSequence::uniform_random(kAlpha, 0.0, 99, 1000);
        std::vector<ConeDensity> d{ConeDensity::constant(mesh, 1.0), ConeDensity::power(mesh, 0.25),
                                   sample_cone_density(5, cone, mesh)};
        std::vector<double> start, prev;
        for (const auto& f : d) start.push_back(mass(f));
        prev = start;
        double step = 0.0;
        sequential_push_many(seq, d, 1000, 0, [&](std::size_t, const std::vector<ConeDensity>& v) {
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double m = mass(v[j]);
                step = std::max(step, std::abs(m - prev[j]));
                prev[j] = m;
            }
        });
        double total = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) total = std::max(total, std::abs(prev[j] - start[j]));
        return Outcome{step <= 1e-8 && total <= 1e-5,
                       fmt("max per-step drift %.3e (limit 1e-8), cumulative over 1000 steps %.3e (limit 1e-5)", step,
                           total)};
    });

    criterion(3, "grid and Ulam backends against the exact oracle", [] {
        const auto mesh = GradedMesh::make_default(kAlpha);
        const auto seq = MapSequence::constant(kAlpha, 0.5, 12);
        const auto grid = sequential_push(seq, ConeDensity::constant(mesh, 1.0), 12);
        const auto ulam = build_ulam(MapParam(0.5), mesh);
        Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh->cells()));
        for (int k = 0; k < 12; ++k) v = ulam.push_averages(v);
        double eg = 0.0, eu = 0.0;
        for (int k = 1; k <= 10; ++k) {
            const double x = k / 10.5;
            const double want = pf_exact_seq(seq.window(0, 12), [](double) { return 1.0; }, x);
            eg = std::max(eg, std::abs(grid.value(x) - want) / want);
            eu = std::max(eu, std::abs(v[static_cast<Eigen::Index>(mesh->locate(x))] - want) / want);
        }
        return Outcome{eg <= 1e-3 && eu <= 5e-3,
                       fmt("max relative error: grid %.3e (limit 1e-3), Ulam %.3e (limit 5e-3)", eg, eu)};
    });

    criterion(4, "preimage ladder exponent", [] {
        bool ok = true;
        std::string d;
        for (double alpha : {0.3, 0.5, 0.8}) {
            const auto a = an_asymptotics(alpha, 10000);
            const double want = -1.0 / alpha;
            const bool p = std::abs(a.fit.slope - want) <= 0.05 * std::abs(want);
            ok = ok && p;
            d += fmt("alpha=%.1f: slope %.5f vs %.5f (+-5%%), c_alpha %.4g\n", alpha, a.fit.slope, want, a.c_alpha);
        }
        return Outcome{ok, d};
    });

    criterion(5, "memory-loss rate over 20 random sequences", [] {
        const auto mesh = GradedMesh::make_default(kAlpha);
        const auto phi = ConeDensity::constant(mesh, 1.0);
        const auto psi = ConeDensity::power(mesh, 0.25);
        bool ok = true;
        std::string d;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto seq = MapSequence::uniform_random(kAlpha, 0.0, seed, kNMax);
            auto r = memory_loss_experiment(seq, phi, psi, kNMax);
            const bool p = in_band(r) && r.envelope_holds();
            ok = ok && p;
            if (r.fit) {
                lo = std::min(lo, r.fit->slope);
                hi = std::max(hi, r.fit->slope);
            }
            d += fmt("seed %2llu: slope %s, uncorrected %s, C %.4g, tail ratio %.3g, D_1000 %.3e\n",
                     static_cast<unsigned long long>(seed), r.fit ? fmt("%.4f", r.fit->slope).c_str() : "n/a",
                     r.fit_uncorrected ? fmt("%.4f", r.fit_uncorrected->slope).c_str() : "n/a",
                     r.envelope_constant, r.tail_ratio, r.series.values.back());
            random_runs.push_back({"seed " + std::to_string(seed), std::move(r)});
        }
        d += fmt("corrected slopes span [%.4f, %.4f]; band [%.2f, %.2f]", lo, hi, kBandLo, kBandHi);
        return Outcome{ok, d};
    });

    criterion(6, "sequence uniformity", [] {
        const auto mesh = GradedMesh::make_default(kAlpha);
        const auto seq = MapSequence::constant(kAlpha, kAlpha, kNMax);
        constant_run = {"constant beta=alpha",
                        memory_loss_experiment(seq, ConeDensity::constant(mesh, 1.0), ConeDensity::power(mesh, 0.25),
                                               kNMax)};
        bool band = in_band(constant_run.r);
        double cmin = constant_run.r.envelope_constant, cmax = cmin;
        for (const auto& run : random_runs) {
            band = band && in_band(run.r);
            cmin = std::min(cmin, run.r.envelope_constant);
            cmax = std::max(cmax, run.r.envelope_constant);
        }
        const double spread = cmax / cmin;
        const auto& cf = constant_run.r.fit;
        std::string d = fmt("constant run: slope %.4f, uncorrected %.4f, C %.4g\n", cf ? cf->slope : NAN,
                            constant_run.r.fit_uncorrected ? constant_run.r.fit_uncorrected->slope : NAN,
                            constant_run.r.envelope_constant);
        d += fmt("all runs in one band [%.2f, %.2f]: %s\n", kBandLo, kBandHi, band ? "yes" : "no");
        d += fmt("envelope constants span [%.4g, %.4g], ratio %.3g (limit 10)", cmin, cmax, spread);
        return Outcome{band && spread <= 10.0 && !random_runs.empty(), d};
    });

    criterion(7, "lower bound of P_1^m 1", [] {
        const ConeParams cone(kAlpha);
        const auto mesh = GradedMesh::make_default(kAlpha);
        double worst = std::numeric_limits<double>::infinity();
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto seq = MapSequence::uniform_random(kAlpha, 0.0, 100 + seed, 200);
            std::vector<ConeDensity> d{ConeDensity::constant(mesh, 1.0)};
            sequential_push_many(seq, d, 200, 0, [&](std::size_t, const std::vector<ConeDensity>& v) {
                for (std::size_t i = 1; i < mesh->nodes(); ++i) worst = std::min(worst, v[0].value_at_node(i));
            });
        }
        return Outcome{worst >= cone.c3() - 1e-6,
                       fmt("min over nodes, m <= 200, 20 sequences: %.6f; c3 = %.6f", worst, cone.c3())};
    });

    criterion(8, "averaging error exponent", [] {
        bool ok = true;
        std::string d;
        const auto eps = dyadic(4, 12);
        for (double alpha : {0.3, 0.5, 0.8}) {
            const auto s = averaging_error_scan(ConeDensity::power(GradedMesh::make_default(alpha), alpha), eps);
            const bool p = s.fit.slope >= (1 - alpha) - 0.1;
            ok = ok && p;
            d += fmt("alpha=%.1f: exponent %.4f (need >= %.2f), constant %.4g\n", alpha, s.fit.slope, 0.9 - alpha,
                     s.constant);
        }
        return Outcome{ok, d};
    });

    criterion(9, "covering time exponent", [] {
        const auto seq = MapSequence::constant(kAlpha, kAlpha, 1'000'000);
        const auto s = covering_time_scan(seq, dyadic(4, 10));
        cover_constant = s.c_cov;
        bool control = true;
        std::string d;
        for (const auto& p : s.points) {
            control = control && p.control <= p.worst;
            d += fmt("eps=2^%d: worst %zu, control %zu, predicted %.1f\n", static_cast<int>(std::log2(p.eps)), p.worst,
                     p.control, p.predicted);
        }
        const bool band = s.fit.slope >= kAlpha - 0.15 && s.fit.slope <= kAlpha + 0.15;
        d += fmt("slope %.4f in [%.2f, %.2f]; control slope %.4f; C_cov %.4g", s.fit.slope, kAlpha - 0.15,
                 kAlpha + 0.15, s.control_fit.slope, s.c_cov);
        return Outcome{band && control, d};
    });

    criterion(10, "kernel positivity", [] {
        if (!(cover_constant > 0.0)) return Outcome{false, "no covering constant from criterion 9"};
        const double eps = 1.0 / 64;
        const std::size_t n_eps = default_n_eps(eps, kAlpha, cover_constant);
        const auto mesh = GradedMesh::make_default(kAlpha);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        std::string d = fmt("eps = 2^-6, n_eps = %zu\n", n_eps);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto seq = MapSequence::uniform_random(kAlpha, 0.0, seed, n_eps);
            const auto k = kernel_estimate(seq, 0, eps, n_eps, 64, 64, mesh);
            lo = std::min(lo, k.gamma_hat);
            hi = std::max(hi, k.gamma_hat);
            d += fmt("seed %llu: gamma_hat %.4f\n", static_cast<unsigned long long>(seed), k.gamma_hat);
        }
        d += fmt("max/min %.3f (limit 3)", hi / lo);
        return Outcome{lo > 0.0 && hi / lo <= 3.0, d};
    });

    criterion(11, "shifted C1 observables", [] {
        const ConeParams cone(kAlpha);
        const auto mesh = GradedMesh::make_default(kAlpha);
        const double w = 2 * std::numbers::pi;
        const auto psi = C1Observable::sampled([=](double x) { return std::sin(w * x) / 10; },
                                               [=](double x) { return w * std::cos(w * x) / 10; });
        const auto phi = C1Observable::sampled([=](double x) { return std::cos(w * x) / 10; },
                                               [=](double x) { return -w * std::sin(w * x) / 10; });
        const auto shifted = c1_shift(psi, cone, mesh);
        const bool member = is_in_C2(shifted.density, cone, 1e-9).ok;

        double cmax = 0.0;
        for (const auto& run : random_runs) cmax = std::max(cmax, run.r.envelope_constant);
        const auto seq = MapSequence::uniform_random(kAlpha, 0.0, 1, kNMax);
        const auto r = c1_memory_loss_experiment(seq, phi, psi, cone, mesh, kNMax);
        const bool env = r.run.envelope_holds() && !random_runs.empty() && r.run.envelope_constant <= cmax;
        std::string d = fmt("sin(2 pi x)/10 shifted: in C2 %s (lambda %.4f, nu %.4f)\n", member ? "yes" : "no",
                            shifted.lambda, shifted.nu);
        d += fmt("shifted run (common lambda %.4f, nu %.4f): C %.4g, tail ratio %.3g; largest C of criterion 5: %.4g",
                 r.shift.lambda, r.shift.nu, r.run.envelope_constant, r.run.tail_ratio, cmax);
        return Outcome{member && env, d};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
