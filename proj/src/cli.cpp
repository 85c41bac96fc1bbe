#include "pmlab/cli.hpp"

#include "pmlab/cones.hpp"
#include "pmlab/experiments.hpp"
#include "pmlab/format.hpp"
#include "pmlab/plot.hpp"
#include "pmlab/transfer.hpp"
#include "pmlab/ulam.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace pmlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Kind { real, integer, boolean, text, real_list };

struct KeySpec {
    const char* name;
    Kind kind;
    const char* help;
};

const KeySpec kKeys[] = {
    {"alpha", Kind::real, "exponent cap of the map family, 0 < alpha < 1"},
    {"seed", Kind::integer, "64-bit seed of the map sequence"},
    {"policy", Kind::text, "constant | uniform-random | explicit-list"},
    {"beta_min", Kind::real, "lower end of the uniform-random interval (beta_min, alpha]"},
    {"beta", Kind::real, "beta of the constant policy and of ulam-dump (default alpha)"},
    {"betas", Kind::real_list, "betas of the explicit-list policy"},
    {"n_max", Kind::integer, "number of operator steps"},
    {"phi", Kind::text, "first density: one | power:THETA | sample:SEED | shift-sin:AMP | shift-cos:AMP"},
    {"psi", Kind::text, "second density (same forms; default power:alpha/2)"},
    {"observable", Kind::text, "bounded test function: one | x | sin:AMP | cos:AMP"},
    {"log_correction", Kind::boolean, "subtract (1/alpha) log log n before fitting"},
    {"kappa", Kind::real, "constant of the epsilon(n) schedule"},
    {"band_lo", Kind::real, "lower end of the slope acceptance band"},
    {"band_hi", Kind::real, "upper end of the slope acceptance band"},
    {"eps", Kind::real, "ball radius"},
    {"eps_list", Kind::real_list, "radii for the covering scan"},
    {"n_eps", Kind::integer, "steps of the perturbed operator (0: ceil(c_cov eps^-alpha))"},
    {"c_cov", Kind::real, "covering constant (0: calibrate on the constant-alpha sequence)"},
    {"nz", Kind::integer, "ball centres z_j = j/nz"},
    {"nx", Kind::integer, "evaluation points x_k = (k+1)/nx"},
    {"samples", Kind::integer, "random (beta, f) pairs"},
    {"tol", Kind::real, "cone test tolerance"},
    {"steps", Kind::integer, "distortion steps"},
    {"j_lo", Kind::real, "left end of the arc J"},
    {"j_hi", Kind::real, "right end of the arc J"},
    {"grid", Kind::integer, "grid points on J"},
    {"mesh_cells", Kind::integer, "cells of the graded mesh"},
    {"mesh_grading", Kind::real, "mesh exponent p (0: 2/(1-alpha))"},
    {"out_dir", Kind::text, "output directory"},
    {"prefix", Kind::text, "output file stem (default: the command name)"},
    {"plot", Kind::boolean, "also write an SVG plot"},
    {"assert", Kind::boolean, "exit 3 when the acceptance check fails"},
};

const KeySpec& spec_of(const std::string& name) {
    for (const auto& k : kKeys) {
        if (name == k.name) return k;
    }
    throw std::logic_error("unknown key " + name);
}

const std::map<std::string, std::string>& command_help() {
    static const std::map<std::string, std::string> h{
        {"decay", "memory loss ||P_1^n phi - P_1^n psi||_1 and its log-log fit"},
        {"correlation", "non-stationary correlations and their L1 bound"},
        {"an-fit", "preimage ladder a_n and the fit of log a_n against log n"},
        {"cover", "covering times of arcs of length 2 eps"},
        {"kernel", "kernel K(x, z) of the perturbed operator and its minimum"},
        {"cone-check", "one-step cone invariance on random (beta, f)"},
        {"distortion", "derivative distortion along an arc"},
        {"ulam-dump", "Ulam matrix of one map as sparse triplets"},
    };
    return h;
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

const std::vector<std::string> kSeq{"seed", "policy", "beta_min", "beta", "betas"};
const std::vector<std::string> kMesh{"mesh_cells", "mesh_grading"};
const std::vector<std::string> kOut{"out_dir", "prefix", "plot", "assert"};

std::string kebab(std::string s) {
    for (char& c : s) {
        if (c == '_') c = '-';
    }
    return s;
}

double as_real(const std::string& field, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw std::invalid_argument("field '" + field + "': expected a number, got '" + s + "'");
    }
    return v;
}

std::uint64_t as_integer(const std::string& field, const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        if (!s.empty() && s[0] != '-') v = std::stoull(s, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw std::invalid_argument("field '" + field + "': expected a nonnegative integer, got '" +
                                    s + "'");
    }
    return v;
}

void check_type(const std::string& name, const json& v) {
    const KeySpec& k = spec_of(name);
    auto bad = [&](const char* what) {
        throw std::invalid_argument("field '" + name + "': expected " + what + ", got " + v.dump());
    };
    switch (k.kind) {
    case Kind::real:
        if (!v.is_number() && !(name == "beta" && v.is_null())) bad("a number");
        break;
    case Kind::integer:
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) bad("a nonnegative integer");
        break;
    case Kind::boolean:
        if (!v.is_boolean()) bad("true or false");
        break;
    case Kind::text:
        if (!v.is_string()) bad("a string");
        break;
    case Kind::real_list:
        if (!v.is_array()) bad("an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) bad("an array of numbers");
        }
        break;
    }
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Inputs

struct Outputs {
    fs::path csv, json, svg;
};

class Context {
public:
    explicit Context(const RunConfig& cfg) : cfg_(cfg), v_(cfg.values), hash_(config_hash(cfg)) {}

    [[nodiscard]] double real(const char* k) const { return v_.at(k).get<double>(); }
    [[nodiscard]] std::uint64_t integer(const char* k) const { return v_.at(k).get<std::uint64_t>(); }
    [[nodiscard]] std::size_t count(const char* k) const {
        return static_cast<std::size_t>(integer(k));
    }
    [[nodiscard]] bool flag(const char* k) const { return v_.at(k).get<bool>(); }
    [[nodiscard]] std::string text(const char* k) const { return v_.at(k).get<std::string>(); }
    [[nodiscard]] std::vector<double> list(const char* k) const {
        return v_.at(k).get<std::vector<double>>();
    }
    [[nodiscard]] double alpha() const { return real("alpha"); }
    [[nodiscard]] const std::string& hash() const { return hash_; }
    [[nodiscard]] const RunConfig& config() const { return cfg_; }

    [[nodiscard]] MapSequence sequence(std::size_t length) const {
        const auto policy = parse_policy(text("policy"));
        const double alpha = alpha_checked();
        switch (policy) {
        case SequencePolicy::constant:
            return MapSequence::constant(alpha, real("beta"), length);
        case SequencePolicy::uniform_random:
            return MapSequence::uniform_random(alpha, real("beta_min"), integer("seed"), length);
        case SequencePolicy::explicit_list: {
            auto b = list("betas");
            if (b.size() < length) {
                throw std::invalid_argument("field 'betas': " + std::to_string(b.size()) +
                                            " entries, the command needs " +
                                            std::to_string(length));
            }
            b.resize(length);
            return MapSequence::explicit_list(alpha, std::move(b));
        }
        }
        throw std::invalid_argument("field 'policy': unsupported");
    }

    [[nodiscard]] MeshPtr mesh() const {
        const double alpha = alpha_checked();
        const double p = real("mesh_grading");
        const std::size_t cells = count("mesh_cells");
        if (cells < 2) throw std::invalid_argument("field 'mesh_cells': need at least 2 cells");
        return GradedMesh::make(alpha, cells, p == 0.0 ? GradedMesh::default_grading(alpha) : p);
    }

    [[nodiscard]] double alpha_checked() const { return FamilyConfig(alpha()).alpha(); }

    [[nodiscard]] Outputs outputs() const {
        const fs::path dir = text("out_dir");
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!fs::is_directory(dir)) {
            throw std::invalid_argument("field 'out_dir': cannot create directory " + dir.string());
        }
        const std::string stem = text("prefix").empty() ? cfg_.command : text("prefix");
        return Outputs{dir / (stem + ".csv"), dir / (stem + ".json"), dir / (stem + ".svg")};
    }

    [[nodiscard]] std::string header() const {
        return "# config_hash=" + hash_ + " command=" + cfg_.command + "\n";
    }

private:
    const RunConfig& cfg_;
    const json& v_;
    std::string hash_;
};

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << body;
    if (!os) throw std::runtime_error("write failed for " + p.string());
}

json fit_json(const FitResult& f) {
    return json{{"slope", f.slope},
                {"intercept", f.intercept},
                {"residual_rms", f.residual_rms},
                {"window", json::array({f.window.lo, f.window.hi})},
                {"log_log_correction_used", f.log_log_correction_used},
                {"points", f.points}};
}

struct Report {
    json fit = nullptr;
    json results = json::object();
    bool checked = false;
    bool passed = true;
    std::string summary;
};

void finish(const Context& ctx, const Outputs& out, const std::string& csv_body, Report& r,
            double seconds, const std::string& svg = {}) {
    write_text(out.csv, ctx.header() + csv_body);
    if (!svg.empty()) write_text(out.svg, "<!-- config_hash=" + ctx.hash() + " -->\n" + svg);
    json side{{"command", ctx.config().command},
              {"config", ctx.config().values},
              {"config_hash", ctx.hash()},
              {"fit", r.fit},
              {"results", r.results},
              {"wall_time_s", seconds}};
    if (r.checked) side["check_passed"] = r.passed;
    write_text(out.json, side.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Observables

struct DensitySpec {
    std::string kind;
    double param = 0.0;
};

DensitySpec parse_density(const std::string& field, const std::string& s) {
    const auto colon = s.find(':');
    DensitySpec d{s.substr(0, colon), 0.0};
    const bool needs_param = d.kind == "power" || d.kind == "sample" || d.kind == "shift-sin" ||
                             d.kind == "shift-cos";
    if (d.kind != "one" && !needs_param) {
        throw std::invalid_argument("field '" + field + "': unknown density '" + s +
                                    "' (one, power:THETA, sample:SEED, shift-sin:AMP, "
                                    "shift-cos:AMP)");
    }
    if (needs_param != (colon != std::string::npos)) {
        throw std::invalid_argument("field '" + field + "': malformed density '" + s + "'");
    }
    if (needs_param) d.param = as_real(field, s.substr(colon + 1));
    return d;
}

bool is_shift(const DensitySpec& d) { return d.kind.rfind("shift-", 0) == 0; }

ConeDensity make_density(const DensitySpec& d, const MeshPtr& mesh, const std::string& field) {
    const double alpha = mesh->alpha();
    if (d.kind == "one") return ConeDensity::constant(mesh, 1.0);
    if (d.kind == "power") {
        if (!(d.param >= 0.0 && d.param <= alpha)) {
            throw std::invalid_argument("field '" + field + "': power exponent must lie in [0, alpha]");
        }
        return ConeDensity::power(mesh, d.param);
    }
    if (d.kind == "sample") {
        if (!(d.param >= 0.0) || d.param != std::floor(d.param)) {
            throw std::invalid_argument("field '" + field + "': sample seed must be a nonnegative integer");
        }
        return sample_cone_density(static_cast<std::uint64_t>(d.param), ConeParams(alpha), mesh);
    }
    throw std::invalid_argument("field '" + field + "': " + d.kind +
                                " needs the other density to be shifted too");
}

C1Observable make_c1(const DensitySpec& d) {
    const double amp = d.param;
    const double w = 2.0 * std::numbers::pi;
    if (d.kind == "shift-sin") {
        return C1Observable([=](double x) { return amp * std::sin(w * x); },
                            [=](double x) { return amp * w * std::cos(w * x); }, std::abs(amp),
                            std::abs(amp) * w);
    }
    return C1Observable([=](double x) { return amp * std::cos(w * x); },
                        [=](double x) { return -amp * w * std::sin(w * x); }, std::abs(amp),
                        std::abs(amp) * w);
}

struct Observable {
    std::function<double(double)> f;
    double sup = 0.0;
};

Observable parse_observable(const std::string& s) {
    if (s == "one") return {[](double) { return 1.0; }, 1.0};
    if (s == "x") return {[](double x) { return x; }, 1.0};
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    if ((kind == "sin" || kind == "cos") && colon != std::string::npos) {
        const double amp = as_real("observable", s.substr(colon + 1));
        const double w = 2.0 * std::numbers::pi;
        if (kind == "sin") return {[=](double x) { return amp * std::sin(w * x); }, std::abs(amp)};
        return {[=](double x) { return amp * std::cos(w * x); }, std::abs(amp)};
    }
    throw std::invalid_argument("field 'observable': unknown observable '" + s +
                                "' (one, x, sin:AMP, cos:AMP)");
}

bool in_band(double s, double lo, double hi) { return s >= lo && s <= hi; }

// ---------------------------------------------------------------------------
// Commands

Report cmd_decay(const Context& c, std::string& csv, std::string& svg) {
    const double alpha = c.alpha_checked();
    const std::size_t n_max = c.count("n_max");
    if (n_max < 1) throw std::invalid_argument("field 'n_max': must be >= 1");
    const MeshPtr mesh = c.mesh();
    const MapSequence seq = c.sequence(n_max);
    const DensitySpec ps = parse_density("phi", c.text("phi"));
    const DensitySpec qs = parse_density("psi", c.text("psi"));

    MemoryLossOptions opt;
    opt.use_log_correction = c.flag("log_correction");
    opt.observables = "phi=" + c.text("phi") + ";psi=" + c.text("psi");
    Report r;
    MemoryLossResult res;
    if (is_shift(ps) || is_shift(qs)) {
        if (!(is_shift(ps) && is_shift(qs))) {
            throw std::invalid_argument("fields 'phi'/'psi': shifted C1 observables must come in pairs");
        }
        const ConeParams cone(alpha);
        auto c1 = c1_memory_loss_experiment(seq, make_c1(ps), make_c1(qs), cone, mesh, n_max, opt);
        res = std::move(c1.run);
        r.results["shift"] = {{"lambda", c1.shift.lambda}, {"nu", c1.shift.nu}};
    } else {
        res = memory_loss_experiment(seq, make_density(ps, mesh, "phi"),
                                     make_density(qs, mesh, "psi"), n_max, opt);
    }

    std::ostringstream os;
    os << "n,D_n\n";
    for (std::size_t i = 0; i < res.series.ns.size(); ++i) {
        os << res.series.ns[i] << ',' << fmt17(res.series.values[i]) << '\n';
    }
    csv = os.str();

    const double theory = 1.0 - 1.0 / alpha;
    if (res.fit) r.fit = fit_json(*res.fit);
    r.results["theory_slope"] = theory;
    r.results["fit_uncorrected"] = res.fit_uncorrected ? fit_json(*res.fit_uncorrected) : json(nullptr);
    if (!res.fit_note.empty()) r.results["fit_note"] = res.fit_note;
    r.results["norm_sum"] = res.norm_sum;
    r.results["envelope_constant"] = res.envelope_constant;
    r.results["tail_ratio"] = res.tail_ratio;
    r.results["envelope_holds"] = res.envelope_holds();
    json sched = json::array();
    for (std::size_t n : res.series.ns) {
        if (n >= 3) {
            sched.push_back({{"n", n},
                             {"eps", epsilon_schedule(static_cast<double>(n), alpha, c.real("kappa"))}});
        }
    }
    r.results["epsilon_schedule"] = sched;

    const double lo = c.real("band_lo"), hi = c.real("band_hi");
    r.results["band"] = {lo, hi};
    r.checked = true;
    r.passed = res.fit && in_band(res.fit->slope, lo, hi) && res.envelope_holds();
    r.summary = "decay: slope " + (res.fit ? fmt_short(res.fit->slope) : std::string("n/a")) +
                " (band [" + fmt_short(lo) + ", " + fmt_short(hi) + "]), envelope C = " +
                fmt_short(res.envelope_constant);

    if (c.flag("plot")) {
        PlotSeries s{"D_n", {}, {}, true};
        for (std::size_t i = 0; i < res.series.ns.size(); ++i) {
            s.x.push_back(static_cast<double>(res.series.ns[i]));
            s.y.push_back(res.series.values[i]);
        }
        std::vector<GuideLine> g;
        if (!s.x.empty() && s.y.front() > 0) {
            g.push_back(GuideLine{"slope 1 - 1/alpha", theory, s.x.front(), s.y.front()});
        }
        svg = loglog_svg("memory loss, alpha = " + fmt_short(alpha), "n", "D_n", {s}, g);
    }
    return r;
}

Report cmd_correlation(const Context& c, std::string& csv, std::string& svg) {
    const double alpha = c.alpha_checked();
    const std::size_t n_max = c.count("n_max");
    if (n_max < 1) throw std::invalid_argument("field 'n_max': must be >= 1");
    const MeshPtr mesh = c.mesh();
    const MapSequence seq = c.sequence(n_max);
    const DensitySpec ps = parse_density("psi", c.text("psi"));
    const ConeDensity psi = make_density(ps, mesh, "psi");
    const ConeReport cone = is_in_C2(psi, ConeParams(alpha), 1e-6);
    if (!cone.ok) throw std::invalid_argument("field 'psi': density is not in C2");
    const Observable obs = parse_observable(c.text("observable"));
    const CorrelationResult res = correlation_experiment(seq, psi, obs.f, obs.sup, n_max);

    std::ostringstream os;
    os << "n,correlation,bound\n";
    for (std::size_t i = 0; i < res.ns.size(); ++i) {
        os << res.ns[i] << ',' << fmt17(res.correlation[i]) << ',' << fmt17(res.bound[i]) << '\n';
    }
    csv = os.str();

    Report r;
    r.results["phi_sup"] = res.phi_sup;
    r.results["min_slack"] = res.min_slack;
    r.checked = true;
    r.passed = res.min_slack >= 0.0;
    r.summary = "correlation: min slack " + fmt_short(res.min_slack);
    if (c.flag("plot")) {
        PlotSeries a{"correlation", {}, {}, true}, b{"bound", {}, {}, false};
        for (std::size_t i = 0; i < res.ns.size(); ++i) {
            a.x.push_back(static_cast<double>(res.ns[i]));
            a.y.push_back(res.correlation[i]);
            b.x.push_back(static_cast<double>(res.ns[i]));
            b.y.push_back(res.bound[i]);
        }
        std::vector<GuideLine> g;
        if (!b.x.empty() && b.y.front() > 0) {
            g.push_back(GuideLine{"slope 1 - 1/alpha", 1.0 - 1.0 / alpha, b.x.front(), b.y.front()});
        }
        svg = loglog_svg("correlations, alpha = " + fmt_short(alpha), "n", "", {a, b}, g);
    }
    return r;
}

Report cmd_an_fit(const Context& c, std::string& csv, std::string& svg) {
    const double alpha = c.alpha_checked();
    const std::size_t n_max = c.count("n_max");
    const LadderFit res = an_asymptotics(alpha, n_max, c.real("beta"));
    std::ostringstream os;
    os << "n,a_n\n";
    for (std::size_t n = 0; n < res.ladder.size(); ++n) os << n << ',' << fmt17(res.ladder[n]) << '\n';
    csv = os.str();

    Report r;
    r.fit = fit_json(res.fit);
    r.results["theory_slope"] = -1.0 / alpha;
    r.results["c_alpha"] = res.c_alpha;
    r.results["geometric_rate"] = res.geometric_rate;
    const double lo = c.real("band_lo"), hi = c.real("band_hi");
    r.results["band"] = {lo, hi};
    r.checked = true;
    r.passed = in_band(res.fit.slope, lo, hi);
    r.summary = "an-fit: slope " + fmt_short(res.fit.slope) + ", c_alpha " + fmt_short(res.c_alpha);
    if (c.flag("plot")) {
        PlotSeries s{"a_n", {}, {}, false};
        for (std::size_t n = 1; n < res.ladder.size(); ++n) {
            s.x.push_back(static_cast<double>(n));
            s.y.push_back(res.ladder[n]);
        }
        svg = loglog_svg("preimage ladder, alpha = " + fmt_short(alpha), "n", "a_n", {s},
                         {GuideLine{"slope -1/alpha", -1.0 / alpha, s.x.back(), s.y.back()}});
    }
    return r;
}

constexpr std::size_t kCoverSequence = 1'000'000;

Report cmd_cover(const Context& c, std::string& csv, std::string& svg) {
    const double alpha = c.alpha_checked();
    const MapSequence seq = c.sequence(kCoverSequence);
    const auto eps = c.list("eps_list");
    const CoverScan res = covering_time_scan(seq, eps);
    std::ostringstream os;
    os << "eps,cover_time\n";
    json pts = json::array();
    bool control_ok = true;
    for (const auto& p : res.points) {
        os << fmt17(p.eps) << ',' << p.worst << '\n';
        pts.push_back({{"eps", p.eps}, {"worst", p.worst}, {"control", p.control}, {"predicted", p.predicted}});
        control_ok = control_ok && p.control <= p.worst;
    }
    csv = os.str();

    Report r;
    r.fit = fit_json(res.fit);
    r.results["points"] = pts;
    r.results["control_fit"] = fit_json(res.control_fit);
    r.results["c_cov"] = res.c_cov;
    r.results["c_alpha"] = res.c_alpha;
    r.results["theory_slope"] = alpha;
    const double lo = c.real("band_lo"), hi = c.real("band_hi");
    r.results["band"] = {lo, hi};
    r.results["control_below_worst"] = control_ok;
    r.checked = true;
    r.passed = in_band(res.fit.slope, lo, hi) && control_ok;
    r.summary = "cover: slope " + fmt_short(res.fit.slope) + ", C_cov " + fmt_short(res.c_cov);
    if (c.flag("plot")) {
        PlotSeries w{"worst arc [0, 2 eps)", {}, {}, true}, k{"control arc at 1/3", {}, {}, true};
        for (const auto& p : res.points) {
            w.x.push_back(1.0 / p.eps);
            w.y.push_back(static_cast<double>(p.worst));
            k.x.push_back(1.0 / p.eps);
            k.y.push_back(static_cast<double>(p.control));
        }
        svg = loglog_svg("covering time, alpha = " + fmt_short(alpha), "1/eps", "steps", {w, k},
                         {GuideLine{"slope alpha", alpha, w.x.front(), w.y.front()}});
    }
    return r;
}

Report cmd_kernel(const Context& c, std::string& csv) {
    const double alpha = c.alpha_checked();
    const double eps = c.real("eps");
    double c_cov = c.real("c_cov");
    Report r;
    if (c_cov == 0.0) {
        const auto calib = covering_time_scan(MapSequence::constant(alpha, alpha, kCoverSequence),
                                              dyadic(4, 10));
        c_cov = calib.c_cov;
        r.results["c_cov_calibrated"] = true;
    }
    if (!(c_cov > 0.0)) throw std::invalid_argument("field 'c_cov': must be positive or 0");
    std::size_t n_eps = c.count("n_eps");
    if (n_eps == 0) n_eps = default_n_eps(eps, alpha, c_cov);
    const MapSequence seq = c.sequence(n_eps);
    const KernelEstimate k =
        kernel_estimate(seq, 0, eps, n_eps, c.count("nz"), c.count("nx"), c.mesh());
    std::ostringstream os;
    k.write_csv(os);
    csv = os.str();
    r.results["gamma_hat"] = k.gamma_hat;
    r.results["n_eps"] = n_eps;
    r.results["c_cov"] = c_cov;
    r.checked = true;
    r.passed = k.gamma_hat > 0.0;
    r.summary = "kernel: gamma_hat " + fmt_short(k.gamma_hat) + " after " + std::to_string(n_eps) +
                " steps";
    return r;
}

Report cmd_cone_check(const Context& c, std::string& csv) {
    const double alpha = c.alpha_checked();
    const ConeParams cone(alpha);
    const MeshPtr mesh = c.mesh();
    const double tol = c.real("tol");
    std::mt19937_64 rng(c.integer("seed"));
    std::ostringstream os;
    os << "sample,beta,c1_ok,c2_ok,violations\n";
    std::size_t failures = 0, violations = 0;
    json worst = json::array();
    for (std::size_t i = 0; i < c.count("samples"); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double beta = alpha * (1.0 - u);
        const std::uint64_t fseed = rng();
        const ConeDensity g = pf_grid_step(MapParam(beta), sample_cone_density(fseed, cone, mesh));
        const ConeReport r1 = is_in_C1(g, tol);
        const ConeReport r2 = is_in_C2(g, cone, tol);
        os << i << ',' << fmt17(beta) << ',' << r1.ok << ',' << r2.ok << ',' << r2.violation_count
           << '\n';
        if (!r1.ok || !r2.ok) {
            ++failures;
            violations += r2.violation_count;
            json j = r2;
            j["sample"] = i;
            j["beta"] = beta;
            worst.push_back(j);
        }
    }
    csv = os.str();
    Report r;
    r.results = {{"samples", c.count("samples")},
                 {"failures", failures},
                 {"violation_count", violations},
                 {"violations", worst},
                 {"a", cone.a()},
                 {"c3", cone.c3()},
                 {"tol", tol}};
    r.checked = true;
    r.passed = failures == 0;
    r.summary = "cone-check: " + std::to_string(failures) + " of " +
                std::to_string(c.count("samples")) + " samples left the cone";
    return r;
}

Report cmd_distortion(const Context& c, std::string& csv) {
    (void)c.alpha_checked();
    const std::size_t steps = c.count("steps");
    const MapSequence seq = c.sequence(steps);
    const DistortionResult d =
        distortion_scan(seq, Arc{c.real("j_lo"), c.real("j_hi")}, steps, c.count("grid"));
    std::ostringstream os;
    os << "n,distortion\n";
    for (std::size_t k = 0; k < d.per_step.size(); ++k) os << k + 1 << ',' << fmt17(d.per_step[k]) << '\n';
    csv = os.str();
    Report r;
    r.results = {{"sup", d.sup}, {"first_split", d.first_split}};
    r.summary = "distortion: sup " + fmt_short(d.sup) + ", first split at step " +
                std::to_string(d.first_split);
    return r;
}

Report cmd_ulam_dump(const Context& c, std::string& csv) {
    (void)c.alpha_checked();
    const UlamMatrix m = build_ulam(MapParam(c.real("beta")), c.mesh());
    std::ostringstream os;
    m.write_csv(os);
    csv = os.str();
    double worst = 0.0;
    for (int row = 0; row < m.matrix().outerSize(); ++row) {
        double s = 0.0;
        for (UlamMatrix::Sparse::InnerIterator it(m.matrix(), row); it; ++it) s += it.value();
        worst = std::max(worst, std::abs(s - 1.0));
    }
    Report r;
    r.results = {{"rows", m.matrix().rows()}, {"nonzeros", m.matrix().nonZeros()}, {"max_row_sum_error", worst}};
    r.summary = "ulam-dump: " + std::to_string(m.matrix().nonZeros()) + " nonzeros";
    return r;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> command_keys(const std::string& command) {
    const std::vector<std::string> base{"alpha"};
    if (command == "decay") {
        return with(with(with(with(base, kSeq), {"n_max", "phi", "psi", "log_correction", "kappa",
                                                  "band_lo", "band_hi"}), kMesh), kOut);
    }
    if (command == "correlation") {
        return with(with(with(with(base, kSeq), {"n_max", "psi", "observable"}), kMesh), kOut);
    }
    if (command == "an-fit") return with(with(base, {"beta", "n_max", "band_lo", "band_hi"}), kOut);
    if (command == "cover") return with(with(with(base, kSeq), {"eps_list", "band_lo", "band_hi"}), kOut);
    if (command == "kernel") {
        return with(with(with(with(base, kSeq), {"eps", "n_eps", "c_cov", "nz", "nx"}), kMesh), kOut);
    }
    if (command == "cone-check") {
        return with(with(with(base, {"seed", "samples", "tol"}), kMesh), {"out_dir", "prefix", "assert"});
    }
    if (command == "distortion") {
        return with(with(with(base, kSeq), {"steps", "j_lo", "j_hi", "grid"}), {"out_dir", "prefix"});
    }
    if (command == "ulam-dump") return with(with(base, {"beta"}), with(kMesh, {"out_dir", "prefix"}));
    throw std::invalid_argument("unknown command '" + command + "'");
}

json default_config(const std::string& command, double alpha) {
    const double theory = 1.0 - 1.0 / alpha;
    const json all{
        {"alpha", alpha},
        {"seed", 1},
        {"policy", command == "cover" ? "constant" : "uniform-random"},
        {"beta_min", 0.0},
        {"beta", nullptr},
        {"betas", json::array()},
        {"n_max", command == "an-fit" ? 10000 : 1000},
        {"phi", "one"},
        {"psi", "power:" + fmt17(alpha / 2.0)},
        {"observable", "sin:1"},
        {"log_correction", true},
        {"kappa", 1.0},
        {"band_lo", command == "an-fit" ? -1.05 / alpha
                    : command == "cover" ? alpha - 0.15
                                         : theory - 0.25},
        {"band_hi", command == "an-fit" ? -0.95 / alpha
                    : command == "cover" ? alpha + 0.15
                                         : theory + 0.15},
        {"eps", 1.0 / 64.0},
        {"eps_list", dyadic(4, 10)},
        {"n_eps", 0},
        {"c_cov", 0.0},
        {"nz", 64},
        {"nx", 64},
        {"samples", 200},
        {"tol", 1e-6},
        {"steps", 20},
        {"j_lo", 0.7},
        {"j_hi", 0.72},
        {"grid", 257},
        {"mesh_cells", 1u << 14},
        {"mesh_grading", 0.0},
        {"out_dir", "."},
        {"prefix", ""},
        {"plot", false},
        {"assert", false},
    };
    json out = json::object();
    for (const auto& k : command_keys(command)) out[k] = all.at(k);
    return out;
}

RunConfig merge_config(const std::string& command, const json& file, const json& flags) {
    const auto keys = command_keys(command);
    auto known = [&](const std::string& k) {
        return std::find(keys.begin(), keys.end(), k) != keys.end();
    };
    if (!file.is_null() && !file.is_object()) {
        throw std::invalid_argument("config file: top level must be a JSON object");
    }
    for (const json* layer : {&file, &flags}) {
        if (layer->is_null()) continue;
        for (const auto& [k, v] : layer->items()) {
            if (k == "command") {
                if (v != command) {
                    throw std::invalid_argument("config file: field 'command' is " + v.dump() +
                                                " but the command line runs '" + command + "'");
                }
                continue;
            }
            if (!known(k)) {
                throw std::invalid_argument("config: unknown field '" + k + "' for command '" +
                                            command + "'");
            }
            check_type(k, v);
        }
    }
    double alpha = 0.5;
    if (flags.contains("alpha")) {
        alpha = flags["alpha"].get<double>();
    } else if (file.is_object() && file.contains("alpha")) {
        alpha = file["alpha"].get<double>();
    }
    // Reject alpha early so alpha-dependent defaults stay finite.
    (void)FamilyConfig(alpha);

    RunConfig cfg{command, default_config(command, alpha)};
    for (const json* layer : {&file, &flags}) {
        if (layer->is_null()) continue;
        for (const auto& [k, v] : layer->items()) {
            if (k != "command") cfg.values[k] = v;
        }
    }
    if (cfg.values.contains("beta") && cfg.values["beta"].is_null()) cfg.values["beta"] = alpha;
    return cfg;
}

std::string config_hash(const RunConfig& config) {
    const std::string text = json{{"command", config.command}, {"config", config.values}}.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int execute(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const Context ctx(config);
    const Outputs out = ctx.outputs();
    std::string csv, svg;
    Report r;
    const std::string& cmd = config.command;
    if (cmd == "decay") r = cmd_decay(ctx, csv, svg);
    else if (cmd == "correlation") r = cmd_correlation(ctx, csv, svg);
    else if (cmd == "an-fit") r = cmd_an_fit(ctx, csv, svg);
    else if (cmd == "cover") r = cmd_cover(ctx, csv, svg);
    else if (cmd == "kernel") r = cmd_kernel(ctx, csv);
    else if (cmd == "cone-check") r = cmd_cone_check(ctx, csv);
    else if (cmd == "distortion") r = cmd_distortion(ctx, csv);
    else if (cmd == "ulam-dump") r = cmd_ulam_dump(ctx, csv);
    else throw std::invalid_argument("unknown command '" + cmd + "'");
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(ctx, out, csv, r, seconds, svg);

    std::cout << r.summary << "\n  " << out.csv.string() << '\n';
    const bool want_assert = config.values.contains("assert") && config.values["assert"].get<bool>();
    if (r.checked && !r.passed) {
        std::cout << "  acceptance check FAILED\n";
        if (want_assert) return kExitBand;
    }
    return kExitOk;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"pmlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
    CLI::App app{"pmlab: sequential intermittent maps, transfer operators and memory loss"};
    app.require_subcommand(1);
    std::map<std::string, std::string> config_path;
    std::map<std::string, std::map<std::string, std::string>> scalars;
    std::map<std::string, std::map<std::string, std::vector<std::string>>> lists;
    std::map<std::string, std::map<std::string, bool>> bools;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;

    for (const auto& [cmd, help] : command_help()) {
        CLI::App* sub = app.add_subcommand(cmd, help);
        sub->add_option("--config", config_path[cmd], "flat JSON config file; flags override it");
        for (const auto& key : command_keys(cmd)) {
            const KeySpec& k = spec_of(key);
            const std::string flag = "--" + kebab(key);
            CLI::Option* o = nullptr;
            switch (k.kind) {
            case Kind::boolean:
                o = sub->add_flag(flag + ",!--no-" + kebab(key), bools[cmd][key], k.help);
                break;
            case Kind::real_list:
                o = sub->add_option(flag, lists[cmd][key], k.help)->delimiter(',');
                break;
            default:
                o = sub->add_option(flag, scalars[cmd][key], k.help);
                break;
            }
            opts[cmd][key] = o;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        std::string cmd;
        for (const auto& [name, help] : command_help()) {
            if (app.got_subcommand(name)) cmd = name;
        }
        json file = nullptr;
        if (!config_path[cmd].empty()) {
            std::ifstream is(config_path[cmd]);
            if (!is) throw std::invalid_argument("cannot read config file " + config_path[cmd]);
            try {
                file = json::parse(is);
            } catch (const json::parse_error& e) {
                throw std::invalid_argument("config file " + config_path[cmd] + ": " + e.what());
            }
        }
        json flags = json::object();
        for (const auto& [key, o] : opts[cmd]) {
            if (o->count() == 0) continue;
            switch (spec_of(key).kind) {
            case Kind::boolean: flags[key] = bools[cmd][key]; break;
            case Kind::real: flags[key] = as_real(key, scalars[cmd][key]); break;
            case Kind::integer: flags[key] = as_integer(key, scalars[cmd][key]); break;
            case Kind::text: flags[key] = scalars[cmd][key]; break;
            case Kind::real_list: {
                json a = json::array();
                for (const auto& s : lists[cmd][key]) a.push_back(as_real(key, s));
                flags[key] = a;
                break;
            }
            }
        }
        return execute(merge_config(cmd, file, flags));
    } catch (const std::invalid_argument& e) {
        std::cerr << "pmlab: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::domain_error& e) {
        std::cerr << "pmlab: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::out_of_range& e) {
        std::cerr << "pmlab: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const json::exception& e) {
        std::cerr << "pmlab: invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "pmlab: error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace pmlab::cli
