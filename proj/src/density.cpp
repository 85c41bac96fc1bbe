#include "pmlab/density.hpp"

#include "pmlab/arcs.hpp"
#include "pmlab/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace pmlab {

namespace {

constexpr std::size_t kNormGridPoints = 10000;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

// ---------------------------------------------------------------------------
// GradedMesh

GradedMesh::GradedMesh(double alpha, std::size_t cells, double grading)
    : alpha_(alpha), cells_(cells), grading_(grading) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("mesh alpha must satisfy 0 < alpha < 1");
    }
    if (cells < 1) throw std::invalid_argument("mesh needs at least one cell");
    if (!(grading * (1.0 - alpha) >= 1.0 - 1e-12)) {
        throw std::domain_error("mesh grading p must satisfy p >= 1/(1-alpha)");
    }
    x_.resize(cells + 1);
    u_.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        x_[i] = i == cells ? 1.0 : std::pow(static_cast<double>(i) / cells, grading);
        u_[i] = std::pow(x_[i], alpha);
    }
    for (std::size_t i = 0; i < cells; ++i) {
        if (!(x_[i + 1] > x_[i])) {
            throw std::domain_error("mesh nodes not strictly increasing; reduce N or p");
        }
    }
    wl_.resize(cells);
    wr_.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        std::tie(wl_[i], wr_[i]) = interval_weights(x_[i], x_[i + 1]);
    }
}

MeshPtr GradedMesh::make(double alpha, std::size_t cells, double grading) {
    return std::make_shared<const GradedMesh>(alpha, cells, grading);
}

MeshPtr GradedMesh::make_default(double alpha, std::size_t cells) {
    return make(alpha, cells, default_grading(alpha));
}

std::size_t GradedMesh::locate(double y) const {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw std::domain_error("mesh lookup outside [0,1]: " + std::to_string(y));
    }
    const std::size_t last = cells_ - 1;
    if (y >= 1.0) return last;
    auto c = static_cast<std::size_t>(std::pow(y, 1.0 / grading_) * static_cast<double>(cells_));
    c = std::min(c, last);
    while (c > 0 && x_[c] > y) --c;
    while (c < last && x_[c + 1] <= y) ++c;
    return c;
}

std::pair<double, double> GradedMesh::interval_weights(double xa, double xb) const {
    if (!(xb > xa)) return {0.0, 0.0};
    // Long double absorbs the cancellation in dx - ua * V on short cells.
    using ld = long double;
    const ld a = alpha_;
    const ld la = xa;
    const ld lb = xb;
    const ld ua = std::pow(la, a);
    const ld ub = std::pow(lb, a);
    const ld v = (std::pow(lb, 1 - a) - std::pow(la, 1 - a)) / (1 - a);
    const ld wr = ((lb - la) - ua * v) / (ub - ua);
    return {static_cast<double>(v - wr), static_cast<double>(wr)};
}

bool GradedMesh::same_as(const GradedMesh& other) const noexcept {
    return this == &other || (alpha_ == other.alpha_ && cells_ == other.cells_ &&
                              grading_ == other.grading_);
}

// ---------------------------------------------------------------------------
// ConeDensity

ConeDensity::ConeDensity(MeshPtr mesh, std::vector<double> h)
    : mesh_(std::move(mesh)), h_(std::move(h)) {
    if (!mesh_) throw std::invalid_argument("density requires a mesh");
    if (h_.size() != mesh_->nodes()) {
        throw std::invalid_argument("density has " + std::to_string(h_.size()) +
                                    " values for a mesh with " + std::to_string(mesh_->nodes()) +
                                    " nodes");
    }
    for (std::size_t i = 0; i < h_.size(); ++i) {
        if (!std::isfinite(h_[i]) || h_[i] < 0.0) {
            throw std::domain_error("density value h[" + std::to_string(i) +
                                    "] = " + std::to_string(h_[i]) +
                                    " is not finite and nonnegative");
        }
    }
}

ConeDensity ConeDensity::from_regularized(MeshPtr mesh, const std::function<double(double)>& h) {
    const auto x = mesh->x();
    std::vector<double> hv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) hv[i] = h(x[i]);
    return ConeDensity(std::move(mesh), std::move(hv));
}

ConeDensity ConeDensity::from_density(MeshPtr mesh, const std::function<double(double)>& f,
                                      double h0) {
    const auto x = mesh->x();
    const auto u = mesh->u();
    std::vector<double> hv(x.size());
    hv[0] = h0;
    for (std::size_t i = 1; i < x.size(); ++i) hv[i] = u[i] * f(x[i]);
    return ConeDensity(std::move(mesh), std::move(hv));
}

ConeDensity ConeDensity::constant(MeshPtr mesh, double value) {
    std::vector<double> hv(mesh->u().begin(), mesh->u().end());
    for (double& v : hv) v *= value;
    return ConeDensity(std::move(mesh), std::move(hv));
}

ConeDensity ConeDensity::power(MeshPtr mesh, double theta) {
    const std::pair<double, double> term{theta, 1.0};
    return mixture(std::move(mesh), 0.0, std::span(&term, 1));
}

ConeDensity ConeDensity::mixture(MeshPtr mesh, double constant_weight,
                                 std::span<const std::pair<double, double>> theta_weight) {
    const double alpha = mesh->alpha();
    for (const auto& [theta, w] : theta_weight) {
        if (!(theta >= 0.0 && theta <= alpha)) {
            throw std::domain_error("mixture exponent theta must lie in [0, alpha]");
        }
        if (!(w >= 0.0)) throw std::domain_error("mixture weights must be nonnegative");
    }
    if (!(constant_weight >= 0.0)) throw std::domain_error("mixture weights must be nonnegative");
    std::vector<std::pair<double, double>> terms(theta_weight.begin(), theta_weight.end());
    const auto x = mesh->x();
    const auto u = mesh->u();
    std::vector<double> hv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = constant_weight * u[i];
        // pow(0, 0) = 1 gives the exact limit h(0) for theta = alpha.
        for (const auto& [theta, w] : terms) s += w * (1.0 - theta) * std::pow(x[i], alpha - theta);
        hv[i] = s;
    }
    return ConeDensity(std::move(mesh), std::move(hv));
}

ConeDensity ConeDensity::ball_indicator(MeshPtr mesh, double center, double radius) {
    if (!(radius > 0.0 && radius < 0.5)) {
        throw std::domain_error("ball radius must lie in (0, 1/2)");
    }
    const ArcSet ball = ArcSet::from_circle_arc(center - radius, 2.0 * radius);
    const auto x = mesh->x();
    const auto u = mesh->u();
    const std::size_t n = x.size();
    std::vector<double> hv(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double lo = 0.5 * (x[i - 1] + x[i]);
        const double hi = i + 1 < n ? 0.5 * (x[i] + x[i + 1]) : 1.0;
        double covered = 0.0;
        for (const Arc& a : ball.arcs()) {
            covered += std::max(0.0, std::min(hi, a.hi) - std::max(lo, a.lo));
        }
        hv[i] = u[i] * std::min(1.0, covered / (hi - lo));
    }
    ConeDensity raw(mesh, std::move(hv));
    const double m = pmlab::mass(raw);
    if (!(m > 0.0)) throw std::domain_error("ball indicator has zero mass on this mesh");
    return (1.0 / m) * raw;
}

double ConeDensity::h_at(double y) const {
    const GradedMesh& m = *mesh_;
    const std::size_t c = m.locate(y);
    const auto u = m.u();
    const double t = (std::pow(y, m.alpha()) - u[c]) / (u[c + 1] - u[c]);
    return h_[c] + t * (h_[c + 1] - h_[c]);
}

double ConeDensity::value(double y) const {
    if (!(y > 0.0)) throw std::domain_error("density value requested at x <= 0");
    const GradedMesh& m = *mesh_;
    const std::size_t c = m.locate(y);
    const auto u = m.u();
    const double uy = std::pow(y, m.alpha());
    const double t = (uy - u[c]) / (u[c + 1] - u[c]);
    return (h_[c] + t * (h_[c + 1] - h_[c])) / uy;
}

double ConeDensity::value_at_node(std::size_t i) const {
    if (i >= h_.size()) throw std::out_of_range("node index out of range");
    const auto u = mesh_->u();
    if (i > 0) return h_[i] / u[i];
    if (h_[0] > 0.0) return std::numeric_limits<double>::infinity();
    return h_[1] / u[1];
}

void ConeDensity::write_csv(std::ostream& os) const {
    os << "x,h,f\n";
    const auto x = mesh_->x();
    for (std::size_t i = 0; i < h_.size(); ++i) {
        os << fmt17(x[i]) << ',' << fmt17(h_[i]) << ',' << fmt17(value_at_node(i)) << '\n';
    }
}

ConeDensity operator+(const ConeDensity& a, const ConeDensity& b) {
    if (!a.mesh().same_as(b.mesh())) throw std::invalid_argument("mesh mismatch");
    std::vector<double> h(a.h_.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = a.h_[i] + b.h_[i];
    return ConeDensity(a.mesh_, std::move(h));
}

ConeDensity operator*(double s, const ConeDensity& a) {
    std::vector<double> h(a.h_);
    for (double& v : h) v *= s;
    return ConeDensity(a.mesh_, std::move(h));
}

// ---------------------------------------------------------------------------
// Quadrature

double mass(const ConeDensity& f) {
    const GradedMesh& m = f.mesh();
    const auto h = f.h();
    const auto wl = m.weight_left();
    const auto wr = m.weight_right();
    long double s = 0.0L;
    for (std::size_t i = 0; i < m.cells(); ++i) {
        s += static_cast<long double>(wl[i]) * h[i] + static_cast<long double>(wr[i]) * h[i + 1];
    }
    return static_cast<double>(s);
}

double l1_distance(const ConeDensity& f, const ConeDensity& g) {
    const GradedMesh& m = f.mesh();
    if (!m.same_as(g.mesh())) throw std::invalid_argument("l1_distance: mesh mismatch");
    const auto hf = f.h();
    const auto hg = g.h();
    const auto x = m.x();
    const auto u = m.u();
    const auto wl = m.weight_left();
    const auto wr = m.weight_right();
    long double s = 0.0L;
    for (std::size_t i = 0; i < m.cells(); ++i) {
        const double da = hf[i] - hg[i];
        const double db = hf[i + 1] - hg[i + 1];
        if ((da >= 0.0 && db >= 0.0) || (da <= 0.0 && db <= 0.0)) {
            s += static_cast<long double>(wl[i]) * std::abs(da) +
                 static_cast<long double>(wr[i]) * std::abs(db);
            continue;
        }
        // Sign change: split the cell where the u-linear difference vanishes.
        const double t = da / (da - db);
        const double us = u[i] + t * (u[i + 1] - u[i]);
        const double xs = std::clamp(std::pow(us, 1.0 / m.alpha()), x[i], x[i + 1]);
        const auto left = m.interval_weights(x[i], xs);
        const auto right = m.interval_weights(xs, x[i + 1]);
        s += static_cast<long double>(left.first) * std::abs(da) +
             static_cast<long double>(right.second) * std::abs(db);
    }
    return static_cast<double>(s);
}

double integrate_against(const ConeDensity& f, const std::function<double(double)>& obs) {
    static constexpr double kNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double kWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const GradedMesh& m = f.mesh();
    const auto h = f.h();
    const auto x = m.x();
    const auto u = m.u();
    const double alpha = m.alpha();
    long double s = static_cast<long double>(m.weight_left()[0] * h[0] + m.weight_right()[0] * h[1]) *
                    obs(0.5 * x[1]);
    for (std::size_t i = 1; i < m.cells(); ++i) {
        const double mid = 0.5 * (x[i] + x[i + 1]);
        const double half = 0.5 * (x[i + 1] - x[i]);
        const double slope = (h[i + 1] - h[i]) / (u[i + 1] - u[i]);
        double cell = 0.0;
        for (int q = 0; q < 3; ++q) {
            const double xq = mid + half * kNodes[q];
            const double uq = std::pow(xq, alpha);
            cell += kWeights[q] * obs(xq) * (h[i] + slope * (uq - u[i])) / uq;
        }
        s += static_cast<long double>(cell * half);
    }
    return static_cast<double>(s);
}

// ---------------------------------------------------------------------------
// Averaging operator

ConeDensity average_op(const ConeDensity& f, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::domain_error("averaging radius must lie in (0, 1/2)");
    const GradedMesh& m = f.mesh();
    const auto h = f.h();
    const auto x = m.x();
    const auto u = m.u();
    const std::size_t cells = m.cells();

    std::vector<long double> cumulative(cells + 1, 0.0L);
    for (std::size_t i = 0; i < cells; ++i) {
        cumulative[i + 1] = cumulative[i] + static_cast<long double>(m.weight_left()[i]) * h[i] +
                            static_cast<long double>(m.weight_right()[i]) * h[i + 1];
    }
    const long double total = cumulative[cells];

    // Exact cumulative integral of the stored density, extended periodically.
    auto cumulative_at = [&](double y) -> long double {
        const double shift = std::floor(y);
        const double r = y - shift;
        const std::size_t c = m.locate(r);
        const double t = (std::pow(r, m.alpha()) - u[c]) / (u[c + 1] - u[c]);
        const double hr = h[c] + t * (h[c + 1] - h[c]);
        const auto [wl, wr] = m.interval_weights(x[c], r);
        return static_cast<long double>(shift) * total + cumulative[c] +
               static_cast<long double>(wl) * h[c] + static_cast<long double>(wr) * hr;
    };

    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const long double window = cumulative_at(x[i] + eps) - cumulative_at(x[i] - eps);
        out[i] = u[i] * std::max(0.0, static_cast<double>(window / (2.0L * eps)));
    }
    ConeDensity sampled(f.mesh_ptr(), std::move(out));
    const double ms = mass(sampled);
    if (!(ms > 0.0)) return sampled;
    return (static_cast<double>(total) / ms) * sampled;
}

// ---------------------------------------------------------------------------
// C^1 observables and the shift into C2

C1Observable::C1Observable(std::function<double(double)> value,
                           std::function<double(double)> derivative, double sup_norm,
                           double deriv_sup_norm)
    : value_(std::move(value)),
      derivative_(std::move(derivative)),
      sup_(sup_norm),
      dsup_(deriv_sup_norm) {
    if (!value_ || !derivative_) throw std::invalid_argument("observable callbacks must be set");
    for (std::size_t j = 0; j < kNormGridPoints; ++j) {
        const double xj = static_cast<double>(j) / (kNormGridPoints - 1);
        if (std::abs(value_(xj)) > sup_ * (1.0 + 1e-12) + 1e-300 ||
            std::abs(derivative_(xj)) > dsup_ * (1.0 + 1e-12) + 1e-300) {
            throw std::domain_error("declared observable norms are not upper bounds at x = " +
                                    std::to_string(xj));
        }
    }
}

C1Observable C1Observable::sampled(std::function<double(double)> value,
                                   std::function<double(double)> derivative) {
    double sup = 0.0;
    double dsup = 0.0;
    for (std::size_t j = 0; j < kNormGridPoints; ++j) {
        const double xj = static_cast<double>(j) / (kNormGridPoints - 1);
        sup = std::max(sup, std::abs(value(xj)));
        dsup = std::max(dsup, std::abs(derivative(xj)));
    }
    return C1Observable(std::move(value), std::move(derivative), sup, dsup);
}

ShiftParams c1_shift_params(double sup_norm, double deriv_sup_norm, const ConeParams& cone) {
    const double alpha = cone.alpha();
    const double a = cone.a();
    const double lambda = -deriv_sup_norm - 1.0;
    // First term keeps x^(alpha+1) f increasing, second keeps f(0) <= a m(f).
    const double monotone =
        ((1.0 + alpha) * sup_norm + deriv_sup_norm - lambda * (2.0 + alpha)) / (1.0 + alpha);
    const double bounded = (1.0 + a) / (a - 1.0) * sup_norm - a * lambda / (2.0 * (a - 1.0));
    return ShiftParams{lambda, std::max(monotone, bounded) + 1.0};
}

ConeDensity apply_shift(const C1Observable& psi, ShiftParams shift, MeshPtr mesh) {
    return ConeDensity::from_density(
        std::move(mesh), [&](double x) { return psi(x) + shift.lambda * x + shift.nu; }, 0.0);
}

ShiftedObservable c1_shift(const C1Observable& psi, const ConeParams& cone, MeshPtr mesh) {
    const ShiftParams shift = c1_shift_params(psi.sup_norm(), psi.deriv_sup_norm(), cone);
    return ShiftedObservable{apply_shift(psi, shift, std::move(mesh)), shift.lambda, shift.nu};
}

ConeDensity sample_cone_density(std::uint64_t seed, const ConeParams& cone, MeshPtr mesh) {
    if (std::abs(mesh->alpha() - cone.alpha()) > 0.0) {
        throw std::invalid_argument("cone and mesh alpha differ");
    }
    const double alpha = cone.alpha();
    std::mt19937_64 rng(seed);
    const auto components = 1 + static_cast<std::size_t>(uniform01(rng) * 4.0);
    double w0 = -std::log1p(-uniform01(rng));
    std::vector<std::pair<double, double>> terms;
    double total = w0;
    for (std::size_t j = 0; j < components; ++j) {
        const bool at_cap = uniform01(rng) < 0.25;
        const double theta = at_cap ? alpha : alpha * (1.0 - uniform01(rng));
        const double w = -std::log1p(-uniform01(rng));
        terms.emplace_back(theta, w);
        total += w;
    }
    if (!(total > 0.0)) {
        w0 = 1.0;
        total = 1.0;
    }
    for (auto& t : terms) t.second /= total;
    return ConeDensity::mixture(std::move(mesh), w0 / total, terms);
}

} // namespace pmlab
