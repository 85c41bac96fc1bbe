#include "pmlab/transfer.hpp"

#include "pmlab/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pmlab {

StepPlan::StepPlan(const MapParam& map, MeshPtr mesh) : mesh_(std::move(mesh)) {
    const GradedMesh& m = *mesh_;
    const auto x = m.x();
    const auto u = m.u();
    const double alpha = m.alpha();
    const std::size_t n = m.nodes();
    left_.resize(n);
    right_.resize(n);

    auto pull = [&](double y, double ux, double deriv) {
        const std::size_t c = m.locate(y);
        const double uy = std::pow(y, alpha);
        const double t = std::clamp((uy - u[c]) / (u[c + 1] - u[c]), 0.0, 1.0);
        return Pullback{static_cast<std::uint32_t>(c), t, ux / uy / deriv};
    };

    left_[0] = Pullback{0, 0.0, 1.0};
    right_[0] = Pullback{0, 0.0, 0.0};
    for (std::size_t i = 1; i < n; ++i) {
        const double y1 = invert_branch(map, x[i], Branch::left);
        left_[i] = pull(y1, u[i], eval_deriv(map, y1));
        right_[i] = pull((x[i] + 2.0) / 3.0, u[i], 3.0);
    }
}

ConeDensity StepPlan::apply(const ConeDensity& f) const {
    if (!f.mesh().same_as(*mesh_)) throw std::invalid_argument("step plan: mesh mismatch");
    const auto h = f.h();
    std::vector<double> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const Pullback& l = left_[i];
        const Pullback& r = right_[i];
        const double hl = h[l.cell] + l.t * (h[l.cell + 1] - h[l.cell]);
        const double hr = h[r.cell] + r.t * (h[r.cell + 1] - h[r.cell]);
        out[i] = l.weight * hl + r.weight * hr;
    }
    return ConeDensity(f.mesh_ptr(), std::move(out));
}

ConeDensity pf_grid_step(const MapParam& map, const ConeDensity& f) {
    return StepPlan(map, f.mesh_ptr()).apply(f);
}

ConeDensity sequential_push(const MapSequence& seq, const ConeDensity& f, std::size_t n,
                            std::size_t start) {
    std::vector<ConeDensity> ds{f};
    sequential_push_many(seq, ds, n, start);
    return std::move(ds.front());
}

void sequential_push_many(
    const MapSequence& seq, std::vector<ConeDensity>& densities, std::size_t n, std::size_t start,
    const std::function<void(std::size_t, const std::vector<ConeDensity>&)>& after_step) {
    const auto maps = seq.window(start, n);
    if (densities.empty()) return;
    const MeshPtr mesh = densities.front().mesh_ptr();
    for (const auto& d : densities) {
        if (!d.mesh().same_as(*mesh)) throw std::invalid_argument("push: mesh mismatch");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const StepPlan plan(maps[k], mesh);
        for (auto& d : densities) d = plan.apply(d);
        if (after_step) after_step(k + 1, densities);
    }
}

PerturbedResult perturbed_apply(const MapSequence& seq, std::size_t start, double eps,
                                std::size_t n_eps, const ConeDensity& f) {
    if (n_eps < 1) throw std::invalid_argument("perturbed_apply: n_eps must be >= 1");
    std::vector<ConeDensity> ds{average_op(f, eps), f};
    sequential_push_many(seq, ds, n_eps, start);
    const double dev = l1_distance(ds[0], ds[1]);
    return PerturbedResult{std::move(ds[0]), dev};
}

std::size_t default_n_eps(double eps, double alpha, double c_cov) {
    if (!(eps > 0.0) || !(c_cov > 0.0)) {
        throw std::domain_error("default_n_eps: eps and c_cov must be positive");
    }
    return static_cast<std::size_t>(std::ceil(c_cov * std::pow(eps, -alpha)));
}

void KernelEstimate::write_csv(std::ostream& os) const {
    os << "eps,n_eps,z,x,K\n";
    for (std::size_t iz = 0; iz < z.size(); ++iz) {
        for (std::size_t ix = 0; ix < x.size(); ++ix) {
            os << fmt17(eps) << ',' << n_eps << ',' << fmt17(z[iz]) << ',' << fmt17(x[ix]) << ','
               << fmt17(at(iz, ix)) << '\n';
        }
    }
}

KernelEstimate kernel_estimate(const MapSequence& seq, std::size_t start, double eps,
                               std::size_t n_eps, std::size_t nz, std::size_t nx, MeshPtr mesh) {
    if (n_eps < 1) throw std::invalid_argument("kernel_estimate: n_eps must be >= 1");
    if (!(eps > 0.0 && eps < 0.25)) throw std::domain_error("kernel_estimate: eps must lie in (0, 1/4)");
    if (nz < 1 || nx < 1) throw std::invalid_argument("kernel_estimate: empty grid");
    KernelEstimate k;
    k.eps = eps;
    k.n_eps = n_eps;
    for (std::size_t j = 0; j < nz; ++j) k.z.push_back(static_cast<double>(j) / nz);
    for (std::size_t j = 0; j < nx; ++j) k.x.push_back(static_cast<double>(j + 1) / nx);

    std::vector<ConeDensity> balls;
    balls.reserve(nz);
    for (double z : k.z) balls.push_back(ConeDensity::ball_indicator(mesh, z, eps));
    sequential_push_many(seq, balls, n_eps, start);

    k.values.reserve(nz * nx);
    for (const auto& b : balls) {
        for (double x : k.x) k.values.push_back(b.value(x));
    }
    k.gamma_hat = *std::min_element(k.values.begin(), k.values.end());
    return k;
}

} // namespace pmlab
