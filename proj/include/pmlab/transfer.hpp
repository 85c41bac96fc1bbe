#pragma once

// Perron-Frobenius operators of the map family.
//
//   P_beta f(x) = f(y1) / T'(y1) + f(y2) / 3,   {y1 < y2} = T_beta^{-1}(x)
//
// Three evaluation routes are provided: the exact pointwise pullback (and its
// n-fold preimage-tree expansion), grid collocation in regularized
// coordinates, and an Ulam matrix (see ulam.hpp).

#include "pmlab/density.hpp"
#include "pmlab/map_core.hpp"

#include <concepts>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmlab {

template <class F>
concept Evaluable = std::invocable<const F&, double> &&
                    std::convertible_to<std::invoke_result_t<const F&, double>, double>;

/// Exact two-term pullback at x in (0, 1].
template <Evaluable F>
double pf_point(const MapParam& map, const F& f, double x) {
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("pf_point: x must lie in (0, 1]");
    const double y1 = invert_branch(map, x, Branch::left);
    const double y2 = invert_branch(map, x, Branch::right);
    return f(y1) / eval_deriv(map, y1) + f(y2) / 3.0;
}

inline constexpr std::size_t kMaxExactDepth = 22;

namespace detail {
template <Evaluable F>
double pf_tree(std::span<const MapParam> maps, const F& f0, double x) {
    if (maps.empty()) return f0(x);
    const MapParam& last = maps.back();
    const auto inner = maps.first(maps.size() - 1);
    const double y1 = invert_branch(last, x, Branch::left);
    const double y2 = invert_branch(last, x, Branch::right);
    return pf_tree(inner, f0, y1) / eval_deriv(last, y1) + pf_tree(inner, f0, y2) / 3.0;
}
} // namespace detail

/// (P_{maps[n-1]} o ... o P_{maps[0]} f0)(x) summed over all 2^n inverse-branch
/// words.  n <= 22.
template <Evaluable F>
double pf_exact_seq(std::span<const MapParam> maps, const F& f0, double x) {
    if (maps.size() > kMaxExactDepth) {
        throw std::length_error("pf_exact_seq: depth " + std::to_string(maps.size()) +
                                " exceeds the limit of 22");
    }
    if (maps.empty()) return f0(x);
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("pf_exact_seq: x must lie in (0, 1]");
    return detail::pf_tree(maps, f0, x);
}

/// Collocation data of one P_beta step on a fixed mesh.  At every node the
/// two preimages are located once; applying the plan to a density is then
/// four multiply-adds per node.
///
/// In regularized coordinates h = x^alpha f the step reads
///   h_P(x) = (x/y1)^alpha h(y1) / T'(y1) + (x/y2)^alpha h(y2) / 3.
/// As x -> 0, y1/x -> 1, T'(y1) -> 1 and x^alpha -> 0, hence h_P(0) = h(0):
/// node 0 copies h_0.
class StepPlan {
public:
    StepPlan(const MapParam& map, MeshPtr mesh);

    [[nodiscard]] ConeDensity apply(const ConeDensity& f) const;
    [[nodiscard]] const MeshPtr& mesh() const noexcept { return mesh_; }

private:
    struct Pullback {
        std::uint32_t cell;
        double t;      // position inside the cell, linear in u
        double weight; // (x/y)^alpha / T'(y)
    };

    MeshPtr mesh_;
    std::vector<Pullback> left_, right_;
};

[[nodiscard]] ConeDensity pf_grid_step(const MapParam& map, const ConeDensity& f);

/// Applies maps start, start+1, ..., start+n-1 (the first one first).
[[nodiscard]] ConeDensity sequential_push(const MapSequence& seq, const ConeDensity& f,
                                          std::size_t n, std::size_t start = 0);

/// Pushes several densities on a shared mesh through the same maps, building
/// each step plan once.  `after_step(k, densities)` runs after k steps.
void sequential_push_many(
    const MapSequence& seq, std::vector<ConeDensity>& densities, std::size_t n,
    std::size_t start = 0,
    const std::function<void(std::size_t, const std::vector<ConeDensity>&)>& after_step = {});

struct PerturbedResult {
    ConeDensity result;
    /// || P_{eps,m} f - P_m^{n_eps} f ||_1
    double deviation;
};

/// P_{eps,m} f = P_m^{n_eps} A_eps f.
[[nodiscard]] PerturbedResult perturbed_apply(const MapSequence& seq, std::size_t start,
                                              double eps, std::size_t n_eps,
                                              const ConeDensity& f);

/// n_eps = ceil(c_cov * eps^{-alpha}).
[[nodiscard]] std::size_t default_n_eps(double eps, double alpha, double c_cov);

struct KernelEstimate {
    double eps = 0.0;
    std::size_t n_eps = 0;
    std::vector<double> z;
    std::vector<double> x;
    /// values[iz * x.size() + ix] = K(x[ix], z[iz])
    std::vector<double> values;
    double gamma_hat = 0.0;

    [[nodiscard]] double at(std::size_t iz, std::size_t ix) const {
        return values[iz * x.size() + ix];
    }
    void write_csv(std::ostream& os) const;
};

/// K(x, z) = P_m^{n_eps} of the unit-mass indicator of B_eps(z), evaluated
/// at x.  z_j = j / nz, x_k = (k + 1) / nx.
[[nodiscard]] KernelEstimate kernel_estimate(const MapSequence& seq, std::size_t start,
                                             double eps, std::size_t n_eps, std::size_t nz,
                                             std::size_t nx, MeshPtr mesh);

} // namespace pmlab
