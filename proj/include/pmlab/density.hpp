#pragma once

// Densities with an x^{-alpha} singularity at the neutral fixed point.
//
// A density f is stored through its regularized values h = x^alpha f at the
// nodes of a power-graded mesh x_i = (i/N)^p.  Between nodes h is linear in
// u = x^alpha, so on every cell
//
//     f(x) = A x^{-alpha} + B
//
// which makes both constants and (1-alpha) x^{-alpha} exact, and every cell
// integral of f (or of |f - g|) closed form.

#include "pmlab/cone_params.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace pmlab {

class GradedMesh {
public:
    /// p defaults to 2/(1-alpha); p >= 1/(1-alpha) is required.
    GradedMesh(double alpha, std::size_t cells, double grading);
    static std::shared_ptr<const GradedMesh> make(double alpha, std::size_t cells,
                                                  double grading);
    static std::shared_ptr<const GradedMesh> make_default(double alpha,
                                                          std::size_t cells = 1u << 14);
    static double default_grading(double alpha) { return 2.0 / (1.0 - alpha); }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::size_t cells() const noexcept { return cells_; }
    [[nodiscard]] double grading() const noexcept { return grading_; }
    [[nodiscard]] std::size_t nodes() const noexcept { return x_.size(); }
    [[nodiscard]] std::span<const double> x() const noexcept { return x_; }
    /// u_i = x_i^alpha
    [[nodiscard]] std::span<const double> u() const noexcept { return u_; }
    /// Cell mass weights: the integral of f over cell i is wl[i] h_i + wr[i] h_{i+1}.
    [[nodiscard]] std::span<const double> weight_left() const noexcept { return wl_; }
    [[nodiscard]] std::span<const double> weight_right() const noexcept { return wr_; }

    /// Index c with x_c <= y < x_{c+1}; y = 1 maps to the last cell.
    [[nodiscard]] std::size_t locate(double y) const;

    /// Weights (wl, wr) of the partial cell [xa, xb]: the integral of
    /// x^{-alpha} h over it when h is linear in u with end values ha, hb is
    /// wl ha + wr hb.
    [[nodiscard]] std::pair<double, double> interval_weights(double xa, double xb) const;

    [[nodiscard]] bool same_as(const GradedMesh& other) const noexcept;

private:
    double alpha_;
    std::size_t cells_;
    double grading_;
    std::vector<double> x_, u_, wl_, wr_;
};

using MeshPtr = std::shared_ptr<const GradedMesh>;

/// Immutable density on a graded mesh.
class ConeDensity {
public:
    ConeDensity(MeshPtr mesh, std::vector<double> h);

    /// h sampled from a regularized profile, including its value at 0.
    static ConeDensity from_regularized(MeshPtr mesh, const std::function<double(double)>& h);
    /// h_i = x_i^alpha f(x_i) for i >= 1, with h_0 supplied explicitly.
    static ConeDensity from_density(MeshPtr mesh, const std::function<double(double)>& f,
                                    double h0);
    static ConeDensity constant(MeshPtr mesh, double value);
    /// (1 - theta) x^{-theta}, unit mass, 0 <= theta <= alpha.
    static ConeDensity power(MeshPtr mesh, double theta);
    /// w0 + sum_j w_j (1 - theta_j) x^{-theta_j}.
    static ConeDensity mixture(MeshPtr mesh, double constant_weight,
                               std::span<const std::pair<double, double>> theta_weight);
    /// Normalized indicator of a circular arc [center - r, center + r),
    /// node values set to the covered fraction of each node's dual cell.
    static ConeDensity ball_indicator(MeshPtr mesh, double center, double radius);

    [[nodiscard]] const GradedMesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] std::span<const double> h() const noexcept { return h_; }

    /// Interpolated h(y).
    [[nodiscard]] double h_at(double y) const;
    /// f(y) = y^{-alpha} h(y) for 0 < y <= 1.
    [[nodiscard]] double value(double y) const;
    /// f at node i; at node 0 the limit along cell 0 (infinite when h_0 > 0).
    [[nodiscard]] double value_at_node(std::size_t i) const;

    void write_csv(std::ostream& os) const;

    friend ConeDensity operator+(const ConeDensity& a, const ConeDensity& b);
    friend ConeDensity operator*(double s, const ConeDensity& a);

private:
    MeshPtr mesh_;
    std::vector<double> h_;
};

[[nodiscard]] double mass(const ConeDensity& f);
[[nodiscard]] double l1_distance(const ConeDensity& f, const ConeDensity& g);
/// Integral of obs * f, three-point Gauss rule on cells i >= 1 and the exact
/// cell-0 mass times obs at the cell midpoint.
[[nodiscard]] double integrate_against(const ConeDensity& f,
                                       const std::function<double(double)>& obs);

/// (1/2eps) * integral of f over the circular window [x - eps, x + eps],
/// sampled at the nodes and rescaled so the output mass equals mass(f).
[[nodiscard]] ConeDensity average_op(const ConeDensity& f, double eps);

/// C^1 observable on the circle with sup-norm bounds for itself and its
/// derivative.
class C1Observable {
public:
    /// Norms are checked against a 10^4-point grid.
    C1Observable(std::function<double(double)> value, std::function<double(double)> derivative,
                 double sup_norm, double deriv_sup_norm);
    /// Norms taken from the 10^4-point grid.
    static C1Observable sampled(std::function<double(double)> value,
                                std::function<double(double)> derivative);

    [[nodiscard]] double operator()(double x) const { return value_(x); }
    [[nodiscard]] double derivative(double x) const { return derivative_(x); }
    [[nodiscard]] double sup_norm() const noexcept { return sup_; }
    [[nodiscard]] double deriv_sup_norm() const noexcept { return dsup_; }

private:
    std::function<double(double)> value_;
    std::function<double(double)> derivative_;
    double sup_;
    double dsup_;
};

struct ShiftParams {
    double lambda = 0.0;
    double nu = 0.0;
};

struct ShiftedObservable {
    ConeDensity density;
    double lambda;
    double nu;
};

/// lambda = -|psi'| - 1 and nu one above the smallest admissible value for
/// psi + lambda x + nu to be in C2 given sup-norm bounds.
[[nodiscard]] ShiftParams c1_shift_params(double sup_norm, double deriv_sup_norm,
                                          const ConeParams& cone);
[[nodiscard]] ConeDensity apply_shift(const C1Observable& psi, ShiftParams shift, MeshPtr mesh);
[[nodiscard]] ShiftedObservable c1_shift(const C1Observable& psi, const ConeParams& cone,
                                         MeshPtr mesh);

/// Random unit-mass member of C2: convex combination of 1 and up to four
/// (1 - theta) x^{-theta}, theta in (0, alpha] (theta = alpha with
/// probability 1/4).  Deterministic in seed.
[[nodiscard]] ConeDensity sample_cone_density(std::uint64_t seed, const ConeParams& cone,
                                              MeshPtr mesh);

} // namespace pmlab
