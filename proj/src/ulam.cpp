#include "pmlab/ulam.hpp"

#include "pmlab/format.hpp"

#include <algorithm>
#include <ostream>

namespace pmlab {

namespace {

using Triplet = Eigen::Triplet<double>;

// Preimage of cell j under one branch is [pre[j], pre[j+1]].  Splits the
// piece [a, b] of cell i along those breakpoints.
void scatter_branch(std::size_t row, double a, double b, double width,
                    const std::vector<double>& pre, std::vector<Triplet>& out) {
    if (!(b > a)) return;
    const std::size_t cells = pre.size() - 1;
    auto it = std::upper_bound(pre.begin(), pre.end(), a);
    std::size_t j = it == pre.begin() ? 0 : static_cast<std::size_t>(it - pre.begin()) - 1;
    for (; j < cells && pre[j] < b; ++j) {
        const double overlap = std::min(b, pre[j + 1]) - std::max(a, pre[j]);
        if (overlap > 0.0) out.emplace_back(static_cast<int>(row), static_cast<int>(j), overlap / width);
    }
}

// Right branch, y = 3x - 2.  Overlaps are taken in image coordinates: the
// preimages of the tiny cells near 0 sit next to 2/3, where their widths are
// below the spacing of doubles.
void scatter_right(std::size_t row, double a, double b, double width, std::span<const double> x,
                   std::vector<Triplet>& out) {
    if (!(b > a)) return;
    const double lo = a <= kBranchPoint ? 0.0 : std::clamp(3.0 * a - 2.0, 0.0, 1.0);
    const double hi = std::clamp(3.0 * b - 2.0, 0.0, 1.0);
    const std::size_t cells = x.size() - 1;
    auto it = std::upper_bound(x.begin(), x.end(), lo);
    std::size_t j = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    for (; j < cells && x[j] < hi; ++j) {
        const double overlap = std::min(hi, x[j + 1]) - std::max(lo, x[j]);
        if (overlap > 0.0) out.emplace_back(static_cast<int>(row), static_cast<int>(j), overlap / (3.0 * width));
    }
}

} // namespace

UlamMatrix build_ulam(const MapParam& map, MeshPtr mesh) {
    const GradedMesh& m = *mesh;
    const auto x = m.x();
    const std::size_t cells = m.cells();

    std::vector<double> left_pre(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) left_pre[j] = invert_branch(map, x[j], Branch::left);

    std::vector<Triplet> triplets;
    triplets.reserve(4 * cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double width = x[i + 1] - x[i];
        scatter_branch(i, x[i], std::min(x[i + 1], kBranchPoint), width, left_pre, triplets);
        scatter_right(i, std::max(x[i], kBranchPoint), x[i + 1], width, x, triplets);
    }
    UlamMatrix::Sparse sparse(static_cast<int>(cells), static_cast<int>(cells));
    sparse.setFromTriplets(triplets.begin(), triplets.end());
    sparse.makeCompressed();
    return UlamMatrix(std::move(mesh), std::move(sparse));
}

Eigen::VectorXd UlamMatrix::push_masses(const Eigen::VectorXd& masses) const {
    return m_.transpose() * masses;
}

Eigen::VectorXd UlamMatrix::push_averages(const Eigen::VectorXd& averages) const {
    const Eigen::VectorXd w = cell_widths(*mesh_);
    return push_masses(averages.cwiseProduct(w)).cwiseQuotient(w);
}

void UlamMatrix::write_csv(std::ostream& os) const {
    os << "row,col,value\n";
    for (int r = 0; r < m_.outerSize(); ++r) {
        for (Sparse::InnerIterator it(m_, r); it; ++it) {
            os << it.row() << ',' << it.col() << ',' << fmt17(it.value()) << '\n';
        }
    }
}

Eigen::VectorXd cell_widths(const GradedMesh& mesh) {
    const auto x = mesh.x();
    Eigen::VectorXd w(static_cast<Eigen::Index>(mesh.cells()));
    for (std::size_t i = 0; i < mesh.cells(); ++i) w[static_cast<Eigen::Index>(i)] = x[i + 1] - x[i];
    return w;
}

Eigen::VectorXd cell_masses(const ConeDensity& f) {
    const GradedMesh& m = f.mesh();
    const auto h = f.h();
    Eigen::VectorXd v(static_cast<Eigen::Index>(m.cells()));
    for (std::size_t i = 0; i < m.cells(); ++i) {
        v[static_cast<Eigen::Index>(i)] = m.weight_left()[i] * h[i] + m.weight_right()[i] * h[i + 1];
    }
    return v;
}

Eigen::VectorXd cell_averages(const ConeDensity& f) {
    return cell_masses(f).cwiseQuotient(cell_widths(f.mesh()));
}

} // namespace pmlab
