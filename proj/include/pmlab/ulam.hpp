#pragma once

#include "pmlab/density.hpp"
#include "pmlab/map_core.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <vector>

namespace pmlab {

/// Ulam discretization of P_beta on the cells C_i of a graded mesh:
/// M(i, j) = m(T^{-1} C_j ∩ C_i) / m(C_i).  Row-stochastic; acts on cell mass
/// vectors from the left, v' = M^T v.
class UlamMatrix {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    UlamMatrix(MeshPtr mesh, Sparse matrix) : mesh_(std::move(mesh)), m_(std::move(matrix)) {}

    [[nodiscard]] const GradedMesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const Sparse& matrix() const noexcept { return m_; }

    [[nodiscard]] Eigen::VectorXd push_masses(const Eigen::VectorXd& masses) const;
    /// Cell-average densities in, cell-average densities out.
    [[nodiscard]] Eigen::VectorXd push_averages(const Eigen::VectorXd& averages) const;

    void write_csv(std::ostream& os) const;

private:
    MeshPtr mesh_;
    Sparse m_;
};

[[nodiscard]] UlamMatrix build_ulam(const MapParam& map, MeshPtr mesh);

[[nodiscard]] Eigen::VectorXd cell_masses(const ConeDensity& f);
[[nodiscard]] Eigen::VectorXd cell_averages(const ConeDensity& f);
[[nodiscard]] Eigen::VectorXd cell_widths(const GradedMesh& mesh);

} // namespace pmlab
