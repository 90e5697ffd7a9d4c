#pragma once

// Grid kernels shared by the EBE and homotopy solvers. Every kernel has a serial
// reference path and an OpenMP path selected by ExecPolicy; both produce identical
// results (no reductions across threads).

#include <vector>

#include <Eigen/Sparse>

#include "khg/grid.hpp"

namespace khg {

enum class ExecPolicy { Serial, Parallel };

/// Lateral axes are Cartesian (X) or radial (adds (1/r) d/dr); Time and Y are plain.
enum class AxisRole { Time, X, Radial, Y };

/// Second-order operator sum_a d2_a (+ (1/r) d1_r) restricted to interior nodes.
class StencilOperator {
public:
    StencilOperator(std::vector<Axis> axes, std::vector<AxisRole> roles);

    const std::vector<Axis>& axes() const noexcept { return axes_; }
    const std::vector<AxisRole>& roles() const noexcept { return roles_; }
    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t unknowns() const noexcept { return interior_.size(); }
    /// Flat index of interior unknown u.
    std::size_t node_of(std::size_t u) const { return interior_[u]; }
    /// Interior index of a flat node, or -1 on the Dirichlet boundary.
    std::ptrdiff_t unknown_of(std::size_t flat) const { return unknown_[flat]; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }

    /// Flat index of the neighbour at offset +-1 along axis a (wraps on periodic axes).
    std::size_t neighbour(std::size_t flat, std::size_t a, int dir) const;
    /// Distance to the lateral centre: the radial coordinate, or |(x2, x3)| over the X axes.
    double lateral_radius(std::size_t flat) const;

    struct Row {
        std::size_t centre;
        std::vector<std::size_t> cols;  // flat indices, centre first
        std::vector<double> w;
    };
    Row row(std::size_t flat) const;

    /// out = L psi at interior nodes, 0 on the boundary.
    void apply(const double* psi, double* out, ExecPolicy policy) const;
    /// Matrix of L - diag(potential) on interior unknowns; potential indexed by flat node.
    Eigen::SparseMatrix<double> assemble(const double* potential, ExecPolicy policy) const;

private:
    std::vector<Axis> axes_;
    std::vector<AxisRole> roles_;
    std::vector<std::size_t> shape_, strides_;
    std::size_t nodes_ = 0;
    std::vector<std::size_t> interior_;
    std::vector<std::ptrdiff_t> unknown_;
    std::vector<std::vector<Stencil3>> d1_, d2_;  // per axis, per node index
};

/// out = L psi - weight * exp(2 psi) at interior nodes, 0 on the boundary.
void ebe_residual_kernel(const StencilOperator& op, const double* psi, const double* weight, double* out,
                         ExecPolicy policy);

/// Pointwise sum over partitions pi of n with pi != [n] of
/// prod_i (factor * psi^{(pi_i)})^{nu_i} / nu_i!, where lower[k] = psi^{(k)}.
void partition_sum_kernel(int n, const std::vector<const double*>& lower, std::size_t count, double factor,
                          double* out, ExecPolicy policy);

} // namespace khg
