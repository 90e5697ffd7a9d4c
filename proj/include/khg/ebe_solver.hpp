#pragma once

// Newton solver for  L psi = kappa r^{2 lambda} e^{2 psi}  (L the flat Laplacian in the grid's
// lateral, time and y directions) and the order-by-order homotopy expansion for a moving strand.
// Homotopy grids are comoving: axes (t, x2, x3, y) with zeta = x2 + i x3 and r = |zeta|.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "khg/grid.hpp"
#include "khg/kernels.hpp"
#include "khg/model_solutions.hpp"

namespace khg {

/// Axisymmetric (r, y) domain, logarithmic in both directions: r in [r_min, r_max], y in [y_min, y_max].
std::vector<Axis> ebe_axisymmetric_axes(std::size_t nr, std::size_t ny, double r_min = 0.1, double r_max = 2.0,
                                        double y_min = 0.05, double y_max = 2.0);

/// psi_knot_model at every node; the lateral radius comes from the axis roles.
GridField closed_form_field(const ModelParams& params, const std::vector<Axis>& axes,
                            const std::vector<AxisRole>& roles);

/// kappa * r^{2 lambda} at every node.
GridField ebe_weight(const ModelParams& params, const StencilOperator& op);

struct EbeSolveOptions {
    double tol = 1e-9;
    int max_iter = 50;
    int line_search_warn = 20;
    std::size_t direct_limit = 5000;
    ExecPolicy policy = ExecPolicy::Parallel;
};

struct EbeSolveResult {
    GridField psi;
    int iterations = 0;
    double residual = 0.0;            // sup-norm at interior nodes
    std::vector<double> history;      // residual before each step and after the last
    int line_search_activations = 0;
    bool roundoff_floor = false;      // stopped because no step could reduce the residual further
    std::vector<std::string> warnings;
};

/// Boundary nodes of `initial` are Dirichlet data; interior values are the starting guess.
EbeSolveResult solve_ebe(const ModelParams& params, const GridField& initial, const std::vector<AxisRole>& roles,
                         const EbeSolveOptions& opts = {});

/// Sparse LU up to `direct_limit` unknowns; above it BiCGSTAB with a diagonal preconditioner,
/// falling back to LU if the iteration stalls.
Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                             std::size_t direct_limit = 5000);

struct StrandMotion {
    std::vector<double> t;
    std::vector<std::complex<double>> z, zdot, zddot;
    bool periodic = false;
    double period = 0.0;

    std::size_t size() const noexcept { return t.size(); }
    /// z0 = v t on the sample times (not periodic).
    static StrandMotion uniform(std::complex<double> v, const Axis& time);
    /// z0 = rho e^{i omega t}; periodic when the time axis is periodic.
    static StrandMotion circular(double rho, double omega, const Axis& time);
    /// Largest deviation of central differences of z (and zdot) from the derivative samples,
    /// relative to max |zdot| (max |zddot|). O(dt^2) for consistent motions.
    double derivative_inconsistency() const;
};

/// Factors that differ between the literal expansion formulas and the exact expansion of
/// e^{2 psi} and d_t^2. Defaults are the exact ones.
struct HomotopyConventions {
    /// psi^(k) enters e^{2 psi} as (factor * psi^(k)); also multiplies the potential of L_q.
    double expansion_factor = 2.0;
    /// Coefficient of (zdot . grad) d_t psi^(n-1) in K^(n).
    double cross_factor = 2.0;

    static HomotopyConventions exact() { return {}; }
    static HomotopyConventions literal() { return {1.0, 1.0}; }
};

/// (t, x2, x3, y) comoving grid: t periodic on [0, period) or uniform on [0, period],
/// x2, x3 uniform on [-lateral, lateral], y logarithmic on [y_min, y_max].
std::vector<Axis> homotopy_axes(std::size_t nt, std::size_t nx, std::size_t ny, bool periodic, double period,
                                double lateral = 2.0, double y_min = 0.05, double y_max = 2.0);
std::vector<AxisRole> homotopy_roles();

/// L_q = d_t^2 + Laplacian + d_y^2 - expansion_factor * kappa r^{2 lambda} e^{2 psi0} on interior unknowns.
Eigen::SparseMatrix<double> assemble_Lq(const GridField& psi0, const ModelParams& params,
                                        const std::vector<AxisRole>& roles, const HomotopyConventions& conv = {},
                                        ExecPolicy policy = ExecPolicy::Parallel);

/// K^(n) from psi^(0) ... psi^(n-1) (lower.size() == n), at interior nodes (0 on the boundary).
GridField assemble_K(int n, const std::vector<GridField>& lower, const StrandMotion& motion,
                     const ModelParams& params, const std::vector<AxisRole>& roles,
                     const HomotopyConventions& conv = {}, ExecPolicy policy = ExecPolicy::Parallel);

struct DkwOptions {
    EbeSolveOptions ebe;
    HomotopyConventions conventions;
};

struct DkwOrderResult {
    GridField psi;
    double residual = 0.0;  // sup-norm of L psi^(n) + K^(n), or of the EBE residual for n = 0
    int newton_iterations = 0;
};

/// n = 0: per-t-slice solve_ebe with `boundary` as Dirichlet data and starting guess.
/// n >= 1: L_q psi^(n) = -K^(n) with Dirichlet data from `boundary` (zero when it is empty).
DkwOrderResult solve_dkw_order(int n, const std::vector<GridField>& lower, const StrandMotion& motion,
                               const ModelParams& params, const GridField& boundary,
                               const std::vector<AxisRole>& roles, const DkwOptions& opts = {});

/// sum_n q^n psi^(n).
GridField series_sum(double q, const std::vector<GridField>& orders);

struct SeriesEval {
    GridField psi;
    GridField residual;  // full q-operator at interior nodes
    double residual_max = 0.0;
};

/// Partial sum and the residual of
///   d_t^2 psi - q (zddot.grad) psi - 2q (zdot.grad) d_t psi + q^2 (zdot.grad)^2 psi
///   + Laplacian psi + d_y^2 psi - kappa r^{2 lambda} e^{2 psi}.
SeriesEval series_eval(double q, const std::vector<GridField>& orders, const StrandMotion& motion,
                       const ModelParams& params, const std::vector<AxisRole>& roles,
                       ExecPolicy policy = ExecPolicy::Parallel);

/// Motion terms on the comoving grid, at interior nodes:
/// accel = (zddot.grad) f, cross = (zdot.grad) d_t f, second = (zdot.grad)^2 f.
struct MotionTerms {
    GridField accel, cross, second;
};
MotionTerms motion_terms(const GridField& f, const StrandMotion& motion, const std::vector<AxisRole>& roles,
                         ExecPolicy policy = ExecPolicy::Parallel);

} // namespace khg
