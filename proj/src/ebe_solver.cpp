#include "khg/ebe_solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace khg {

std::vector<Axis> ebe_axisymmetric_axes(std::size_t nr, std::size_t ny, double r_min, double r_max, double y_min,
                                        double y_max) {
    return {Axis::logarithmic("r", r_min, r_max, nr), Axis::logarithmic("y", y_min, y_max, ny)};
}

namespace {

std::size_t find_role(const std::vector<AxisRole>& roles, AxisRole role, std::size_t skip = 0) {
    for (std::size_t a = 0; a < roles.size(); ++a)
        if (roles[a] == role && skip-- == 0) return a;
    fail(ErrorCode::DimensionMismatch, "grid lacks a required axis role");
}

double lateral_radius_of(const std::vector<double>& x, const std::vector<AxisRole>& roles) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < roles.size(); ++a) {
        if (roles[a] == AxisRole::Radial) return x[a];
        if (roles[a] == AxisRole::X) r2 += x[a] * x[a];
    }
    return std::sqrt(r2);
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

template <class F>
void for_nodes(std::size_t count, ExecPolicy policy, F&& body) {
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
    } else {
        for (std::ptrdiff_t k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
    }
}

} // namespace

GridField closed_form_field(const ModelParams& params, const std::vector<Axis>& axes,
                            const std::vector<AxisRole>& roles) {
    require(axes.size() == roles.size(), ErrorCode::DimensionMismatch, "one role per axis");
    const std::size_t ya = find_role(roles, AxisRole::Y);
    GridField f(axes);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto x = f.coords(k);
        f[k] = psi_knot_model(lateral_radius_of(x, roles), x[ya], params);
    }
    return f;
}

GridField ebe_weight(const ModelParams& params, const StencilOperator& op) {
    GridField w(op.axes());
    for (std::size_t k = 0; k < w.size(); ++k)
        w[k] = params.kappa * std::pow(op.lateral_radius(k), 2.0 * params.lambda);
    return w;
}

Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                             std::size_t direct_limit) {
    Eigen::VectorXd x;
    bool done = false;
    if (static_cast<std::size_t>(a.rows()) > direct_limit) {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> it;
        it.setTolerance(1e-14);
        it.setMaxIterations(std::max<Eigen::Index>(1000, 4 * a.rows()));
        it.compute(a);
        x = it.solve(b);
        done = it.info() == Eigen::Success && x.allFinite();
    }
    if (!done) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(a);
        require(lu.info() == Eigen::Success, ErrorCode::LinearSolveFailed, "sparse LU factorisation failed");
        x = lu.solve(b);
        // Two rounds of iterative refinement.
        for (int k = 0; k < 2; ++k) x += lu.solve(Eigen::VectorXd(b - a * x));
    }
    require(x.allFinite(), ErrorCode::LinearSolveFailed, "linear solve produced non-finite values");
    return x;
}

EbeSolveResult solve_ebe(const ModelParams& params, const GridField& initial, const std::vector<AxisRole>& roles,
                         const EbeSolveOptions& opts) {
    params.validate();
    const StencilOperator op(initial.axes(), roles);
    require(op.unknowns() > 0, ErrorCode::DimensionMismatch, "grid has no interior nodes");
    const GridField w = ebe_weight(params, op);
    EbeSolveResult res;
    res.psi = initial;
    std::vector<double> f(op.nodes()), potential(op.nodes(), 0.0);
    auto residual = [&](const GridField& p) {
        ebe_residual_kernel(op, p.values().data(), w.values().data(), f.data(), opts.policy);
        double m = sup_norm(f);
        return std::isfinite(m) ? m : INFINITY;
    };
    double rn = residual(res.psi);
    GridField trial = res.psi;
    while (true) {
        res.history.push_back(rn);
        if (rn < opts.tol) break;
        if (res.iterations >= opts.max_iter)
            fail(ErrorCode::NewtonDiverged, "EBE Newton did not converge in " + std::to_string(opts.max_iter) +
                                                " iterations (residual " + std::to_string(rn) + ")");
        for_nodes(op.nodes(), opts.policy,
                  [&](std::size_t k) { potential[k] = 2.0 * w[k] * std::exp(2.0 * res.psi[k]); });
        const Eigen::SparseMatrix<double> jac = op.assemble(potential.data(), opts.policy);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(op.unknowns()));
        for (std::size_t u = 0; u < op.unknowns(); ++u) rhs[static_cast<Eigen::Index>(u)] = -f[op.node_of(u)];
        const Eigen::VectorXd delta = solve_sparse(jac, rhs, opts.direct_limit);
        if (delta.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + res.psi.max_abs())) {
            res.roundoff_floor = true;
            break;
        }
        double alpha = 1.0, rt = INFINITY;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving) {
            for (std::size_t u = 0; u < op.unknowns(); ++u)
                trial[op.node_of(u)] = res.psi[op.node_of(u)] + alpha * delta[static_cast<Eigen::Index>(u)];
            rt = residual(trial);
            if (rt <= (1.0 - 1e-4 * alpha) * rn) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (rn < 100.0 * opts.tol) {
                res.roundoff_floor = true;
                break;
            }
            fail(ErrorCode::NewtonDiverged, "EBE line search failed at residual " + std::to_string(rn));
        }
        if (alpha < 1.0) ++res.line_search_activations;
        std::swap(res.psi, trial);
        rn = rt;
        ++res.iterations;
    }
    res.residual = rn;
    if (res.line_search_activations > opts.line_search_warn)
        res.warnings.push_back("NonmonotoneResidual: line search activated " +
                               std::to_string(res.line_search_activations) + " times");
    return res;
}

StrandMotion StrandMotion::uniform(std::complex<double> v, const Axis& time) {
    require(!time.periodic, ErrorCode::DomainError, "uniform motion is not periodic");
    StrandMotion m;
    m.t = time.x;
    for (double t : m.t) {
        m.z.push_back(v * t);
        m.zdot.push_back(v);
        m.zddot.emplace_back(0.0, 0.0);
    }
    return m;
}

StrandMotion StrandMotion::circular(double rho, double omega, const Axis& time) {
    StrandMotion m;
    m.t = time.x;
    m.periodic = time.periodic;
    m.period = time.period;
    if (m.periodic) {
        const double turns = omega * time.period / (2.0 * M_PI);
        require(std::abs(turns - std::round(turns)) < 1e-12, ErrorCode::DomainError,
                "circular motion must close up over the period");
    }
    const std::complex<double> i(0.0, 1.0);
    for (double t : m.t) {
        const auto z = std::polar(rho, omega * t);
        m.z.push_back(z);
        m.zdot.push_back(i * omega * z);
        m.zddot.push_back(-omega * omega * z);
    }
    return m;
}

double StrandMotion::derivative_inconsistency() const {
    const std::size_t n = size();
    require(n >= 3 && z.size() == n && zdot.size() == n && zddot.size() == n, ErrorCode::LengthMismatch,
            "motion needs at least three consistent samples");
    double e1 = 0.0, e2 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s1 = std::max(s1, std::abs(zdot[i]));
        s2 = std::max(s2, std::abs(zddot[i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool edge = i == 0 || i + 1 == n;
        if (edge && !periodic) continue;
        const std::size_t im = i == 0 ? n - 1 : i - 1, ip = i + 1 == n ? 0 : i + 1;
        double tm = t[im], tp = t[ip];
        if (i == 0) tm -= period;
        if (i + 1 == n) tp += period;
        const double h1 = t[i] - tm, h2 = tp - t[i];
        auto d1 = [&](const std::vector<std::complex<double>>& v) {
            return -h2 / (h1 * (h1 + h2)) * v[im] + (h2 - h1) / (h1 * h2) * v[i] + h1 / (h2 * (h1 + h2)) * v[ip];
        };
        e1 = std::max(e1, std::abs(d1(z) - zdot[i]));
        e2 = std::max(e2, std::abs(d1(zdot) - zddot[i]));
    }
    return std::max(s1 > 0 ? e1 / s1 : e1, s2 > 0 ? e2 / s2 : e2);
}

std::vector<Axis> homotopy_axes(std::size_t nt, std::size_t nx, std::size_t ny, bool periodic, double period,
                                double lateral, double y_min, double y_max) {
    return {periodic ? Axis::periodic_uniform("t", 0.0, period, nt) : Axis::uniform("t", 0.0, period, nt),
            Axis::uniform("x2", -lateral, lateral, nx), Axis::uniform("x3", -lateral, lateral, nx),
            Axis::logarithmic("y", y_min, y_max, ny)};
}

std::vector<AxisRole> homotopy_roles() { return {AxisRole::Time, AxisRole::X, AxisRole::X, AxisRole::Y}; }

Eigen::SparseMatrix<double> assemble_Lq(const GridField& psi0, const ModelParams& params,
                                        const std::vector<AxisRole>& roles, const HomotopyConventions& conv,
                                        ExecPolicy policy) {
    const StencilOperator op(psi0.axes(), roles);
    const GridField w = ebe_weight(params, op);
    std::vector<double> potential(op.nodes());
    for_nodes(op.nodes(), policy, [&](std::size_t k) {
        potential[k] = conv.expansion_factor * w[k] * std::exp(2.0 * psi0[k]);
    });
    return op.assemble(potential.data(), policy);
}

namespace {

// First or second derivative along axis a wherever that axis has both neighbours; 0 elsewhere.
GridField axis_derivative(const StencilOperator& op, const GridField& f, std::size_t a, bool second,
                          ExecPolicy policy) {
    const Axis& ax = op.axes()[a];
    std::vector<Stencil3> w(ax.size());
    std::vector<char> ok(ax.size(), 0);
    for (std::size_t i = 0; i < ax.size(); ++i) {
        if (!ax.periodic && (i == 0 || i + 1 == ax.size())) continue;
        w[i] = second ? ax.d2(i) : ax.d1(i);
        ok[i] = 1;
    }
    GridField out(f.axes());
    const std::size_t stride = op.strides()[a], n = op.shape()[a];
    for_nodes(f.size(), policy, [&](std::size_t k) {
        const std::size_t i = (k / stride) % n;
        if (!ok[i]) return;
        out[k] = w[i].m * f[op.neighbour(k, a, -1)] + w[i].c * f[k] + w[i].p * f[op.neighbour(k, a, +1)];
    });
    return out;
}

void zero_boundary(const StencilOperator& op, GridField& f) {
    for (std::size_t k = 0; k < f.size(); ++k)
        if (op.unknown_of(k) < 0) f[k] = 0.0;
}

} // namespace

MotionTerms motion_terms(const GridField& f, const StrandMotion& motion, const std::vector<AxisRole>& roles,
                         ExecPolicy policy) {
    const StencilOperator op(f.axes(), roles);
    const std::size_t at = find_role(roles, AxisRole::Time), a2 = find_role(roles, AxisRole::X),
                      a3 = find_role(roles, AxisRole::X, 1);
    require(motion.size() == op.shape()[at], ErrorCode::LengthMismatch, "motion samples must match the time axis");
    const GridField d2 = axis_derivative(op, f, a2, false, policy);
    const GridField d3 = axis_derivative(op, f, a3, false, policy);
    const GridField dt = axis_derivative(op, f, at, false, policy);
    const GridField d2t = axis_derivative(op, dt, a2, false, policy);
    const GridField d3t = axis_derivative(op, dt, a3, false, policy);
    const GridField d23 = axis_derivative(op, d3, a2, false, policy);
    const GridField d22 = axis_derivative(op, f, a2, true, policy);
    const GridField d33 = axis_derivative(op, f, a3, true, policy);
    MotionTerms m{GridField(f.axes()), GridField(f.axes()), GridField(f.axes())};
    const std::size_t tstride = op.strides()[at], nt = op.shape()[at];
    for_nodes(op.unknowns(), policy, [&](std::size_t u) {
        const std::size_t k = op.node_of(u);
        const std::size_t it = (k / tstride) % nt;
        const double ar = motion.zddot[it].real(), ai = motion.zddot[it].imag();
        const double vr = motion.zdot[it].real(), vi = motion.zdot[it].imag();
        m.accel[k] = ar * d2[k] + ai * d3[k];
        m.cross[k] = vr * d2t[k] + vi * d3t[k];
        m.second[k] = vr * vr * d22[k] + 2.0 * vr * vi * d23[k] + vi * vi * d33[k];
    });
    return m;
}

GridField assemble_K(int n, const std::vector<GridField>& lower, const StrandMotion& motion,
                     const ModelParams& params, const std::vector<AxisRole>& roles, const HomotopyConventions& conv,
                     ExecPolicy policy) {
    require(n >= 1, ErrorCode::DomainError, "K^(n) needs n >= 1");
    require(static_cast<int>(lower.size()) == n, ErrorCode::LengthMismatch, "K^(n) needs psi^(0) ... psi^(n-1)");
    for (const auto& g : lower)
        require(g.same_grid(lower[0]), ErrorCode::DimensionMismatch, "lower orders live on different grids");
    const StencilOperator op(lower[0].axes(), roles);
    const GridField w = ebe_weight(params, op);
    const auto m1 = motion_terms(lower[static_cast<std::size_t>(n - 1)], motion, roles, policy);
    GridField k = -1.0 * m1.accel - conv.cross_factor * m1.cross;
    if (n >= 2) k = k + motion_terms(lower[static_cast<std::size_t>(n - 2)], motion, roles, policy).second;
    std::vector<const double*> ptr;
    for (const auto& g : lower) ptr.push_back(g.values().data());
    std::vector<double> s(k.size());
    partition_sum_kernel(n, ptr, k.size(), conv.expansion_factor, s.data(), policy);
    const GridField& psi0 = lower[0];
    for_nodes(k.size(), policy, [&](std::size_t i) { k[i] -= w[i] * std::exp(2.0 * psi0[i]) * s[i]; });
    zero_boundary(op, k);
    return k;
}

DkwOrderResult solve_dkw_order(int n, const std::vector<GridField>& lower, const StrandMotion& motion,
                               const ModelParams& params, const GridField& boundary,
                               const std::vector<AxisRole>& roles, const DkwOptions& opts) {
    require(n >= 0, ErrorCode::DomainError, "order must be non-negative");
    require(!roles.empty() && roles[0] == AxisRole::Time, ErrorCode::DimensionMismatch,
            "homotopy grids put time first");
    DkwOrderResult res;
    if (n == 0) {
        require(boundary.size() > 0 && boundary.dims() == roles.size(), ErrorCode::DimensionMismatch,
                "psi^(0) needs Dirichlet data on the full grid");
        require(motion.size() == boundary.shape()[0], ErrorCode::LengthMismatch,
                "motion samples must match the time axis");
        const std::vector<Axis> slice_axes(boundary.axes().begin() + 1, boundary.axes().end());
        const std::vector<AxisRole> slice_roles(roles.begin() + 1, roles.end());
        res.psi = boundary;
        const std::size_t block = boundary.strides()[0];
        for (std::size_t it = 0; it < boundary.shape()[0]; ++it) {
            GridField slice(slice_axes);
            std::copy_n(boundary.values().begin() + static_cast<std::ptrdiff_t>(it * block), block,
                        slice.values().begin());
            const auto r = solve_ebe(params, slice, slice_roles, opts.ebe);
            std::copy(r.psi.values().begin(), r.psi.values().end(),
                      res.psi.values().begin() + static_cast<std::ptrdiff_t>(it * block));
            res.residual = std::max(res.residual, r.residual);
            res.newton_iterations = std::max(res.newton_iterations, r.iterations);
        }
        return res;
    }
    const GridField k = assemble_K(n, lower, motion, params, roles, opts.conventions, opts.ebe.policy);
    const StencilOperator op(lower[0].axes(), roles);
    GridField b(lower[0].axes());
    if (boundary.size() > 0) {
        require(boundary.same_grid(b), ErrorCode::DimensionMismatch, "boundary data lives on a different grid");
        for (std::size_t i = 0; i < b.size(); ++i)
            if (op.unknown_of(i) < 0) b[i] = boundary[i];
    }
    std::vector<double> lb(op.nodes());
    op.apply(b.values().data(), lb.data(), opts.ebe.policy);
    const auto a = assemble_Lq(lower[0], params, roles, opts.conventions, opts.ebe.policy);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(op.unknowns()));
    for (std::size_t u = 0; u < op.unknowns(); ++u) {
        const std::size_t f = op.node_of(u);
        rhs[static_cast<Eigen::Index>(u)] = -k[f] - lb[f];
    }
    const Eigen::VectorXd x = solve_sparse(a, rhs, opts.ebe.direct_limit);
    res.psi = b;
    for (std::size_t u = 0; u < op.unknowns(); ++u) res.psi[op.node_of(u)] = x[static_cast<Eigen::Index>(u)];
    // Residual of L_q psi + K, recomputed on the grid.
    const GridField w = ebe_weight(params, op);
    std::vector<double> lp(op.nodes());
    op.apply(res.psi.values().data(), lp.data(), opts.ebe.policy);
    for (std::size_t u = 0; u < op.unknowns(); ++u) {
        const std::size_t f = op.node_of(u);
        const double v = lp[f] - opts.conventions.expansion_factor * w[f] * std::exp(2.0 * lower[0][f]) * res.psi[f] + k[f];
        res.residual = std::max(res.residual, std::abs(v));
    }
    require(res.residual < opts.ebe.tol, ErrorCode::LinearSolveFailed,
            "linear residual " + std::to_string(res.residual) + " above tolerance");
    return res;
}

GridField series_sum(double q, const std::vector<GridField>& orders) {
    require(!orders.empty(), ErrorCode::LengthMismatch, "series needs at least one order");
    GridField s = orders[0];
    double qn = 1.0;
    for (std::size_t n = 1; n < orders.size(); ++n) {
        require(orders[n].same_grid(s), ErrorCode::DimensionMismatch, "orders live on different grids");
        qn *= q;
        for (std::size_t k = 0; k < s.size(); ++k) s[k] += qn * orders[n][k];
    }
    return s;
}

SeriesEval series_eval(double q, const std::vector<GridField>& orders, const StrandMotion& motion,
                       const ModelParams& params, const std::vector<AxisRole>& roles, ExecPolicy policy) {
    SeriesEval ev;
    ev.psi = series_sum(q, orders);
    const StencilOperator op(ev.psi.axes(), roles);
    const GridField w = ebe_weight(params, op);
    ev.residual = GridField(ev.psi.axes());
    ebe_residual_kernel(op, ev.psi.values().data(), w.values().data(), ev.residual.values().data(), policy);
    const auto m = motion_terms(ev.psi, motion, roles, policy);
    for_nodes(op.unknowns(), policy, [&](std::size_t u) {
        const std::size_t k = op.node_of(u);
        ev.residual[k] += -q * m.accel[k] - 2.0 * q * m.cross[k] + q * q * m.second[k];
    });
    ev.residual_max = ev.residual.max_abs();
    return ev;
}

} // namespace khg
