#include "khg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace khg {

namespace {

double coord_norm(const Coords& c) {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    return std::sqrt(s);
}

double scale_of(const PointConfig& z, int N) {
    double s = 1.0;
    for (const auto& v : z.points) s = std::max(s, std::max(1, N - 1) * std::abs(v));
    return s;
}

// Normalised power-sum system of the fibre over z: rows m = 2..n,
//   m tr(Y^{m-1} B_j) v_j = m (N-1) [z^{m-1} - (-(N-1) z)^{m-1}] zdot   (velocity form)
//   tr(Y^m) = sum_a (N-1) z_a^m + (-(N-1) z_a)^m                       (fibre equations)
struct PowerSystem {
    Eigen::MatrixXcd jac;  // (n-1) x dim
    VectorC residual;      // p_m(Y) - P_m(z), normalised
    VectorC row_scale;     // 1 / (n s^m)
};

PowerSystem power_system(const SlodowySlice& slice, const SquareMatrixC& y, const PointConfig& z, int N) {
    const auto n = y.rows();
    const auto d = static_cast<Eigen::Index>(slice.dim());
    const double s = scale_of(z, N);
    PowerSystem ps;
    ps.jac.resize(n - 1, d);
    ps.residual.resize(n - 1);
    ps.row_scale.resize(n - 1);
    SquareMatrixC pow = y;  // Y^{m-1}
    for (Eigen::Index m = 2; m <= n; ++m) {
        const double w = 1.0 / (static_cast<double>(n) * std::pow(s, static_cast<double>(m)));
        const SquareMatrixC pt = pow.transpose();
        for (Eigen::Index j = 0; j < d; ++j)
            ps.jac(m - 2, j) = static_cast<double>(m) * w * pt.cwiseProduct(slice.kernel_basis[static_cast<std::size_t>(j)]).sum();
        pow = pow * y;
        Complex target = 0.0;
        for (const auto& za : z.points)
            target += static_cast<double>(N - 1) * std::pow(za, static_cast<int>(m)) +
                      std::pow(-static_cast<double>(N - 1) * za, static_cast<int>(m));
        ps.residual(m - 2) = (pow.trace() - target) * w;
        ps.row_scale(m - 2) = w;
    }
    return ps;
}

Coords to_coords(const VectorC& v) { return Coords(v.data(), v.data() + v.size()); }

VectorC to_vector(const Coords& c) {
    VectorC v(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) v(static_cast<Eigen::Index>(i)) = c[i];
    return v;
}

Eigen::VectorXd to_real(const Coords& c) {
    Eigen::VectorXd x(2 * static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
        x(2 * static_cast<Eigen::Index>(i)) = c[i].real();
        x(2 * static_cast<Eigen::Index>(i) + 1) = c[i].imag();
    }
    return x;
}

Coords from_real(const Eigen::VectorXd& x) {
    Coords c(static_cast<std::size_t>(x.size() / 2));
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = {x(2 * static_cast<Eigen::Index>(i)), x(2 * static_cast<Eigen::Index>(i) + 1)};
    return c;
}

// Complex rows acting on interleaved real coordinates, split into real and imaginary rows.
Eigen::MatrixXd realify(const Eigen::MatrixXcd& j) {
    Eigen::MatrixXd r(2 * j.rows(), 2 * j.cols());
    for (Eigen::Index a = 0; a < j.rows(); ++a)
        for (Eigen::Index b = 0; b < j.cols(); ++b) {
            const Complex v = j(a, b);
            r(2 * a, 2 * b) = v.real();
            r(2 * a + 1, 2 * b) = v.imag();
            r(2 * a, 2 * b + 1) = -v.imag();
            r(2 * a + 1, 2 * b + 1) = v.real();
        }
    return r;
}

double dist(const Coords& a, const Coords& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

SquareMatrixC haar_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    SquareMatrixC g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng));
    Eigen::HouseholderQR<SquareMatrixC> qr(g);
    SquareMatrixC q = qr.householderQ();
    const SquareMatrixC r = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
        const double a = std::abs(r(j, j));
        if (a > 0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

} // namespace

void TransportOptions::validate() const {
    require(step_min > 0 && step_min <= step_init && step_init <= step_max, ErrorCode::ConfigError,
            "transport steps must satisfy 0 < step_min <= step_init <= step_max");
    require(tol > 0 && fibre_tol > 0 && hard_radius > 0 && max_steps > 0, ErrorCode::ConfigError,
            "transport tolerances must be positive");
    require(!clamp_radius || *clamp_radius > 0, ErrorCode::ConfigError, "clamp_radius must be positive");
}

Coords horizontal_velocity(const SlodowySlice& slice, const Coords& coords, const PointConfig& beta,
                           const Coords& beta_dot, int N) {
    require(beta.size() == beta_dot.size(), ErrorCode::LengthMismatch, "one velocity per strand");
    require(static_cast<int>(beta.size()) * N == slice.n(), ErrorCode::DimensionMismatch, "slice must live in sl(kN)");
    const double s = scale_of(beta, N);
    require(stratum_separation(beta, N) > 10.0 * kClusterTol * s, ErrorCode::SingularJacobian,
            "thick or thin eigenvalues collide");
    const SquareMatrixC y = slice_embed(slice, coords);
    const PowerSystem ps = power_system(slice, y, beta, N);
    const auto n = y.rows();
    VectorC b = VectorC::Zero(n - 1);
    for (std::size_t a = 0; a < beta.size(); ++a) {
        const Complex z = beta[a];
        for (Eigen::Index m = 2; m <= n; ++m) {
            const auto e = static_cast<int>(m - 1);
            b(m - 2) += static_cast<double>(m * (N - 1)) *
                        (std::pow(z, e) - std::pow(-static_cast<double>(N - 1) * z, e)) * beta_dot[a] * ps.row_scale(m - 2);
        }
    }
    if (b.isZero(0.0)) return Coords(coords.size(), Complex(0.0, 0.0));
    auto consistent = [&](const VectorC& v) { return v.allFinite() && (ps.jac * v - b).norm() <= 1e-8 * b.norm(); };
    // Minimum norm through the small Gram system; rank-deficient rows fall back to the SVD.
    const Eigen::MatrixXcd gram = ps.jac * ps.jac.adjoint();
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
    VectorC v = ps.jac.adjoint() * ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !consistent(v)) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ps.jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        v = svd.solve(b);
    }
    require(consistent(v), ErrorCode::SingularJacobian, "thick-eigenvalue Jacobian cannot realise the strand velocity");
    return to_coords(v);
}

Eigen::MatrixXd fibre_tangent_basis(const SlodowySlice& slice, const Coords& coords, int N) {
    const SquareMatrixC y = slice_embed(slice, coords);
    const int k = slice.n() / N;
    const PointConfig z = chi_tilde(y, k, N);
    const Eigen::MatrixXd r = realify(power_system(slice, y, z, N).jac);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    svd.setThreshold(1e-9);
    const auto rank = svd.rank();
    return svd.matrixV().rightCols(r.cols() - rank);
}

FibreSolveResult project_to_fibre(const SlodowySlice& slice, const Coords& coords, const PointConfig& target, int N,
                                  double tol) {
    Coords c = coords;
    if (fibre_residual(slice_embed(slice, c), target, N) >= 0.01 * tol) {
        VectorC x = to_vector(c);
        auto res = [&](const VectorC& v) { return power_system(slice, slice_embed(slice, to_coords(v)), target, N); };
        PowerSystem ps = res(x);
        for (int it = 0; it < 30 && ps.residual.cwiseAbs().maxCoeff() > 1e-16; ++it) {
            const VectorC step = ps.jac.completeOrthogonalDecomposition().solve(-ps.residual);
            bool accepted = false;
            double alpha = 1.0;
            for (int ls = 0; ls < 20; ++ls, alpha *= 0.5) {
                const VectorC xn = x + alpha * step;
                PowerSystem pn = res(xn);
                if (pn.residual.allFinite() && pn.residual.norm() < ps.residual.norm()) {
                    x = xn;
                    ps = std::move(pn);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
        }
        c = to_coords(x);
    }
    FibreSolveOptions fo;
    fo.tol = tol;
    return fibre_solve(slice, target, static_cast<int>(target.size()), N, c, fo);
}

TransportResult parallel_transport(const SlodowySlice& slice, const Coords& y0, const StrandPaths& paths, int N,
                                   const TransportOptions& opts, double t0, double t1) {
    opts.validate();
    require(static_cast<int>(y0.size()) == slice.dim(), ErrorCode::DimensionMismatch, "coordinate count mismatch");
    require(static_cast<int>(paths.strands()) * N == slice.n(), ErrorCode::DimensionMismatch,
            "paths must carry one strand per N-block of the slice");
    require(0.0 <= t0 && t0 <= t1 && t1 <= 1.0, ErrorCode::DomainError, "transport interval must lie in [0, 1]");

    std::vector<Complex> z, zd;
    paths.eval(t0, z, zd);
    const double start_res = fibre_residual(slice_embed(slice, y0), PointConfig(z), N);
    require(start_res < 100.0 * opts.fibre_tol, ErrorCode::DomainError,
            "start point is not in the fibre over the path start (residual " + std::to_string(start_res) + ")");

    TransportResult out;
    Coords c = y0;
    out.samples.push_back({t0, c});
    const std::size_t dim = c.size();

    auto velocity = [&](double t, const Coords& x) {
        std::vector<Complex> pz, pv;
        paths.eval(t, pz, pv);
        Coords v = horizontal_velocity(slice, x, PointConfig(pz), pv, N);
        const double r = coord_norm(x);
        if (opts.clamp_radius && r > *opts.clamp_radius) {
            const double f = *opts.clamp_radius / r;
            for (auto& e : v) e *= f;
            out.clamped = true;
        }
        return v;
    };

    // Dormand-Prince 5(4)
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                            e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    auto combo = [&](const Coords& base, double h, std::initializer_list<std::pair<double, const Coords*>> terms) {
        Coords r = base;
        for (const auto& [w, k] : terms)
            if (w != 0.0)
                for (std::size_t i = 0; i < dim; ++i) r[i] += h * w * (*k)[i];
        return r;
    };

    double t = t0;
    double h = std::min(opts.step_init, t1 - t0);
    while (t1 - t > 1e-14) {
        require(out.steps + out.rejected < opts.max_steps, ErrorCode::StepUnderflow, "transport exceeded max_steps");
        h = std::min({h, opts.step_max, t1 - t});
        const Coords k1 = velocity(t, c);
        const Coords k2 = velocity(t + c2 * h, combo(c, h, {{a21, &k1}}));
        const Coords k3 = velocity(t + c3 * h, combo(c, h, {{a31, &k1}, {a32, &k2}}));
        const Coords k4 = velocity(t + c4 * h, combo(c, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Coords k5 = velocity(t + c5 * h, combo(c, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Coords k6 =
            velocity(t + h, combo(c, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const Coords y5 = combo(c, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Coords k7 = velocity(t + h, y5);
        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const Complex e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            err = std::max(err, std::abs(e) / (opts.tol * (1.0 + std::max(std::abs(c[i]), std::abs(y5[i])))));
        }
        if (!std::isfinite(err)) err = 1e10;
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err > 1.0) {
            ++out.rejected;
            h *= factor;
            if (h < opts.step_min) fail(ErrorCode::StepUnderflow, "transport step fell below step_min at t = " + std::to_string(t));
            continue;
        }
        t = (t1 - (t + h) <= 1e-14) ? t1 : t + h;
        std::vector<Complex> pz, pv;
        paths.eval(t, pz, pv);
        const PointConfig target(pz);
        out.max_fibre_drift = std::max(out.max_fibre_drift, fibre_residual(slice_embed(slice, y5), target, N));
        const FibreSolveResult proj = project_to_fibre(slice, y5, target, N, opts.fibre_tol);
        c = proj.coords;
        out.max_fibre_residual = std::max(out.max_fibre_residual, proj.residual);
        require(coord_norm(c) <= opts.hard_radius || opts.clamp_radius.has_value(), ErrorCode::Diverged,
                "transport left the radius " + std::to_string(opts.hard_radius));
        ++out.steps;
        out.samples.push_back({t, c});
        h *= factor;
    }
    out.coords = c;
    out.endpoint = slice_embed(slice, c);
    paths.eval(t1, z, zd);
    const PointConfig ref(z);
    out.end_config = chi_tilde(out.endpoint, static_cast<int>(ref.size()), N, &ref);
    return out;
}

std::vector<std::size_t> dedupe_points(const std::vector<Coords>& pts, double radius) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i < pts[a].size(); ++i) {
            if (pts[a][i].real() != pts[b][i].real()) return pts[a][i].real() < pts[b][i].real();
            if (pts[a][i].imag() != pts[b][i].imag()) return pts[a][i].imag() < pts[b][i].imag();
        }
        return a < b;
    };
    std::sort(order.begin(), order.end(), key_less);
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        bool fresh = true;
        for (std::size_t j : kept)
            if (dist(pts[i], pts[j]) <= radius) {
                fresh = false;
                break;
            }
        if (fresh) kept.push_back(i);
    }
    return kept;
}

Coords fibre_centre(const SlodowySlice& slice, const PointConfig& base, int N) {
    return slice_project(slice, d_sum(base, N));
}

std::vector<Coords> sample_fibre(const SlodowySlice& slice, const PointConfig& base, int N, const SamplerOptions& s,
                                 std::vector<std::string>* failures) {
    require(s.count >= 1 && s.radius > 0, ErrorCode::ConfigError, "sampler needs count >= 1 and radius > 0");
    require(stratum_separation(base, N) > kSeparationTol, ErrorCode::StratumViolation,
            "base configuration is on the stratum boundary: thick and thin values must all differ");
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const auto d = static_cast<std::size_t>(slice.dim());
    const Coords centre = fibre_centre(slice, base, N);
    std::vector<Coords> seeds;
    for (int i = 0; i < s.count; ++i) {
        Coords g(d);
        for (auto& v : g) v = {nd(rng), nd(rng)};
        const double r = s.radius * std::pow(ud(rng), 1.0 / static_cast<double>(2 * d)) / coord_norm(g);
        for (std::size_t j = 0; j < d; ++j) g[j] = centre[j] + r * g[j];
        seeds.push_back(std::move(g));
    }
    std::vector<Coords> out(seeds.size());
    std::vector<std::string> errs(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(seeds.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] = project_to_fibre(slice, seeds[static_cast<std::size_t>(i)], base, N).coords;
        } catch (const Error& e) {
            errs[static_cast<std::size_t>(i)] = e.what();
        }
    }
    std::vector<Coords> kept;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (errs[i].empty()) kept.push_back(std::move(out[i]));
        else if (failures) failures->push_back(errs[i]);
    }
    return kept;
}

namespace {

struct FixedPointSolver {
    const SlodowySlice& slice;
    const StrandPaths& paths;
    const PointConfig& base;
    int N;
    const FixedPointOptions& opts;
    Eigen::VectorXd centre;

    Eigen::VectorXd G(const Eigen::VectorXd& x) const {
        const Coords end = parallel_transport(slice, from_real(x), paths, N, opts.transport).coords;
        return to_real(end) - x;
    }

    Eigen::VectorXd project(const Eigen::VectorXd& x) const {
        return to_real(project_to_fibre(slice, from_real(x), base, N, opts.transport.fibre_tol).coords);
    }

    // Columns (G(x + h t_j) - G(x - h t_j)) / 2h over the fibre tangent basis T.
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::MatrixXd& T) const {
        Eigen::MatrixXd a(x.size(), T.cols());
        const double h = opts.fd_step;
        for (Eigen::Index j = 0; j < T.cols(); ++j)
            a.col(j) = (G(project(x + h * T.col(j))) - G(project(x - h * T.col(j)))) / (2.0 * h);
        return a;
    }

    void solve(SampleStatus& st) const {
        Eigen::VectorXd x = to_real(st.start);
        Eigen::VectorXd g = G(x);
        for (st.iterations = 0; g.cwiseAbs().maxCoeff() >= opts.fixed_tol; ++st.iterations) {
            if (st.iterations >= opts.newton_max_iter) {
                st.residual = g.norm();
                st.error = "fixed-point Newton did not converge";
                return;
            }
            const Eigen::MatrixXd T = fibre_tangent_basis(slice, from_real(x), N);
            const Eigen::MatrixXd a = jacobian(x, T);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
            svd.setThreshold(opts.svd_cut);
            Eigen::VectorXd step = T * svd.solve(-g);
            if (step.norm() > opts.max_newton_step) step *= opts.max_newton_step / step.norm();
            bool accepted = false;
            double alpha = 1.0;
            for (int ls = 0; ls < 8; ++ls, alpha *= 0.5) {
                try {
                    const Eigen::VectorXd xn = project(x + alpha * step);
                    if ((xn - centre).norm() > opts.escape_radius) continue;
                    const Eigen::VectorXd gn = G(xn);
                    if (gn.norm() < g.norm()) {
                        x = xn;
                        g = gn;
                        accepted = true;
                        break;
                    }
                } catch (const Error&) {
                }
            }
            if (!accepted) {
                st.residual = g.norm();
                st.error = "fixed-point Newton stalled or left the search ball";
                return;
            }
        }
        st.start = from_real(x);
        st.residual = g.norm();
        st.converged = true;
        const Eigen::MatrixXd T = fibre_tangent_basis(slice, st.start, N);
        const Eigen::MatrixXd m = T.transpose() * jacobian(x, T);
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
        st.nullity = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) < opts.null_tol) ++st.nullity;
        st.isolated = st.nullity == 0;
    }
};

} // namespace

FixedPointReport monodromy_fixed_points(const BraidWord& word, const PointConfig& base, const Partition& pi, int N,
                                        const SamplerOptions& sampler, const FixedPointOptions& opts) {
    word.validate();
    require(word.is_pure(), ErrorCode::NotPureBraid, "monodromy needs a pure braid, got " + word.to_string());
    require(static_cast<int>(base.size()) == word.strands, ErrorCode::LengthMismatch, "one base point per strand");
    require(pi.n() == word.strands * N, ErrorCode::MismatchedN, "partition must be of kN");
    require(opts.dedupe_radius > 0, ErrorCode::ConfigError, "dedupe_radius must be positive");
    const SlodowySlice slice = slodowy_slice(jordan_nilpotent(pi));
    const StrandPaths paths = braid_to_paths(word, base);

    FixedPointReport rep;
    rep.dedupe_radius = opts.dedupe_radius;
    std::vector<std::string> failures;
    const auto starts = sample_fibre(slice, base, N, sampler, &failures);
    rep.samples.resize(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) rep.samples[i].start = starts[i];
    const FixedPointSolver solver{slice, paths, base, N, opts, to_real(fibre_centre(slice, base, N))};
    const bool identity = word.empty();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(starts.size()); ++i) {
        auto& st = rep.samples[static_cast<std::size_t>(i)];
        try {
            if (identity) {
                const Coords end = parallel_transport(slice, st.start, paths, N, opts.transport).coords;
                st.residual = dist(end, st.start);
                st.converged = st.residual < opts.fixed_tol;
                st.nullity = 2 * slice.dim();
                if (!st.converged) st.error = "identity transport moved the point";
            } else {
                solver.solve(st);
            }
        } catch (const Error& e) {
            st.converged = false;
            st.error = e.what();
        }
    }
    for (const auto& f : failures) {
        SampleStatus st;
        st.error = f;
        rep.samples.push_back(std::move(st));
    }
    std::vector<Coords> iso, cont;
    std::vector<double> iso_r, cont_r;
    for (const auto& st : rep.samples) {
        if (!st.converged) continue;
        if (st.isolated) {
            iso.push_back(st.start);
            iso_r.push_back(st.residual);
        } else {
            cont.push_back(st.start);
            cont_r.push_back(st.residual);
        }
    }
    require(!iso.empty() || !cont.empty(), ErrorCode::NoSamplesConverged, "no fixed-point sample converged");
    for (std::size_t i : dedupe_points(iso, opts.dedupe_radius)) {
        rep.points.push_back(iso[i]);
        rep.residuals.push_back(iso_r[i]);
    }
    for (std::size_t i : dedupe_points(cont, opts.dedupe_radius)) {
        rep.continuum_points.push_back(cont[i]);
        rep.continuum_residuals.push_back(cont_r[i]);
    }
    rep.continuum_flag = identity || !rep.continuum_points.empty();
    return rep;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Member: return "member";
    case Verdict::NotMember: return "not_member";
    case Verdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

double vanishing_distance(const SquareMatrixC& y, Complex r, int N, int pair_points) {
    const auto n = y.rows();
    const Complex thin = -static_cast<double>(N - 1) * r;
    SquareMatrixC q = SquareMatrixC::Identity(n, n);
    if (n > pair_points * N) {
        Eigen::ComplexEigenSolver<SquareMatrixC> es(y);
        require(es.info() == Eigen::Success, ErrorCode::SingularJacobian, "eigen decomposition failed");
        const VectorC ev = es.eigenvalues();
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        auto gap = [&](Eigen::Index i) { return std::min(std::abs(ev(i) - r), std::abs(ev(i) - thin)); };
        std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return gap(a) < gap(b); });
        const SquareMatrixC v = es.eigenvectors();
        const SquareMatrixC w = v.inverse();
        q.setZero();
        for (int j = 0; j < pair_points * N; ++j) {
            const Eigen::Index i = idx[static_cast<std::size_t>(j)];
            q += v.col(i) * w.row(i);
        }
    }
    const SquareMatrixC id = SquareMatrixC::Identity(n, n);
    SquareMatrixC m = (y - r * id) * q;
    if (std::abs(r - thin) > 1e-8) m = (y - thin * id) * m;
    return m.norm();
}

VanishingReport vanishing_cycle_check(const SlodowySlice& slice, const Coords& coords, const EntranceStage& stage,
                                      int N, const VanishingOptions& opts) {
    require(opts.eps_sing > 0 && opts.eps_sing < 1 && opts.tau_vanish > 0 && opts.monitor >= 2,
            ErrorCode::ConfigError, "vanishing options out of range");
    const PointConfig start = stage.path.start();
    require(fibre_residual(slice_embed(slice, coords), start, N) < 1e-8, ErrorCode::DomainError,
            "point is not in the fibre over the start of the arc");
    VanishingReport rep;
    Coords c = coords;
    auto distance = [&](const Coords& x) { return vanishing_distance(slice_embed(slice, x), stage.merge_point, N); };
    rep.s.push_back(0.0);
    rep.distance.push_back(distance(c));
    const double l = std::log(opts.eps_sing);
    for (int j = 1; j <= opts.monitor; ++j) {
        const double s = 1.0 - std::exp(l * j / opts.monitor);
        try {
            c = parallel_transport(slice, c, stage.path, N, opts.transport, rep.s.back(), s).coords;
        } catch (const Error& e) {
            rep.verdict = Verdict::NotMember;
            rep.reason = std::string("transport failed: ") + e.what();
            rep.final_coords = c;
            return rep;
        }
        rep.s.push_back(s);
        rep.distance.push_back(distance(c));
    }
    rep.final_coords = c;
    const double d = rep.distance.back();
    bool decreasing = d < rep.distance.front();
    for (std::size_t j = rep.distance.size() / 2; j + 1 < rep.distance.size(); ++j)
        decreasing = decreasing && rep.distance[j + 1] <= rep.distance[j] * (1.0 + 1e-6) + 1e-14;
    if (d > 10.0 * opts.tau_vanish) {
        rep.verdict = Verdict::NotMember;
        rep.reason = "converges away from the semisimple limit";
    } else if (d < 0.1 * opts.tau_vanish) {
        rep.verdict = decreasing ? Verdict::Member : Verdict::NotMember;
        rep.reason = decreasing ? "distance decreases to the limit" : "distance does not decrease";
    } else {
        rep.verdict = Verdict::Indeterminate;
        rep.reason = "final distance within a factor 10 of tau_vanish";
    }
    return rep;
}

bool vanishing_cycle_membership(const SlodowySlice& slice, const Coords& coords, const EntranceStage& stage, int N,
                                const VanishingOptions& opts) {
    const auto rep = vanishing_cycle_check(slice, coords, stage, N, opts);
    require(rep.verdict != Verdict::Indeterminate, ErrorCode::IndeterminateConvergence,
            "final distance " + std::to_string(rep.distance.back()) + " is too close to tau_vanish");
    return rep.verdict == Verdict::Member;
}

LagrangianSample lagrangian_sample(const CrossinglessMatching& m, const PointConfig& base, const Partition& pi, int N,
                                   int count, const LagrangianOptions& opts) {
    require(count >= 1, ErrorCode::ConfigError, "count must be positive");
    const auto stages = matching_entrance_path(m, base);
    require(stages.size() == 1, ErrorCode::DomainError, "Lagrangian sampling supports one-arc matchings");
    require(pi.n() == 2 * N, ErrorCode::MismatchedN, "partition must be of 2N");
    const SlodowySlice slice = slodowy_slice(jordan_nilpotent(pi));
    const EntranceStage& stage = stages.front();
    const double u_seed = 1.0 - opts.vanishing.eps_sing;
    const PointConfig near = stage.path.at(u_seed);
    const StrandPaths back = stage.path.reversed();

    std::mt19937_64 rng(opts.seed);
    std::vector<SquareMatrixC> unitaries;
    for (int i = 0; i < count; ++i) unitaries.push_back(haar_unitary(2 * N, rng));
    const SquareMatrixC limit = d_sum(near, N);

    std::vector<Coords> pts(static_cast<std::size_t>(count));
    std::vector<char> ok(static_cast<std::size_t>(count), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            const auto& u = unitaries[static_cast<std::size_t>(i)];
            const Coords seed = slice_project(slice, u * limit * u.adjoint());
            const Coords y = project_to_fibre(slice, seed, near, N).coords;
            const Coords y0 = parallel_transport(slice, y, back, N, opts.vanishing.transport, 1.0 - u_seed, 1.0).coords;
            if (vanishing_cycle_check(slice, y0, stage, N, opts.vanishing).verdict == Verdict::Member) {
                pts[static_cast<std::size_t>(i)] = y0;
                ok[static_cast<std::size_t>(i)] = 1;
            }
        } catch (const Error&) {
        }
    }
    LagrangianSample out;
    out.attempted = count;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (ok[i]) out.points.push_back(std::move(pts[i]));
    out.accepted = static_cast<int>(out.points.size());
    require(10 * out.accepted >= count, ErrorCode::InsufficientSeeds,
            std::to_string(out.accepted) + " of " + std::to_string(count) + " seeds survived");
    return out;
}

std::vector<Coords> transport_cloud(const SlodowySlice& slice, const std::vector<Coords>& cloud,
                                    const StrandPaths& paths, int N, const TransportOptions& opts) {
    std::vector<Coords> out(cloud.size());
    std::vector<char> ok(cloud.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cloud.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] = parallel_transport(slice, cloud[static_cast<std::size_t>(i)], paths, N, opts).coords;
            ok[static_cast<std::size_t>(i)] = 1;
        } catch (const Error&) {
        }
    }
    std::vector<Coords> kept;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (ok[i]) kept.push_back(std::move(out[i]));
    return kept;
}

namespace {

// Local affine model of a cloud at point i: orthonormal tangent columns from the K nearest points.
Eigen::MatrixXd local_tangent(const std::vector<Coords>& cloud, std::size_t i, const GeneratorOptions& o) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < cloud.size(); ++j) d.emplace_back(dist(cloud[i], cloud[j]), j);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(o.neighbours), d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    const Eigen::VectorXd centre = to_real(cloud[i]);
    Eigen::MatrixXd a(centre.size(), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) a.col(static_cast<Eigen::Index>(j)) = to_real(cloud[d[j].second]) - centre;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(0) > 0 && sv(r) > o.tangent_tol * sv(0)) ++r;
    return svd.matrixU().leftCols(r);
}

} // namespace

FixedPointReport intersection_generators(const std::vector<Coords>& minus, const std::vector<Coords>& plus,
                                         const GeneratorOptions& opts) {
    FixedPointReport rep;
    rep.dedupe_radius = opts.dedupe_radius;
    std::vector<Coords> found, degenerate;
    std::vector<double> found_r, degenerate_r;
    for (std::size_t i = 0; i < minus.size(); ++i) {
        std::size_t best = plus.size();
        double bd = opts.capture_radius;
        for (std::size_t j = 0; j < plus.size(); ++j) {
            const double dd = dist(minus[i], plus[j]);
            if (dd < bd) {
                bd = dd;
                best = j;
            }
        }
        if (best == plus.size()) continue;
        const Eigen::MatrixXd ta = local_tangent(minus, i, opts), tb = local_tangent(plus, best, opts);
        const Eigen::VectorXd a = to_real(minus[i]), b = to_real(plus[best]);
        Eigen::MatrixXd sys(a.size(), ta.cols() + tb.cols());
        sys << ta, -tb;
        const auto cod = sys.completeOrthogonalDecomposition();
        const Eigen::VectorXd ab = cod.solve(b - a);
        const Eigen::VectorXd pa = a + ta * ab.head(ta.cols()), pb = b + tb * ab.tail(tb.cols());
        const double res = (pa - pb).norm();
        if (res > opts.match_tol) continue;
        const Coords x = from_real(0.5 * (pa + pb));
        if (cod.rank() < sys.cols()) {
            degenerate.push_back(x);
            degenerate_r.push_back(res);
        } else {
            found.push_back(x);
            found_r.push_back(res);
        }
    }
    for (std::size_t i : dedupe_points(found, opts.dedupe_radius)) {
        rep.points.push_back(found[i]);
        rep.residuals.push_back(found_r[i]);
    }
    for (std::size_t i : dedupe_points(degenerate, opts.dedupe_radius)) {
        rep.continuum_points.push_back(degenerate[i]);
        rep.continuum_residuals.push_back(degenerate_r[i]);
    }
    rep.continuum_flag = !rep.continuum_points.empty();
    return rep;
}

std::vector<double> cloud_singular_values(const std::vector<Coords>& cloud) {
    if (cloud.empty()) return {};
    const auto dim = 2 * static_cast<Eigen::Index>(cloud.front().size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(cloud.size()), dim);
    for (std::size_t i = 0; i < cloud.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = to_real(cloud[i]).transpose();
    const Eigen::RowVectorXd mean = a.colwise().mean();
    a.rowwise() -= mean;
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
    return {sv.data(), sv.data() + sv.size()};
}

double hausdorff_distance(const std::vector<Coords>& a, const std::vector<Coords>& b) {
    auto directed = [](const std::vector<Coords>& x, const std::vector<Coords>& y) {
        double h = 0.0;
        for (const auto& p : x) {
            double m = INFINITY;
            for (const auto& q : y) m = std::min(m, dist(p, q));
            h = std::max(h, m);
        }
        return h;
    };
    return std::max(directed(a, b), directed(b, a));
}

} // namespace khg
