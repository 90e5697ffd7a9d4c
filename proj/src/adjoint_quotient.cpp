#include "khg/adjoint_quotient.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace khg {

double PointConfig::separation() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, std::abs(points[i] - points[j]));
    return best;
}

double stratum_separation(const PointConfig& d, int N) {
    std::vector<Complex> all = d.points;
    for (const auto& z : d.points) all.push_back(-static_cast<double>(N - 1) * z);
    return PointConfig(std::move(all)).separation();
}

VectorC charpoly(const SquareMatrixC& x) {
    require(x.rows() == x.cols(), ErrorCode::DimensionMismatch, "charpoly needs a square matrix");
    const auto n = x.rows();
    SquareMatrixC h = x;
    if (n > 2) h = Eigen::HessenbergDecomposition<SquareMatrixC>(x).matrixH();

    // La Budde: p[i] is the characteristic polynomial of the leading i x i block,
    // stored by increasing degree.
    std::vector<VectorC> p(static_cast<std::size_t>(n + 1));
    p[0] = VectorC::Ones(1);
    for (Eigen::Index i = 1; i <= n; ++i) {
        VectorC next = VectorC::Zero(i + 1);
        const VectorC& prev = p[static_cast<std::size_t>(i - 1)];
        next.tail(i) += prev;
        next.head(i) -= h(i - 1, i - 1) * prev;
        Complex sub = 1.0;
        for (Eigen::Index m = 1; m < i; ++m) {
            sub *= h(i - m, i - m - 1);
            const Complex w = h(i - m - 1, i - 1) * sub;
            if (w == Complex(0.0)) continue;
            const VectorC& q = p[static_cast<std::size_t>(i - m - 1)];
            next.head(q.size()) -= w * q;
        }
        p[static_cast<std::size_t>(i)] = std::move(next);
    }
    return p[static_cast<std::size_t>(n)].reverse();
}

std::vector<Complex> chi_invariants(const SquareMatrixC& x) {
    const VectorC a = charpoly(x);
    std::vector<Complex> c;
    for (Eigen::Index j = 2; j < a.size(); ++j) c.push_back((j % 2 == 0 ? 1.0 : -1.0) * a(j));
    return c;
}

namespace {

VectorC poly_mul(const VectorC& a, const VectorC& b) {
    VectorC out = VectorC::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i, b.size()) += a(i) * b;
    return out;
}

double coefficient_scale(const PointConfig& d, int N) {
    double rho = 1.0;
    for (const auto& z : d.points) rho = std::max(rho, static_cast<double>(std::max(1, N - 1)) * std::abs(z));
    return rho;
}

std::vector<std::size_t> best_assignment(std::size_t k, const std::function<double(std::size_t, std::size_t)>& cost) {
    std::vector<std::size_t> perm(k), best;
    std::iota(perm.begin(), perm.end(), 0);
    if (k > 8) {
        // Greedy for large k: each reference slot takes the closest remaining candidate.
        std::vector<bool> used(k, false);
        best.assign(k, 0);
        for (std::size_t a = 0; a < k; ++a) {
            double c = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < k; ++b)
                if (!used[b] && cost(a, b) < c) {
                    c = cost(a, b);
                    best[a] = b;
                }
            used[best[a]] = true;
        }
        return best;
    }
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t a = 0; a < k; ++a) c += cost(a, perm[a]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool lex_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// Positive half-plane representative of {w, -w}.
Complex canonical_sign(const Complex& w) {
    if (w.real() > 0.0 || (w.real() == 0.0 && w.imag() > 0.0)) return w;
    return -w;
}

} // namespace

VectorC stratum_charpoly(const PointConfig& d, int N) {
    VectorC p = VectorC::Ones(1);
    for (const auto& z : d.points) {
        VectorC thick(2);
        thick << 1.0, -z;
        for (int r = 0; r < N - 1; ++r) p = poly_mul(p, thick);
        VectorC thin(2);
        thin << 1.0, static_cast<double>(N - 1) * z;
        p = poly_mul(p, thin);
    }
    return p;
}

SquareMatrixC d_block(Complex z, int N) {
    require(N >= 2, ErrorCode::DomainError, "d_block needs N >= 2");
    SquareMatrixC d = SquareMatrixC::Zero(N, N);
    for (int i = 0; i + 1 < N; ++i) d(i, i) = z;
    d(N - 1, N - 1) = -static_cast<double>(N - 1) * z;
    return d;
}

SquareMatrixC d_sum(const PointConfig& d, int N) {
    const auto k = static_cast<Eigen::Index>(d.size());
    SquareMatrixC out = SquareMatrixC::Zero(k * N, k * N);
    for (Eigen::Index a = 0; a < k; ++a) out.block(a * N, a * N, N, N) = d_block(d.points[static_cast<std::size_t>(a)], N);
    return out;
}

PointConfig match_labels(const PointConfig& points, const PointConfig& reference) {
    require(points.size() == reference.size(), ErrorCode::DimensionMismatch, "label matching needs equal sizes");
    const auto perm = best_assignment(points.size(), [&](std::size_t a, std::size_t b) {
        return std::abs(points.points[b] - reference.points[a]);
    });
    PointConfig out;
    for (std::size_t a = 0; a < perm.size(); ++a) out.points.push_back(points.points[perm[a]]);
    return out;
}

PointConfig chi_tilde(const SquareMatrixC& x, int k, int N, const PointConfig* reference, double cluster_tol) {
    require(k >= 1 && N >= 2, ErrorCode::DomainError, "need k >= 1 and N >= 2");
    require(x.rows() == static_cast<Eigen::Index>(k) * N && x.cols() == x.rows(), ErrorCode::DimensionMismatch,
            "matrix dimension must be kN");
    Eigen::ComplexEigenSolver<SquareMatrixC> es(x, false);
    const VectorC ev = es.eigenvalues();
    const auto n = static_cast<std::size_t>(ev.size());
    const double rho = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double tol = cluster_tol * rho;

    // Single-linkage clustering.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
        return parent[i] == i ? i : parent[i] = root(parent[i]);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(ev(static_cast<Eigen::Index>(i)) - ev(static_cast<Eigen::Index>(j))) <= tol)
                parent[root(i)] = root(j);
    std::vector<std::vector<Complex>> clusters;
    std::vector<std::size_t> slot(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = root(i);
        if (slot[r] == n) {
            slot[r] = clusters.size();
            clusters.emplace_back();
        }
        clusters[slot[r]].push_back(ev(static_cast<Eigen::Index>(i)));
    }
    auto mean = [](const std::vector<Complex>& c) {
        return std::accumulate(c.begin(), c.end(), Complex(0.0)) / static_cast<double>(c.size());
    };

    const auto ku = static_cast<std::size_t>(k);
    std::vector<std::vector<Complex>> options;  // candidate thick values per strand
    if (N == 2) {
        require(clusters.size() == 2 * ku, ErrorCode::StratumViolation, "eigenvalues are not simple");
        std::vector<Complex> vals;
        for (const auto& c : clusters) vals.push_back(c.front());
        std::vector<bool> used(vals.size(), false);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (used[i]) continue;
            std::size_t partner = vals.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < vals.size(); ++j)
                if (j != i && !used[j] && std::abs(vals[i] + vals[j]) < best) {
                    best = std::abs(vals[i] + vals[j]);
                    partner = j;
                }
            require(partner < vals.size() && best <= tol, ErrorCode::StratumViolation,
                    "eigenvalues do not pair as thick and thin values");
            used[i] = used[partner] = true;
            const Complex w = canonical_sign(0.5 * (vals[i] - vals[partner]));
            options.push_back({w, -w});
        }
    } else {
        std::vector<Complex> thick, thin;
        for (const auto& c : clusters) {
            if (static_cast<int>(c.size()) == N - 1)
                thick.push_back(mean(c));
            else if (c.size() == 1)
                thin.push_back(c.front());
            else
                fail(ErrorCode::StratumViolation, "eigenvalue multiplicity pattern is not [(N-1)^k 1^k]");
        }
        require(thick.size() == ku && thin.size() == ku, ErrorCode::StratumViolation,
                "eigenvalue multiplicity pattern is not [(N-1)^k 1^k]");
        const double scale = static_cast<double>(N - 1);
        const auto perm = best_assignment(ku, [&](std::size_t a, std::size_t b) {
            return std::abs(thin[b] + scale * thick[a]);
        });
        for (std::size_t a = 0; a < ku; ++a)
            require(std::abs(thin[perm[a]] + scale * thick[a]) <= tol * scale, ErrorCode::StratumViolation,
                    "thin eigenvalue does not cancel a thick one in the trace");
        for (const auto& z : thick) options.push_back({z});
    }

    PointConfig out;
    if (reference && reference->size() == ku) {
        const auto perm = best_assignment(ku, [&](std::size_t a, std::size_t b) {
            double c = std::numeric_limits<double>::infinity();
            for (const auto& z : options[b]) c = std::min(c, std::abs(z - reference->points[a]));
            return c;
        });
        for (std::size_t a = 0; a < ku; ++a) {
            const auto& opts = options[perm[a]];
            Complex pick = opts.front();
            for (const auto& z : opts)
                if (std::abs(z - reference->points[a]) < std::abs(pick - reference->points[a])) pick = z;
            out.points.push_back(pick);
        }
    } else {
        for (const auto& o : options) out.points.push_back(o.front());
        std::sort(out.points.begin(), out.points.end(), lex_less);
    }
    require(stratum_separation(out, N) > tol, ErrorCode::StratumViolation, "thick and thin values collide");
    return out;
}

PointConfig chi_tilde(const ThickThinElement& x, double cluster_tol) {
    return chi_tilde(x.matrix, x.k, x.N, x.thick.size() ? &x.thick : nullptr, cluster_tol);
}

bool in_stratum(const SquareMatrixC& x, int k, int N, double cluster_tol) {
    if (k < 1 || N < 2 || x.rows() != static_cast<Eigen::Index>(k) * N || x.cols() != x.rows()) return false;
    try {
        chi_tilde(x, k, N, nullptr, cluster_tol);
        return true;
    } catch (const Error&) {
        return false;
    }
}

SquareMatrixC slice_embed(const SlodowySlice& slice, const std::vector<Complex>& coords) {
    require(static_cast<int>(coords.size()) == slice.dim(), ErrorCode::DimensionMismatch,
            "coordinate count must equal the slice dimension");
    SquareMatrixC y = slice.base();
    for (std::size_t i = 0; i < coords.size(); ++i) y += coords[i] * slice.kernel_basis[i];
    return y;
}

std::vector<Complex> slice_project(const SlodowySlice& slice, const SquareMatrixC& x) {
    require(x.rows() == slice.n() && x.cols() == slice.n(), ErrorCode::DimensionMismatch, "matrix size mismatch");
    const SquareMatrixC d = x - slice.base();
    std::vector<Complex> c;
    for (const auto& b : slice.kernel_basis) c.push_back((b.adjoint() * d).trace());
    return c;
}

namespace {

// Normalized coefficient mismatch for degrees 2..n as a real vector (re, im interleaved).
Eigen::VectorXd coefficient_residual(const SquareMatrixC& y, const VectorC& target, double rho) {
    const VectorC a = charpoly(y);
    const auto n = a.size() - 1;
    Eigen::VectorXd r(2 * (n - 1));
    double scale = rho;
    for (Eigen::Index j = 2; j <= n; ++j) {
        scale *= rho;
        const Complex d = (a(j) - target(j)) / scale;
        r(2 * (j - 2)) = d.real();
        r(2 * (j - 2) + 1) = d.imag();
    }
    return r;
}

} // namespace

double fibre_residual(const SquareMatrixC& y, const PointConfig& target, int N) {
    require(y.rows() == static_cast<Eigen::Index>(target.size()) * N, ErrorCode::DimensionMismatch,
            "matrix dimension must be kN");
    const Eigen::VectorXd r = coefficient_residual(y, stratum_charpoly(target, N), coefficient_scale(target, N));
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

FibreSolveResult fibre_solve(const SlodowySlice& slice, const PointConfig& target, int k, int N,
                             const std::vector<Complex>& seed_coords, const FibreSolveOptions& opts) {
    require(static_cast<int>(target.size()) == k, ErrorCode::DimensionMismatch, "target must have k points");
    require(slice.n() == k * N, ErrorCode::DimensionMismatch, "slice must live in sl(kN)");
    require(static_cast<int>(seed_coords.size()) == slice.dim(), ErrorCode::DimensionMismatch,
            "seed length must equal the slice dimension");
    require(stratum_separation(target, N) > kSeparationTol, ErrorCode::StratumViolation,
            "target points are not in Conf_k with distinct thick and thin values");

    const VectorC tc = stratum_charpoly(target, N);
    const double rho = coefficient_scale(target, N);
    const auto d = static_cast<Eigen::Index>(slice.dim());
    Eigen::VectorXd x(2 * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        x(2 * i) = seed_coords[static_cast<std::size_t>(i)].real();
        x(2 * i + 1) = seed_coords[static_cast<std::size_t>(i)].imag();
    }
    auto embed = [&](const Eigen::VectorXd& v) {
        SquareMatrixC y = slice.base();
        for (Eigen::Index i = 0; i < d; ++i)
            y += Complex(v(2 * i), v(2 * i + 1)) * slice.kernel_basis[static_cast<std::size_t>(i)];
        return y;
    };
    auto residual = [&](const Eigen::VectorXd& v) { return coefficient_residual(embed(v), tc, rho); };

    Eigen::VectorXd r = residual(x);
    int iter = 0;
    auto rmax = [](const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
    // Past tol, keep polishing while the residual still shrinks: a repeated thick eigenvalue
    // inside a Jordan block splits like the square root of the coefficient error.
    int polish = 0;
    const bool already_converged = rmax(r) < opts.tol;
    while (!already_converged && (rmax(r) >= opts.tol || polish < 4)) {
        if (rmax(r) < opts.tol) ++polish;
        if (iter >= opts.max_iter) {
            if (rmax(r) < opts.tol) break;
            fail(ErrorCode::NewtonDiverged, "fibre Newton stalled at residual " + std::to_string(rmax(r)));
        }
        Eigen::MatrixXd jac(r.size(), x.size());
        for (Eigen::Index i = 0; i < d; ++i) {
            const double h = 1e-6 * (1.0 + std::hypot(x(2 * i), x(2 * i + 1)));
            for (int part = 0; part < 2; ++part) {
                Eigen::VectorXd xp = x, xm = x;
                xp(2 * i + part) += h;
                xm(2 * i + part) -= h;
                jac.col(2 * i + part) = (residual(xp) - residual(xm)) / (2.0 * h);
            }
        }
        const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-r);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
            const Eigen::VectorXd xn = x + alpha * step;
            const Eigen::VectorXd rn = residual(xn);
            if (rn.allFinite() && rn.norm() < r.norm()) {
                x = xn;
                r = rn;
                accepted = true;
                break;
            }
        }
        ++iter;
        if (!accepted && rmax(r) < opts.tol) break;
        if (!accepted)
            fail(ErrorCode::NewtonDiverged, "fibre Newton could not reduce residual " + std::to_string(rmax(r)));
    }

    FibreSolveResult out;
    out.matrix = embed(x);
    out.residual = rmax(r);
    out.iterations = iter;
    for (Eigen::Index i = 0; i < d; ++i) out.coords.emplace_back(x(2 * i), x(2 * i + 1));
    require(in_stratum(out.matrix, k, N, opts.cluster_tol), ErrorCode::StratumViolation,
            "converged point is outside the thick/thin stratum");
    return out;
}

} // namespace khg
