#include "khg/higgs_divisor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace khg {

Polynomial::Polynomial(std::vector<Complex> c) : coeffs(std::move(c)) {
    while (!coeffs.empty() && coeffs.back() == Complex(0.0)) coeffs.pop_back();
}

Polynomial Polynomial::monomial(Complex a, int degree) {
    std::vector<Complex> c(static_cast<std::size_t>(degree + 1), 0.0);
    c.back() = a;
    return Polynomial(std::move(c));
}

Complex Polynomial::operator()(Complex z) const {
    Complex acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double Polynomial::max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs) m = std::max(m, std::abs(c));
    return m;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
    return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, const Polynomial& a) {
    std::vector<Complex> c = a.coeffs;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex(-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Complex> c(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) c[i + j] += a.coeffs[i] * b.coeffs[j];
    return Polynomial(std::move(c));
}

Polynomial taylor_shift(const Polynomial& p, Complex c) {
    std::vector<Complex> a = p.coeffs;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = n - 1; j-- > i;) a[j] += c * a[j + 1];
    return Polynomial(std::move(a));
}

int vanishing_order(const Polynomial& p, Complex c, double rel_tol) {
    if (p.is_zero()) return kInfiniteOrder;
    const Polynomial q = taylor_shift(p, c);
    const double cut = rel_tol * q.max_abs();
    int order = 0;
    while (order < static_cast<int>(q.coeffs.size()) && std::abs(q.coeffs[static_cast<std::size_t>(order)]) <= cut)
        ++order;
    return order;
}

std::vector<Complex> polynomial_roots(const Polynomial& p) {
    std::vector<Complex> roots;
    if (p.degree() <= 0) return roots;
    std::size_t lead = 0;
    while (p.coeffs[lead] == Complex(0.0)) ++lead;
    roots.assign(lead, 0.0);
    const auto d = static_cast<Eigen::Index>(p.coeffs.size() - 1 - lead);
    if (d == 0) return roots;
    SquareMatrixC companion = SquareMatrixC::Zero(d, d);
    const Complex top = p.coeffs.back();
    for (Eigen::Index i = 0; i < d; ++i) companion(0, i) = -p.coeffs[lead + static_cast<std::size_t>(d - 1 - i)] / top;
    for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<SquareMatrixC> es(companion, false);
    for (Eigen::Index i = 0; i < d; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

PolyMatrix::PolyMatrix(int n) : n_(n), entries_(static_cast<std::size_t>(n * n)) {
    require(n >= 1, ErrorCode::DimensionMismatch, "PolyMatrix needs n >= 1");
}

PolyMatrix PolyMatrix::constant(const SquareMatrixC& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "square matrix expected");
    PolyMatrix out(static_cast<int>(m.rows()));
    out.add_term(m, 0);
    return out;
}

int PolyMatrix::max_degree() const {
    int d = -1;
    for (const auto& p : entries_) d = std::max(d, p.degree());
    return d;
}

void PolyMatrix::add_term(const SquareMatrixC& m, int degree, Complex coefficient) {
    require(m.rows() == n_ && m.cols() == n_, ErrorCode::DimensionMismatch, "term size mismatch");
    require(degree >= 0, ErrorCode::DomainError, "negative degree");
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (m(i, j) != Complex(0.0)) (*this)(i, j) = (*this)(i, j) + Polynomial::monomial(coefficient * m(i, j), degree);
}

SquareMatrixC PolyMatrix::evaluate(Complex z) const {
    SquareMatrixC m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j)(z);
    return m;
}

PolyMatrix PolyMatrix::translated(Complex c) const {
    PolyMatrix out(n_);
    for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = taylor_shift(entries_[k], -c);
    return out;
}

PolyMatrix knot_higgs_field(const std::vector<int>& lambda) {
    const int n = static_cast<int>(lambda.size()) + 1;
    const auto basis = chevalley_basis(n);
    PolyMatrix phi(n);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        require(lambda[i] >= 0, ErrorCode::DomainError, "knot weights must be non-negative");
        phi.add_term(basis.raising[i], lambda[i]);
    }
    return phi;
}

namespace {

Polynomial abs_poly(const Polynomial& p) {
    std::vector<Complex> c;
    for (const auto& x : p.coeffs) c.emplace_back(std::abs(x));
    return Polynomial(std::move(c));
}

// Laplace expansion carrying an entrywise absolute bound alongside, so that
// coefficients lost to cancellation can be reset to exact zeros.
struct Bounded {
    Polynomial value, bound;
};

Bounded determinant(const std::vector<std::vector<Polynomial>>& m, const std::vector<int>& rows,
                    std::vector<bool>& used_cols, std::size_t depth) {
    if (depth == rows.size()) return {Polynomial({1.0}), Polynomial({1.0})};
    Bounded acc;
    int sign = 1;
    for (std::size_t c = 0; c < used_cols.size(); ++c) {
        if (used_cols[c]) continue;
        const Polynomial& entry = m[static_cast<std::size_t>(rows[depth])][c];
        if (!entry.is_zero()) {
            used_cols[c] = true;
            const Bounded sub = determinant(m, rows, used_cols, depth + 1);
            used_cols[c] = false;
            acc.value = acc.value + Complex(sign) * (entry * sub.value);
            acc.bound = acc.bound + abs_poly(entry) * sub.bound;
        }
        sign = -sign;
    }
    return acc;
}

Polynomial clean(const Bounded& b) {
    std::vector<Complex> c = b.value.coeffs;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double bound = j < b.bound.coeffs.size() ? b.bound.coeffs[j].real() : 0.0;
        if (std::abs(c[j]) <= 64.0 * std::numeric_limits<double>::epsilon() * bound) c[j] = 0.0;
    }
    return Polynomial(std::move(c));
}

void combinations(int n, int r, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == r) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        combinations(n, r, i + 1, cur, out);
        cur.pop_back();
    }
}

} // namespace

std::vector<Polynomial> wedge_minors(const PolyMatrix& phi, const VectorC& line, int i) {
    const int n = phi.dim();
    require(line.size() == n, ErrorCode::DimensionMismatch, "line must have N entries");
    require(i >= 1 && i <= n - 1, ErrorCode::DomainError, "wedge index must lie in 1..N-1");
    require(line.norm() > 0.0, ErrorCode::DomainError, "line must be nonzero");

    // rows[k][j] = k-th component of v phi^j.
    std::vector<std::vector<Polynomial>> rows(static_cast<std::size_t>(n), std::vector<Polynomial>(static_cast<std::size_t>(i + 1)));
    std::vector<Polynomial> w(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = Polynomial({line(k)});
    for (int j = 0; j <= i; ++j) {
        for (int k = 0; k < n; ++k) rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(k)];
        if (j == i) break;
        std::vector<Polynomial> next(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) next[static_cast<std::size_t>(k)] = next[static_cast<std::size_t>(k)] + w[static_cast<std::size_t>(l)] * phi(l, k);
        w = std::move(next);
    }

    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    combinations(n, i + 1, 0, cur, subsets);
    std::vector<Polynomial> minors;
    for (const auto& s : subsets) {
        std::vector<bool> used(static_cast<std::size_t>(i + 1), false);
        minors.push_back(clean(determinant(rows, s, used, 0)));
    }
    return minors;
}

int wedge_order(const PolyMatrix& phi, const VectorC& line, int i, Complex p, double rel_tol) {
    int order = kInfiniteOrder;
    for (const auto& m : wedge_minors(phi, line, i)) order = std::min(order, vanishing_order(m, p, rel_tol));
    return order;
}

std::vector<int> lambda_from_orders(const std::vector<int>& orders) {
    std::vector<int> lambda;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const int o1 = i >= 1 ? orders[i - 1] : 0;
        const int o2 = i >= 2 ? orders[i - 2] : 0;
        lambda.push_back(orders[i] - 2 * o1 + o2);
    }
    return lambda;
}

DivisorData divisor_of(const PolyMatrix& phi, const VectorC& line, const DivisorOptions& opts) {
    const int n = phi.dim();
    require(n >= 2, ErrorCode::DimensionMismatch, "divisor needs N >= 2");
    const Polynomial top = wedge_minors(phi, line, n - 1).front();
    require(!top.is_zero(), ErrorCode::IdenticallyZeroWedge, "line is not cyclic for phi");

    // Group split multiple roots: the m nearest roots form one point when top vanishes to
    // order >= m at their centroid, whose error is O(eps) even though each root is off by eps^{1/m}.
    std::vector<Complex> pending = polynomial_roots(top);
    std::vector<Complex> centres;
    while (!pending.empty()) {
        const Complex r0 = pending.front();
        std::stable_sort(pending.begin(), pending.end(), [&](const Complex& a, const Complex& b) {
            return std::abs(a - r0) < std::abs(b - r0);
        });
        std::size_t take = 1;
        for (std::size_t m = pending.size(); m > 1; --m) {
            const Complex c = std::accumulate(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(m), Complex(0.0)) /
                              static_cast<double>(m);
            if (std::abs(pending[m - 1] - c) > opts.root_group_radius * std::max(1.0, std::abs(c))) continue;
            if (vanishing_order(top, c, opts.multiplicity_tol) >= static_cast<int>(m)) {
                take = m;
                break;
            }
        }
        centres.push_back(std::accumulate(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take), Complex(0.0)) /
                          static_cast<double>(take));
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take));
    }

    DivisorData out;
    for (const Complex& p : centres) {
        DivisorPoint pt;
        pt.p = p;
        for (int i = 1; i < n; ++i) pt.orders.push_back(wedge_order(phi, line, i, p, opts.order_tol));
        if (pt.orders.back() == 0) continue;
        pt.lambda = lambda_from_orders(pt.orders);
        for (int l : pt.lambda) out.effective = out.effective && l >= 0;
        out.points.push_back(std::move(pt));
    }
    std::sort(out.points.begin(), out.points.end(), [](const DivisorPoint& a, const DivisorPoint& b) {
        if (a.p.real() != b.p.real()) return a.p.real() < b.p.real();
        return a.p.imag() < b.p.imag();
    });
    return out;
}

} // namespace khg
