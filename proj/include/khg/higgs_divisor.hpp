#pragma once

// Effective divisor of a polynomial Higgs field on C with a chosen line.
//
// phi acts on the line through row vectors, v -> v phi. With E_i^+ = e_{i,i+1} this
// sends e_i to e_{i+1}, so the knot model sum z^{lambda_i} E_i^+ with line e_1 is cyclic.

#include <limits>
#include <vector>

#include "khg/errors.hpp"
#include "khg/lie_core.hpp"

namespace khg {

/// Polynomial in z, coefficients by increasing degree, trailing zeros trimmed.
struct Polynomial {
    std::vector<Complex> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> c);
    static Polynomial monomial(Complex a, int degree);

    bool is_zero() const noexcept { return coeffs.empty(); }
    int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
    Complex operator()(Complex z) const;
    double max_abs() const;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(Complex s, const Polynomial& a);

/// Coefficients of p(z + c).
Polynomial taylor_shift(const Polynomial& p, Complex c);

/// Order of vanishing at c: leading Taylor coefficients below rel_tol * max |coefficient|.
int vanishing_order(const Polynomial& p, Complex c, double rel_tol = 1e-8);

/// Roots via companion-matrix eigenvalues (unclustered).
std::vector<Complex> polynomial_roots(const Polynomial& p);

class PolyMatrix {
public:
    explicit PolyMatrix(int n);
    /// Constant matrix.
    static PolyMatrix constant(const SquareMatrixC& m);

    int dim() const noexcept { return n_; }
    int max_degree() const;
    Polynomial& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i * n_ + j)]; }
    const Polynomial& operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i * n_ + j)]; }

    /// Adds coefficient * z^degree * m.
    void add_term(const SquareMatrixC& m, int degree, Complex coefficient = 1.0);
    SquareMatrixC evaluate(Complex z) const;
    /// phi(z - c): every point of the divisor moves by +c.
    PolyMatrix translated(Complex c) const;

private:
    int n_;
    std::vector<Polynomial> entries_;
};

/// phi = sum_i z^{lambda_i} E_i^+.
PolyMatrix knot_higgs_field(const std::vector<int>& lambda);

inline constexpr int kInfiniteOrder = std::numeric_limits<int>::max();

struct DivisorPoint {
    Complex p;
    std::vector<int> lambda;
    std::vector<int> orders;  // ord_p f_1 .. ord_p f_{N-1}
};

struct DivisorData {
    std::vector<DivisorPoint> points;
    bool effective = true;
};

struct DivisorOptions {
    double order_tol = 1e-8;
    /// A root of multiplicity m splits like eps^{1/m} under companion eigenvalues, so split
    /// roots are grouped by checking the multiplicity at their centroid to this tolerance,
    double multiplicity_tol = 1e-10;
    /// within this radius relative to max(1, |p|).
    double root_group_radius = 0.1;
};

/// The minors of [v | v phi | ... | v phi^i], stacked as rows.
std::vector<Polynomial> wedge_minors(const PolyMatrix& phi, const VectorC& line, int i);

/// ord_p f_i, or kInfiniteOrder when f_i vanishes identically.
int wedge_order(const PolyMatrix& phi, const VectorC& line, int i, Complex p, double rel_tol = 1e-8);

/// Throws IdenticallyZeroWedge when the line is not cyclic.
DivisorData divisor_of(const PolyMatrix& phi, const VectorC& line, const DivisorOptions& opts = {});

/// lambda_i = o_i - 2 o_{i-1} + o_{i-2} with o_0 = o_{-1} = 0.
std::vector<int> lambda_from_orders(const std::vector<int>& orders);

} // namespace khg
