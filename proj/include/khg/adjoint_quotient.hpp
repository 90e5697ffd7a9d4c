#pragma once

// Adjoint quotient, the thick/thin stratum of sl(kN) and fibre points inside a Slodowy slice.

#include <optional>
#include <vector>

#include "khg/errors.hpp"
#include "khg/lie_core.hpp"

namespace khg {

inline constexpr double kSeparationTol = 1e-9;
inline constexpr double kClusterTol = 1e-6;
inline constexpr double kFibreTol = 1e-10;

struct PointConfig {
    std::vector<Complex> points;

    PointConfig() = default;
    explicit PointConfig(std::vector<Complex> pts) : points(std::move(pts)) {}

    std::size_t size() const noexcept { return points.size(); }
    const Complex& operator[](std::size_t i) const { return points[i]; }
    /// Minimal pairwise distance; +inf for fewer than two points.
    double separation() const;
    bool distinct(double tau = kSeparationTol) const { return separation() > tau; }
};

/// Minimal distance within {z_a} u {-(N-1) z_a}: the stratum is regular iff this is positive.
double stratum_separation(const PointConfig& d, int N);

struct ThickThinElement {
    SquareMatrixC matrix;
    int k = 0;
    int N = 0;
    PointConfig thick;
};

/// Coefficients a_0..a_n of det(lambda - x) = sum_j a_j lambda^{n-j}, via Hessenberg reduction.
VectorC charpoly(const SquareMatrixC& x);

/// (c_2, ..., c_N) with det(lambda - x) = sum_j lambda^{N-j} (-1)^j c_j.
std::vector<Complex> chi_invariants(const SquareMatrixC& x);

/// Monic coefficients (leading first) of prod_a (lambda - z_a)^{N-1} (lambda + (N-1) z_a).
VectorC stratum_charpoly(const PointConfig& d, int N);

SquareMatrixC d_block(Complex z, int N);
/// D(z_1) + ... + D(z_k) block diagonal.
SquareMatrixC d_sum(const PointConfig& d, int N);

/// Thick eigenvalues. Labels follow `reference` by nearest-neighbour matching when given,
/// otherwise lexicographic (real, imaginary) order. Throws StratumViolation.
PointConfig chi_tilde(const SquareMatrixC& x, int k, int N, const PointConfig* reference = nullptr,
                      double cluster_tol = kClusterTol);
PointConfig chi_tilde(const ThickThinElement& x, double cluster_tol = kClusterTol);

bool in_stratum(const SquareMatrixC& x, int k, int N, double cluster_tol = kClusterTol);

SquareMatrixC slice_embed(const SlodowySlice& slice, const std::vector<Complex>& coords);
std::vector<Complex> slice_project(const SlodowySlice& slice, const SquareMatrixC& x);

/// Largest normalized characteristic-polynomial coefficient mismatch against the stratum target.
double fibre_residual(const SquareMatrixC& y, const PointConfig& target, int N);

struct FibreSolveOptions {
    double tol = kFibreTol;
    int max_iter = 100;
    double cluster_tol = kClusterTol;
};

struct FibreSolveResult {
    SquareMatrixC matrix;
    std::vector<Complex> coords;
    double residual = 0.0;
    int iterations = 0;
};

/// Gauss-Newton on slice coordinates. Throws NewtonDiverged or StratumViolation.
FibreSolveResult fibre_solve(const SlodowySlice& slice, const PointConfig& target, int k, int N,
                             const std::vector<Complex>& seed_coords, const FibreSolveOptions& opts = {});

/// Nearest-neighbour relabelling of `points` to follow `reference` (a permutation of points).
PointConfig match_labels(const PointConfig& points, const PointConfig& reference);

} // namespace khg
