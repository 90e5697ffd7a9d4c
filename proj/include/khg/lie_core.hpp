#pragma once

// Type-A Lie algebra machinery: partitions, nilpotent normal forms,
// sl2-triples and Slodowy slices in sl(n, C).

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace khg {

using Complex = std::complex<double>;
using SquareMatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

/// Integer partition, stored weakly decreasing.
class Partition {
public:
    Partition() = default;
    /// Accepts parts in any order; throws InvalidPartition on an empty list or a part < 1.
    explicit Partition(std::vector<int> parts);
    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    const std::vector<int>& parts() const noexcept { return parts_; }
    int n() const noexcept { return n_; }
    std::size_t length() const noexcept { return parts_.size(); }
    /// i-th part, zero past the end.
    int part(std::size_t i) const noexcept { return i < parts_.size() ? parts_[i] : 0; }

    Partition concat(const Partition& other) const;
    Partition transpose() const;
    std::string to_string() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> parts_;
    int n_ = 0;
};

/// All partitions of n, in reverse lexicographic order ([n] first).
std::vector<Partition> partitions_of(int n);

struct ChevalleyBasis {
    int rank = 0;
    std::vector<SquareMatrixC> cartan;
    std::vector<SquareMatrixC> raising;
    std::vector<SquareMatrixC> lowering;
    Eigen::MatrixXi cartan_matrix;
};

/// Standard matrix realisation: E_i^+ = e_{i,i+1}, E_i^- = e_{i+1,i}, H_i = e_ii - e_{i+1,i+1}.
ChevalleyBasis chevalley_basis(int n);

struct Sl2Triple {
    SquareMatrixC e, h, f;

    /// Largest Frobenius defect among [h,e]-2e, [e,f]-h, [h,f]+2f.
    double residual() const;
    bool is_zero() const { return e.size() == 0 || e.isZero(0.0); }
};

struct SlodowySlice {
    Sl2Triple triple;
    /// Frobenius-orthonormal basis of ker ad_f on traceless matrices.
    std::vector<SquareMatrixC> kernel_basis;

    int dim() const noexcept { return static_cast<int>(kernel_basis.size()); }
    int n() const noexcept { return static_cast<int>(triple.e.rows()); }
    const SquareMatrixC& base() const noexcept { return triple.e; }
};

inline constexpr double kNilpotentTol = 1e-8;
inline constexpr double kRankTol = 1e-10;

SquareMatrixC commutator(const SquareMatrixC& a, const SquareMatrixC& b);

/// Matrix of X -> [x, X] acting on column-major vec(X).
Eigen::MatrixXcd ad_matrix(const SquareMatrixC& x);

/// Orthonormal basis (columns) of the numerical nullspace, singular values below
/// rel_tol * sigma_max counted as zero.
Eigen::MatrixXcd nullspace(const Eigen::MatrixXcd& a, double rel_tol = kRankTol);

/// Dimension of the centraliser of x inside sl(n).
int centraliser_dimension(const SquareMatrixC& x, double rel_tol = kRankTol);

/// Dimensions of ker x, ker x^2, ... computed through the kernel flag without forming powers.
std::vector<int> kernel_flag_dimensions(const SquareMatrixC& x, double rel_tol = kRankTol);

SquareMatrixC jordan_nilpotent(const Partition& pi);

/// Completes a nonzero nilpotent e to an sl2-triple (e, h, f).
/// Throws ZeroNilpotent or NotNilpotent.
Sl2Triple sl2_complete(const SquareMatrixC& e, double rank_tol = kRankTol);

/// Jordan type of a nilpotent matrix; conjugation invariant. Throws NotNilpotent.
Partition orbit_partition(const SquareMatrixC& x, double rank_tol = kRankTol);

/// Dominance order. Throws MismatchedN.
bool dominance_leq(const Partition& pi, const Partition& rho);

/// Jordan type of the knot Ansatz at the origin for weight lambda (length N-1).
Partition weight_to_partition(std::span<const int> lambda);

/// Slice e + ker ad_f. For e == 0 the slice is all of sl(n) with the zero triple.
SlodowySlice slodowy_slice(const SquareMatrixC& e, double rank_tol = kRankTol);

/// True iff every eigenvalue magnitude is below tau * ||x||_F.
bool is_nilpotent(const SquareMatrixC& x, double tau = kNilpotentTol);

/// Canonical Frobenius-orthonormal basis of sl(n): off-diagonal units (row-major), then Cartan.
std::vector<SquareMatrixC> sl_basis(int n);

} // namespace khg
