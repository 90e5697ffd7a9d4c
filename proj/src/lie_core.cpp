#include "khg/lie_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "khg/errors.hpp"

namespace khg {

namespace {

constexpr double kZeroMatrixTol = 1e-14;

Eigen::MatrixXcd nullspace_abs(const Eigen::MatrixXcd& a, double threshold) {
    const auto cols = a.cols();
    if (a.rows() == 0) return Eigen::MatrixXcd::Identity(cols, cols);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > threshold) ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal bases of ker x, ker x^2, ... until the flag stabilises.
std::vector<Eigen::MatrixXcd> kernel_flag(const SquareMatrixC& x, double rel_tol) {
    const auto n = x.rows();
    std::vector<Eigen::MatrixXcd> flag;
    const double scale = x.size() == 0 ? 0.0 : x.operatorNorm();
    if (scale <= kZeroMatrixTol) {
        flag.push_back(Eigen::MatrixXcd::Identity(n, n));
        return flag;
    }
    const double threshold = rel_tol * scale;
    Eigen::MatrixXcd q(n, 0);
    while (true) {
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(n, n) - q * q.adjoint();
        Eigen::MatrixXcd next = nullspace_abs(proj * x, threshold);
        if (next.cols() <= q.cols()) break;
        flag.push_back(next);
        q = next;
        if (q.cols() == n) break;
    }
    return flag;
}

Eigen::MatrixXcd orthonormal_span(const Eigen::MatrixXcd& vectors, double rel_tol) {
    if (vectors.cols() == 0) return vectors;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vectors, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

// Standard sl2 representation of dimension m in the Jordan basis.
void sl2_block(int m, SquareMatrixC& h, SquareMatrixC& f, int offset) {
    for (int i = 0; i < m; ++i) h(offset + i, offset + i) = static_cast<double>(m - 1 - 2 * i);
    for (int i = 1; i < m; ++i) f(offset + i, offset + i - 1) = static_cast<double>(i * (m - i));
}

} // namespace

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    require(!parts_.empty(), ErrorCode::InvalidPartition, "partition must have at least one part");
    for (int p : parts_) require(p >= 1, ErrorCode::InvalidPartition, "parts must be positive");
    std::sort(parts_.begin(), parts_.end(), std::greater<>());
    n_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

Partition Partition::concat(const Partition& other) const {
    std::vector<int> joined = parts_;
    joined.insert(joined.end(), other.parts_.begin(), other.parts_.end());
    return Partition(std::move(joined));
}

Partition Partition::transpose() const {
    std::vector<int> t(static_cast<std::size_t>(parts_.front()), 0);
    for (int p : parts_)
        for (int i = 0; i < p; ++i) ++t[static_cast<std::size_t>(i)];
    return Partition(std::move(t));
}

std::string Partition::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
    os << ']';
    return os.str();
}

std::vector<Partition> partitions_of(int n) {
    std::vector<Partition> out;
    std::vector<int> current;
    std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        if (remaining == 0) {
            out.emplace_back(current);
            return;
        }
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            current.push_back(p);
            rec(remaining - p, p);
            current.pop_back();
        }
    };
    if (n >= 1) rec(n, n);
    return out;
}

ChevalleyBasis chevalley_basis(int n) {
    require(n >= 2, ErrorCode::DimensionMismatch, "sl(n) needs n >= 2");
    ChevalleyBasis b;
    b.rank = n - 1;
    b.cartan_matrix = Eigen::MatrixXi::Zero(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i) {
        SquareMatrixC h = SquareMatrixC::Zero(n, n), ep = SquareMatrixC::Zero(n, n),
                      em = SquareMatrixC::Zero(n, n);
        h(i, i) = 1.0;
        h(i + 1, i + 1) = -1.0;
        ep(i, i + 1) = 1.0;
        em(i + 1, i) = 1.0;
        b.cartan.push_back(h);
        b.raising.push_back(ep);
        b.lowering.push_back(em);
        b.cartan_matrix(i, i) = 2;
        if (i + 1 < n - 1) {
            b.cartan_matrix(i, i + 1) = -1;
            b.cartan_matrix(i + 1, i) = -1;
        }
    }
    return b;
}

double Sl2Triple::residual() const {
    const double r1 = (commutator(h, e) - 2.0 * e).norm();
    const double r2 = (commutator(e, f) - h).norm();
    const double r3 = (commutator(h, f) + 2.0 * f).norm();
    return std::max({r1, r2, r3});
}

SquareMatrixC commutator(const SquareMatrixC& a, const SquareMatrixC& b) { return a * b - b * a; }

Eigen::MatrixXcd ad_matrix(const SquareMatrixC& x) {
    const auto n = x.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n * n, n * n);
    // vec(xX - Xx) = (I (x) x - x^T (x) I) vec(X), column-major.
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l) {
            out.block(j * n, l * n, n, n) += id(j, l) * x;
            out.block(j * n, l * n, n, n) -= x(l, j) * id;
        }
    return out;
}

Eigen::MatrixXcd nullspace(const Eigen::MatrixXcd& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return Eigen::MatrixXcd::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    return nullspace_abs(a, rel_tol * std::max(smax, std::numeric_limits<double>::min()));
}

namespace {

Eigen::MatrixXcd traceless_constraint(const Eigen::MatrixXcd& op, Eigen::Index n) {
    Eigen::MatrixXcd a(op.rows() + 1, op.cols());
    a.topRows(op.rows()) = op;
    a.bottomRows(1).setZero();
    // Scale the trace row like the operator so the relative threshold stays meaningful.
    const double scale = std::max(1.0, op.rows() ? op.operatorNorm() : 1.0);
    for (Eigen::Index i = 0; i < n; ++i) a(op.rows(), i * n + i) = scale;
    return a;
}

} // namespace

int centraliser_dimension(const SquareMatrixC& x, double rel_tol) {
    const auto n = x.rows();
    if (x.norm() <= kZeroMatrixTol) return static_cast<int>(n * n - 1);
    const Eigen::MatrixXcd a = traceless_constraint(ad_matrix(x), n);
    return static_cast<int>(nullspace(a, rel_tol).cols());
}

std::vector<int> kernel_flag_dimensions(const SquareMatrixC& x, double rel_tol) {
    std::vector<int> dims;
    for (const auto& q : kernel_flag(x, rel_tol)) dims.push_back(static_cast<int>(q.cols()));
    return dims;
}

SquareMatrixC jordan_nilpotent(const Partition& pi) {
    const int n = pi.n();
    SquareMatrixC e = SquareMatrixC::Zero(n, n);
    int offset = 0;
    for (int m : pi.parts()) {
        for (int i = 0; i + 1 < m; ++i) e(offset + i, offset + i + 1) = 1.0;
        offset += m;
    }
    return e;
}

namespace {

Partition partition_from_flag(const std::vector<int>& dims) {
    // dims[k-1] = dim ker x^k; the number of blocks of size >= k is dims[k-1] - dims[k-2].
    std::vector<int> at_least;
    int prev = 0;
    for (int d : dims) {
        at_least.push_back(d - prev);
        prev = d;
    }
    std::vector<int> parts;
    for (std::size_t k = 0; k < at_least.size(); ++k) {
        const int next = k + 1 < at_least.size() ? at_least[k + 1] : 0;
        for (int c = 0; c < at_least[k] - next; ++c) parts.push_back(static_cast<int>(k + 1));
    }
    return Partition(std::move(parts));
}

} // namespace

Partition orbit_partition(const SquareMatrixC& x, double rank_tol) {
    require(x.rows() == x.cols() && x.rows() > 0, ErrorCode::DimensionMismatch, "square matrix expected");
    const auto flag = kernel_flag(x, rank_tol);
    std::vector<int> dims;
    for (const auto& q : flag) dims.push_back(static_cast<int>(q.cols()));
    require(!dims.empty() && dims.back() == x.rows(), ErrorCode::NotNilpotent,
            "kernel flag does not exhaust the space");
    return partition_from_flag(dims);
}

Sl2Triple sl2_complete(const SquareMatrixC& e, double rank_tol) {
    require(e.rows() == e.cols() && e.rows() > 0, ErrorCode::DimensionMismatch, "square matrix expected");
    require(e.norm() > kZeroMatrixTol, ErrorCode::ZeroNilpotent, "Jacobson-Morozov needs e != 0");
    const auto n = e.rows();
    const auto flag = kernel_flag(e, rank_tol);
    require(!flag.empty() && flag.back().cols() == n, ErrorCode::NotNilpotent,
            "kernel flag does not exhaust the space");
    std::vector<int> dims;
    for (const auto& q : flag) dims.push_back(static_cast<int>(q.cols()));
    const Partition pi = partition_from_flag(dims);

    // Chain tops, largest blocks first, matching the block order of jordan_nilpotent.
    struct Chain {
        VectorC top;
        int size;
    };
    std::vector<Chain> chains;
    const int depth = static_cast<int>(flag.size());
    for (int s = depth; s >= 1; --s) {
        const int count = static_cast<int>(std::count(pi.parts().begin(), pi.parts().end(), s));
        if (count == 0) continue;
        const Eigen::MatrixXcd& ks = flag[static_cast<std::size_t>(s - 1)];
        std::vector<VectorC> span;
        if (s >= 2) {
            const auto& lower = flag[static_cast<std::size_t>(s - 2)];
            for (Eigen::Index c = 0; c < lower.cols(); ++c) span.emplace_back(lower.col(c));
        }
        for (const auto& ch : chains) {
            VectorC v = ch.top;
            for (int j = 0; j < ch.size - s; ++j) v = e * v;
            span.push_back(v);
        }
        Eigen::MatrixXcd u(n, static_cast<Eigen::Index>(span.size()));
        for (std::size_t c = 0; c < span.size(); ++c) u.col(static_cast<Eigen::Index>(c)) = span[c];
        const Eigen::MatrixXcd basis = orthonormal_span(u, 1e-10);
        const Eigen::MatrixXcd c = ks - basis * (basis.adjoint() * ks);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeFullV);
        for (int i = 0; i < count; ++i) chains.push_back({ks * svd.matrixV().col(i), s});
    }

    SquareMatrixC basis_change(n, n);
    Eigen::Index col = 0;
    for (const auto& ch : chains) {
        std::vector<VectorC> seq(static_cast<std::size_t>(ch.size));
        seq.back() = ch.top;
        for (int j = ch.size - 2; j >= 0; --j) seq[static_cast<std::size_t>(j)] = e * seq[static_cast<std::size_t>(j + 1)];
        for (const auto& v : seq) basis_change.col(col++) = v;
    }

    SquareMatrixC h_j = SquareMatrixC::Zero(n, n), f_j = SquareMatrixC::Zero(n, n);
    int offset = 0;
    for (int m : pi.parts()) {
        sl2_block(m, h_j, f_j, offset);
        offset += m;
    }
    const SquareMatrixC inv = Eigen::PartialPivLU<SquareMatrixC>(basis_change).inverse();
    Sl2Triple t;
    t.e = e;
    t.h = basis_change * h_j * inv;
    t.f = basis_change * f_j * inv;
    return t;
}

bool dominance_leq(const Partition& pi, const Partition& rho) {
    require(pi.n() == rho.n(), ErrorCode::MismatchedN, "partitions of different integers");
    int a = 0, b = 0;
    const std::size_t len = std::max(pi.length(), rho.length());
    for (std::size_t k = 0; k < len; ++k) {
        a += pi.part(k);
        b += rho.part(k);
        if (a > b) return false;
    }
    return true;
}

Partition weight_to_partition(std::span<const int> lambda) {
    std::vector<int> parts;
    int run = 0;
    for (int v : lambda) {
        require(v >= 0, ErrorCode::DomainError, "weights must be non-negative");
        if (v == 0) {
            ++run;
        } else {
            parts.push_back(run + 1);
            run = 0;
        }
    }
    parts.push_back(run + 1);
    return Partition(std::move(parts));
}

std::vector<SquareMatrixC> sl_basis(int n) {
    std::vector<SquareMatrixC> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            SquareMatrixC m = SquareMatrixC::Zero(n, n);
            m(i, j) = 1.0;
            out.push_back(std::move(m));
        }
    for (int k = 1; k < n; ++k) {
        SquareMatrixC m = SquareMatrixC::Zero(n, n);
        for (int i = 0; i < k; ++i) m(i, i) = 1.0;
        m(k, k) = -static_cast<double>(k);
        out.push_back(m / m.norm());
    }
    return out;
}

SlodowySlice slodowy_slice(const SquareMatrixC& e, double rank_tol) {
    require(e.rows() == e.cols() && e.rows() >= 2, ErrorCode::DimensionMismatch, "square matrix, n >= 2");
    const auto n = e.rows();
    SlodowySlice slice;
    if (e.norm() <= kZeroMatrixTol) {
        slice.triple = {SquareMatrixC::Zero(n, n), SquareMatrixC::Zero(n, n), SquareMatrixC::Zero(n, n)};
        slice.kernel_basis = sl_basis(static_cast<int>(n));
        return slice;
    }
    slice.triple = sl2_complete(e, rank_tol);
    const Eigen::MatrixXcd null = nullspace(traceless_constraint(ad_matrix(slice.triple.f), n), rank_tol);

    // Canonical basis: Gram-Schmidt on the projections of the standard sl(n) basis.
    const auto candidates = sl_basis(static_cast<int>(n));
    std::vector<VectorC> accepted;
    for (const auto& cand : candidates) {
        if (static_cast<Eigen::Index>(accepted.size()) == null.cols()) break;
        const Eigen::Map<const VectorC> v(cand.data(), n * n);
        VectorC w = null * (null.adjoint() * v);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : accepted) w -= q * q.dot(w);
        const double norm = w.norm();
        if (norm < 1e-8) continue;
        accepted.push_back(w / norm);
    }
    for (const auto& q : accepted) {
        SquareMatrixC m(n, n);
        std::copy(q.data(), q.data() + n * n, m.data());
        slice.kernel_basis.push_back(std::move(m));
    }
    return slice;
}

bool is_nilpotent(const SquareMatrixC& x, double tau) {
    const double scale = x.norm();
    if (scale == 0.0) return true;
    Eigen::ComplexEigenSolver<SquareMatrixC> es(x, false);
    return es.eigenvalues().cwiseAbs().maxCoeff() < tau * scale;
}

} // namespace khg
