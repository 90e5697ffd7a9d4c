#include "khg/kernels.hpp"

#include <cmath>

#include "khg/lie_core.hpp"

namespace khg {

StencilOperator::StencilOperator(std::vector<Axis> axes, std::vector<AxisRole> roles)
    : axes_(std::move(axes)), roles_(std::move(roles)) {
    require(axes_.size() == roles_.size() && !axes_.empty(), ErrorCode::DimensionMismatch, "one role per axis");
    const GridField layout(axes_);
    shape_ = layout.shape();
    strides_ = layout.strides();
    nodes_ = layout.size();
    unknown_.assign(nodes_, -1);
    for (std::size_t k = 0; k < nodes_; ++k)
        if (!layout.is_boundary(k)) {
            unknown_[k] = static_cast<std::ptrdiff_t>(interior_.size());
            interior_.push_back(k);
        }
    d1_.resize(axes_.size());
    d2_.resize(axes_.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const auto& ax = axes_[a];
        if (roles_[a] == AxisRole::Radial)
            require(!ax.periodic && ax.x.front() > 0.0, ErrorCode::DomainTouchesSingularity,
                    "radial axis must stay away from r = 0");
        d1_[a].resize(ax.size());
        d2_[a].resize(ax.size());
        for (std::size_t i = 0; i < ax.size(); ++i) {
            if (!ax.periodic && (i == 0 || i + 1 == ax.size())) continue;
            d1_[a][i] = ax.d1(i);
            d2_[a][i] = ax.d2(i);
        }
    }
}

std::size_t StencilOperator::neighbour(std::size_t flat, std::size_t a, int dir) const {
    const std::size_t n = shape_[a];
    const std::size_t i = (flat / strides_[a]) % n;
    std::size_t j;
    if (dir > 0)
        j = i + 1 == n ? 0 : i + 1;
    else
        j = i == 0 ? n - 1 : i - 1;
    return flat + j * strides_[a] - i * strides_[a];
}

double StencilOperator::lateral_radius(std::size_t flat) const {
    double r2 = 0.0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const double x = axes_[a].x[(flat / strides_[a]) % shape_[a]];
        if (roles_[a] == AxisRole::Radial) return x;
        if (roles_[a] == AxisRole::X) r2 += x * x;
    }
    return std::sqrt(r2);
}

StencilOperator::Row StencilOperator::row(std::size_t flat) const {
    Row r;
    r.centre = flat;
    r.cols.push_back(flat);
    r.w.push_back(0.0);
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const std::size_t i = (flat / strides_[a]) % shape_[a];
        Stencil3 s = d2_[a][i];
        if (roles_[a] == AxisRole::Radial) {
            const Stencil3& g = d1_[a][i];
            const double inv_r = 1.0 / axes_[a].x[i];
            s.m += g.m * inv_r;
            s.c += g.c * inv_r;
            s.p += g.p * inv_r;
        }
        r.w[0] += s.c;
        r.cols.push_back(neighbour(flat, a, -1));
        r.w.push_back(s.m);
        r.cols.push_back(neighbour(flat, a, +1));
        r.w.push_back(s.p);
    }
    return r;
}

namespace {

// Inline version of row() without allocation, used by the hot loops.
template <class F>
inline void for_each_weight(const StencilOperator& op, const std::vector<std::vector<Stencil3>>& d1,
                            const std::vector<std::vector<Stencil3>>& d2, std::size_t flat, F&& f) {
    double centre = 0.0;
    const auto& strides = op.strides();
    const auto& shape = op.shape();
    for (std::size_t a = 0; a < shape.size(); ++a) {
        const std::size_t i = (flat / strides[a]) % shape[a];
        Stencil3 s = d2[a][i];
        if (op.roles()[a] == AxisRole::Radial) {
            const Stencil3& g = d1[a][i];
            const double inv_r = 1.0 / op.axes()[a].x[i];
            s.m += g.m * inv_r;
            s.c += g.c * inv_r;
            s.p += g.p * inv_r;
        }
        centre += s.c;
        f(op.neighbour(flat, a, -1), s.m);
        f(op.neighbour(flat, a, +1), s.p);
    }
    f(flat, centre);
}

} // namespace

void StencilOperator::apply(const double* psi, double* out, ExecPolicy policy) const {
    const auto n = static_cast<std::ptrdiff_t>(interior_.size());
    for (std::size_t k = 0; k < nodes_; ++k)
        if (unknown_[k] < 0) out[k] = 0.0;
    auto body = [&](std::ptrdiff_t u) {
        const std::size_t flat = interior_[static_cast<std::size_t>(u)];
        double acc = 0.0;
        for_each_weight(*this, d1_, d2_, flat, [&](std::size_t col, double w) { acc += w * psi[col]; });
        out[flat] = acc;
    };
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    } else {
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    }
}

Eigen::SparseMatrix<double> StencilOperator::assemble(const double* potential, ExecPolicy policy) const {
    const std::size_t per_row = 1 + 2 * axes_.size();
    const auto n = static_cast<std::ptrdiff_t>(interior_.size());
    std::vector<Eigen::Triplet<double>> trip(interior_.size() * per_row, Eigen::Triplet<double>(0, 0, 0.0));
    std::vector<char> keep(trip.size(), 0);
    auto body = [&](std::ptrdiff_t u) {
        const std::size_t flat = interior_[static_cast<std::size_t>(u)];
        std::size_t slot = static_cast<std::size_t>(u) * per_row;
        for_each_weight(*this, d1_, d2_, flat, [&](std::size_t col, double w) {
            const std::ptrdiff_t c = unknown_[col];
            if (col == flat && potential) w -= potential[flat];
            if (c >= 0) {
                trip[slot] = Eigen::Triplet<double>(static_cast<int>(u), static_cast<int>(c), w);
                keep[slot] = 1;
            }
            ++slot;
        });
    };
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    } else {
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    }
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(trip.size());
    for (std::size_t k = 0; k < trip.size(); ++k)
        if (keep[k]) kept.push_back(trip[k]);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(kept.begin(), kept.end());
    m.makeCompressed();
    return m;
}

void ebe_residual_kernel(const StencilOperator& op, const double* psi, const double* weight, double* out,
                         ExecPolicy policy) {
    op.apply(psi, out, policy);
    const auto n = static_cast<std::ptrdiff_t>(op.unknowns());
    auto body = [&](std::ptrdiff_t u) {
        const std::size_t flat = op.node_of(static_cast<std::size_t>(u));
        out[flat] -= weight[flat] * std::exp(2.0 * psi[flat]);
    };
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    } else {
        for (std::ptrdiff_t u = 0; u < n; ++u) body(u);
    }
}

namespace {

struct PartitionTerm {
    std::vector<std::pair<int, int>> factors;  // (part, multiplicity)
    double coefficient = 1.0;                  // prod 1/nu!
};

std::vector<PartitionTerm> partition_terms(int n) {
    std::vector<PartitionTerm> terms;
    for (const auto& pi : partitions_of(n)) {
        if (pi.length() == 1) continue;
        PartitionTerm t;
        const auto& parts = pi.parts();
        for (std::size_t i = 0; i < parts.size();) {
            std::size_t j = i;
            while (j < parts.size() && parts[j] == parts[i]) ++j;
            const int nu = static_cast<int>(j - i);
            t.factors.emplace_back(parts[i], nu);
            for (int f = 2; f <= nu; ++f) t.coefficient /= f;
            i = j;
        }
        terms.push_back(std::move(t));
    }
    return terms;
}

} // namespace

void partition_sum_kernel(int n, const std::vector<const double*>& lower, std::size_t count, double factor,
                          double* out, ExecPolicy policy) {
    require(n >= 1, ErrorCode::DomainError, "partition sum needs n >= 1");
    require(static_cast<int>(lower.size()) >= n, ErrorCode::LengthMismatch, "need psi^(0..n-1)");
    const auto terms = partition_terms(n);
    const auto total = static_cast<std::ptrdiff_t>(count);
    auto body = [&](std::ptrdiff_t k) {
        double acc = 0.0;
        for (const auto& t : terms) {
            double prod = t.coefficient;
            for (const auto& [part, nu] : t.factors) {
                const double v = factor * lower[static_cast<std::size_t>(part)][k];
                for (int e = 0; e < nu; ++e) prod *= v;
            }
            acc += prod;
        }
        out[k] = acc;
    };
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < total; ++k) body(k);
    } else {
        for (std::ptrdiff_t k = 0; k < total; ++k) body(k);
    }
}

} // namespace khg
