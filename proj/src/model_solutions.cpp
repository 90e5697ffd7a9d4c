#include "khg/model_solutions.hpp"

#include <cmath>

namespace khg {

double SphericalPoint::r() const { return R * std::sin(alpha); }
double SphericalPoint::y() const { return R * s(); }
// cos(pi/2) rounds to 6e-17; the boundary must stay exactly singular.
double SphericalPoint::s() const { return alpha >= 0.5 * M_PI ? 0.0 : std::cos(alpha); }

SphericalPoint SphericalPoint::from_cylindrical(double r, double y, double theta) {
    require(r >= 0.0 && y >= 0.0, ErrorCode::DomainError, "cylindrical point needs r >= 0 and y >= 0");
    return {std::hypot(r, y), std::atan2(r, y), theta};
}

void ModelParams::validate() const {
    const double twice = 2.0 * lambda;
    require(lambda >= 0.0 && std::abs(twice - std::round(twice)) < 1e-12, ErrorCode::DomainError,
            "lambda must be a non-negative half-integer");
    require(kappa > 0.0, ErrorCode::DomainError, "kappa must be positive");
}

namespace {

// ((1+s)^p - (1-s)^p) / (2s) for s in [0, 1], p >= 0.
double half_difference(double s, double p) {
    if (p == 0.0) return 0.0;
    if (s == 0.0) return p;
    if (s > 0.5) return (std::pow(1.0 + s, p) - std::pow(1.0 - s, p)) / (2.0 * s);
    // (1 +- s)^p = e^{p m} e^{+-p atanh s}, m = log(1 - s^2) / 2
    const double m = 0.5 * std::log1p(-s * s);
    return std::exp(p * m) * std::sinh(p * std::atanh(s)) / s;
}

double half_sum(double s, double p) { return 0.5 * (std::pow(1.0 + s, p) + std::pow(1.0 - s, p)); }

} // namespace

double s_lambda(double s, double lambda) {
    require(s >= 0.0 && s <= 1.0, ErrorCode::DomainError, "s must lie in [0, 1]");
    return half_difference(s, lambda + 1.0);
}

double psi_knot_model(const SphericalPoint& p, const ModelParams& params) {
    const double s = p.s();
    require(p.R > 0.0 && s > 0.0, ErrorCode::DomainError, "closed form is singular at R = 0 and on y = 0");
    const double a = params.lambda + 1.0;
    return std::log(a) - a * std::log(p.R) - std::log(s) - std::log(s_lambda(s, params.lambda));
}

double psi_knot_model(double r, double y, const ModelParams& params) {
    require(y > 0.0, ErrorCode::DomainError, "closed form is singular on y = 0");
    return psi_knot_model(SphericalPoint::from_cylindrical(r, y), params);
}

MonopoleFields monopole_fields(const SphericalPoint& p, const ModelParams& params) {
    const double c = p.s();
    require(p.R > 0.0, ErrorCode::DomainError, "monopole fields are singular at R = 0");
    require(c > 0.0, ErrorCode::DomainError, "monopole fields are singular on y = 0");
    const double lam = params.lambda, a = lam + 1.0;
    // (1+c)^a - (1-c)^a = 2c D_a, (1+c)^a + (1-c)^a = 2 S_a
    const double da = half_difference(c, a);
    MonopoleFields f;
    f.A_theta = -a * c * c * half_difference(c, lam) / da;
    f.phi1 = -(a / p.R) * half_sum(c, a) / (c * da);
    const double mag = (a / p.R) * std::pow(std::sin(p.alpha), lam) / (2.0 * c * da);
    f.varphi = std::polar(mag, lam * p.theta);
    return f;
}

double calibrate_kappa() {
    // psi = -log y: psi_yy = 1 / y^2, e^{2 psi} = 1 / y^2. Least squares over sample heights.
    double num = 0.0, den = 0.0;
    for (double y : {0.05, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double lhs = 1.0 / (y * y);
        const double e2 = std::exp(-2.0 * std::log(y));
        num += lhs * e2;
        den += e2 * e2;
    }
    return num / den;
}

std::vector<double> nahm_residual_1d(const std::vector<double>& y, double kappa) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] > 0.0, ErrorCode::DomainTouchesSingularity, "Nahm pole residual needs y > 0");
        const double psi = -std::log(y[i]);
        out[i] = 1.0 / (y[i] * y[i]) - kappa * std::exp(2.0 * psi);
    }
    return out;
}

namespace {

// Cartesian 7-point Laplacian of the axisymmetric closed form at (r, 0, y).
double cartesian_laplacian(double r, double y, double hr, double hy, const ModelParams& params) {
    auto psi = [&](double rr, double yy) { return psi_knot_model(rr, yy, params); };
    const double c = psi(r, y);
    const double lx2 = (psi(std::abs(r + hr), y) + psi(std::abs(r - hr), y) - 2.0 * c) / (hr * hr);
    const double lx3 = 2.0 * (psi(std::hypot(r, hr), y) - c) / (hr * hr);
    const double ly = (psi(r, y + hy) + psi(r, y - hy) - 2.0 * c) / (hy * hy);
    return lx2 + lx3 + ly;
}

} // namespace

double monopole_kappa_estimate(double r, double y, double lambda) {
    const ModelParams params{lambda, 1.0};
    const double h = 1e-2 * std::min(r, y);
    const double l1 = cartesian_laplacian(r, y, h, h, params);
    const double l2 = cartesian_laplacian(r, y, 0.5 * h, 0.5 * h, params);
    const double lap = (4.0 * l2 - l1) / 3.0;
    return lap / (std::pow(r, 2.0 * lambda) * std::exp(2.0 * psi_knot_model(r, y, params)));
}

GridField ebe_residual(const ModelParams& params, const GridField& domain) {
    params.validate();
    require(domain.dims() == 2, ErrorCode::DimensionMismatch, "ebe_residual expects an (r, y) domain");
    const Axis& ra = domain.axis(0);
    const Axis& ya = domain.axis(1);
    require(ra.x.front() >= 0.0, ErrorCode::DomainError, "radial axis must be non-negative");
    for (std::size_t j = 0; j < ya.size(); ++j)
        require(ya.x[j] - ya.spacing(j) > 0.0, ErrorCode::DomainTouchesSingularity,
                "stencil reaches the boundary y = 0");
    GridField out(domain.axes());
    const auto nr = static_cast<std::ptrdiff_t>(ra.size());
    const std::size_t ny = ya.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nr; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double r = ra.x[ii], hr = ra.spacing(ii);
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = ya.x[j];
            const double lap = cartesian_laplacian(r, y, hr, ya.spacing(j), params);
            const double w = params.kappa * std::pow(r, 2.0 * params.lambda);
            out[ii * ny + j] = lap - w * std::exp(2.0 * psi_knot_model(r, y, params));
        }
    }
    return out;
}

} // namespace khg
