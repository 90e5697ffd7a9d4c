#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "khg/model_solutions.hpp"
#include "test_support.hpp"

using namespace khg;

namespace {

double direct_s_lambda(double s, double lam) {
    return (std::pow(1 + s, lam + 1) - std::pow(1 - s, lam + 1)) / (2 * s);
}

GridField window(std::size_t n, double a = 0.2, double b = 1.0) {
    return GridField({Axis::uniform("r", a, b, n), Axis::uniform("y", a, b, n)});
}

} // namespace

TEST(SphericalPoint, Coordinates) {
    const auto p = SphericalPoint::from_cylindrical(0.6, 0.8, 1.0);
    EXPECT_NEAR(p.R, 1.0, 1e-15);
    EXPECT_NEAR(p.r(), 0.6, 1e-15);
    EXPECT_NEAR(p.y(), 0.8, 1e-15);
    EXPECT_NEAR(p.s(), 0.8, 1e-15);
}

TEST(ModelParams, HalfIntegers) {
    EXPECT_NO_THROW((ModelParams{1.5, 1.0}.validate()));
    EXPECT_KHG_ERROR((ModelParams{0.3, 1.0}.validate()), ErrorCode::DomainError);
    EXPECT_KHG_ERROR((ModelParams{-0.5, 1.0}.validate()), ErrorCode::DomainError);
}

TEST(SLambda, Examples) {
    for (double s : {1e-9, 0.01, 0.3, 0.7, 1.0}) {
        EXPECT_NEAR(s_lambda(s, 0.0), 1.0, 1e-14);
        EXPECT_NEAR(s_lambda(s, 1.0), 2.0, 1e-14);
    }
    for (double lam : {0.0, 0.5, 1.0, 2.5}) EXPECT_EQ(s_lambda(0.0, lam), lam + 1);
}

TEST(SLambda, MatchesDirectFormulaAndLimit) {
    for (double lam : {0.5, 1.5, 2.0, 3.5})
        for (double s : {0.05, 0.2, 0.45, 0.5, 0.55, 0.9}) {
            const double d = direct_s_lambda(s, lam);
            EXPECT_NEAR(s_lambda(s, lam), d, 1e-13 * d) << lam << " " << s;
        }
    // Continuity at 0: the binomial expansion gives (lambda+1)(1 + lambda(lambda-1) s^2 / 6 + ...).
    for (double lam : {0.5, 1.5, 3.0}) {
        const double s = 1e-4;
        EXPECT_NEAR(s_lambda(s, lam), (lam + 1) * (1 + lam * (lam - 1) * s * s / 6), 1e-12);
    }
}

TEST(PsiKnotModel, Examples) {
    for (double r : {0.0, 0.3, 2.0})
        for (double y : {0.1, 1.0, 3.0}) EXPECT_NEAR(psi_knot_model(r, y, {0.0, 1.0}), -std::log(y), 1e-13);
    EXPECT_NEAR(psi_knot_model(SphericalPoint{1.0, 0.0, 0.0}, {1.0, 1.0}), 0.0, 1e-15);
    EXPECT_KHG_ERROR(psi_knot_model(SphericalPoint{0.0, 0.0, 0.0}, {1.0, 1.0}), ErrorCode::DomainError);
    EXPECT_KHG_ERROR(psi_knot_model(SphericalPoint::from_cylindrical(1.0, 0.0), {1.0, 1.0}), ErrorCode::DomainError);
}

TEST(PsiKnotModel, AsymptoticToNahmPoleAwayFromKnot) {
    // At fixed r, psi + log y tends to log((lambda+1) / (R^lambda (lambda+1))) = -lambda log r.
    for (double lam : {0.5, 1.0, 2.0})
        for (double r : {0.5, 1.0, 3.0}) {
            auto gap = [&](double y) { return std::abs(psi_knot_model(r, y, {lam, 1.0}) + std::log(y) + lam * std::log(r)); };
            EXPECT_LT(gap(1e-3), gap(1e-1));
            EXPECT_LT(gap(1e-6), 1e-8);
        }
}

TEST(MonopoleFields, AxisLimit) {
    for (double lam : {0.0, 0.5, 1.0, 2.0}) {
        const auto f = monopole_fields({2.0, 0.0, 0.0}, {lam, 1.0});
        EXPECT_NEAR(f.A_theta, lam == 0.0 ? 0.0 : -(lam + 1) / 2, 1e-14);
        EXPECT_NEAR(f.phi1, -(lam + 1) / 2.0, 1e-14);
        // Half-integer charges approach the axis value like (1 - cos alpha)^{1/2} ~ alpha.
        const auto g = monopole_fields({2.0, 1e-7, 0.0}, {lam, 1.0});
        EXPECT_NEAR(g.A_theta, f.A_theta, 1e-6);
    }
}

TEST(MonopoleFields, ZeroChargeIsNahmPole) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    for (int i = 0; i < 50; ++i) {
        const auto p = SphericalPoint::from_cylindrical(u(rng), u(rng), u(rng));
        const auto f = monopole_fields(p, {0.0, 1.0});
        EXPECT_EQ(f.A_theta, 0.0);
        EXPECT_NEAR(f.phi1, -1.0 / p.y(), 1e-12 / p.y());
        // The displayed varphi coefficient at zero charge is 1/(2y).
        EXPECT_NEAR(std::abs(f.varphi), 0.5 / p.y(), 1e-12 / p.y());
    }
}

TEST(MonopoleFields, ThetaRotationOnlyChangesPhase) {
    for (double lam : {0.5, 1.0, 1.5}) {
        const SphericalPoint p{1.3, 0.6, 0.2};
        const auto f = monopole_fields(p, {lam, 1.0});
        for (double dt : {0.5, 2.0, 2 * M_PI}) {
            const auto g = monopole_fields({p.R, p.alpha, p.theta + dt}, {lam, 1.0});
            EXPECT_NEAR(g.A_theta, f.A_theta, 1e-14);
            EXPECT_NEAR(g.phi1, f.phi1, 1e-14);
            EXPECT_NEAR(std::abs(g.varphi - f.varphi * std::polar(1.0, lam * dt)), 0.0, 1e-13);
        }
        // A full turn multiplies varphi by e^{2 pi i lambda}: winding lambda.
        const auto g = monopole_fields({p.R, p.alpha, p.theta + 2 * M_PI}, {lam, 1.0});
        EXPECT_NEAR(std::arg(g.varphi / f.varphi), std::remainder(2 * M_PI * lam, 2 * M_PI), 1e-12);
    }
    EXPECT_KHG_ERROR(monopole_fields({0.0, 0.3, 0.0}, {1.0, 1.0}), ErrorCode::DomainError);
}

TEST(Calibration, KappaIsOne) {
    EXPECT_NEAR(calibrate_kappa(), 1.0, 1e-15);
    std::vector<double> y;
    for (int i = 0; i <= 40; ++i) y.push_back(0.01 * std::pow(1000.0, i / 40.0));
    for (double v : nahm_residual_1d(y, 1.0)) EXPECT_LE(std::abs(v), 1e-15 * 1e4);
    const auto off = nahm_residual_1d(y, 2.0);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(off[i], -1.0 / (y[i] * y[i]), 1e-9 / (y[i] * y[i]));
}

TEST(Calibration, MonopoleImpliesSameKappa) {
    for (double lam : {0.0, 0.5, 1.0, 1.5, 2.0})
        for (auto [r, y] : {std::pair{0.7, 0.4}, std::pair{0.3, 0.9}, std::pair{1.5, 1.5}})
            EXPECT_NEAR(monopole_kappa_estimate(r, y, lam), calibrate_kappa(), 1e-5) << lam << " " << r << " " << y;
}

TEST(EbeResidual, ZeroChargeTruncationBound) {
    // psi = -log y: the y stencil error is h^2 psi''''/12 + O(h^4) = h^2 / (2 y^4); lateral terms vanish.
    GridField d({Axis::uniform("r", 0.0, 1.0, 11), Axis::uniform("y", 0.1, 1.0, 91)});
    const GridField res = ebe_residual({0.0, 1.0}, d);
    const double h = 0.01;
    for (std::size_t k = 0; k < res.size(); ++k) {
        const double y = res.coords(k)[1];
        const double lead = h * h / (2 * std::pow(y, 4));
        EXPECT_NEAR(res[k], lead, 0.05 * lead);
    }
}

TEST(EbeResidual, SecondOrderConvergence) {
    for (double lam : {0.5, 1.0, 1.5}) {
        double prev = ebe_residual({lam, 1.0}, window(17)).max_abs();
        for (std::size_t n : {33, 65, 129}) {
            const double e = ebe_residual({lam, 1.0}, window(n)).max_abs();
            EXPECT_GE(prev / e, 3.6) << lam << " " << n;
            EXPECT_LE(prev / e, 4.4) << lam << " " << n;
            prev = e;
        }
    }
}

TEST(EbeResidual, WrongKappaDoesNotConverge) {
    const double a = ebe_residual({1.0, 2.0}, window(33)).max_abs();
    const double b = ebe_residual({1.0, 2.0}, window(65)).max_abs();
    EXPECT_GT(b, 0.5 * a);
}

TEST(EbeResidual, SingularDomain) {
    GridField d({Axis::uniform("r", 0.1, 1.0, 5), Axis::uniform("y", 0.0, 1.0, 5)});
    EXPECT_KHG_ERROR(ebe_residual({1.0, 1.0}, d), ErrorCode::DomainTouchesSingularity);
    GridField e({Axis::uniform("r", 0.1, 1.0, 5), Axis::uniform("y", 0.1, 1.0, 10)});
    EXPECT_KHG_ERROR(ebe_residual({1.0, 1.0}, e), ErrorCode::DomainTouchesSingularity);
}
