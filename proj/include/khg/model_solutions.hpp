#pragma once

// Closed-form SU(2) Nahm pole and monopole profiles, and finite-difference residuals
// of the moment-map equation  psi_rr + psi_r / r + psi_yy = kappa r^{2 lambda} e^{2 psi}.

#include <complex>
#include <vector>

#include "khg/grid.hpp"

namespace khg {

/// Hemispherical coordinates on C x R+_y; alpha is the polar angle from the y axis.
struct SphericalPoint {
    double R = 1.0;
    double alpha = 0.0;
    double theta = 0.0;

    double r() const;
    double y() const;
    /// Boundary defining function cos(alpha) = y / R.
    double s() const;

    static SphericalPoint from_cylindrical(double r, double y, double theta = 0.0);
};

struct ModelParams {
    double lambda = 0.0;  // non-negative half-integer
    double kappa = 1.0;

    /// DomainError unless 2 lambda is a non-negative integer and kappa > 0.
    void validate() const;
};

/// ((1+s)^{lambda+1} - (1-s)^{lambda+1}) / (2s), with value lambda+1 at s = 0.
double s_lambda(double s, double lambda);

/// log((lambda+1) / (R^{lambda+1} s s_lambda(s))).
double psi_knot_model(const SphericalPoint& p, const ModelParams& params);
double psi_knot_model(double r, double y, const ModelParams& params);

/// Coefficients of H (A_theta, phi_1) and of E (varphi) in the monopole configuration.
struct MonopoleFields {
    double A_theta = 0.0;
    double phi1 = 0.0;
    std::complex<double> varphi;
};
MonopoleFields monopole_fields(const SphericalPoint& p, const ModelParams& params);

/// kappa for which psi = -log y solves psi_yy = kappa e^{2 psi}, fitted from the analytic
/// derivatives on a set of sample heights. Equals 1.
double calibrate_kappa();

/// psi_yy - kappa e^{2 psi} for psi = -log y, with analytic derivatives.
std::vector<double> nahm_residual_1d(const std::vector<double>& y, double kappa);

/// kappa estimated from the monopole closed form at (r, y): the Richardson-extrapolated
/// Laplacian divided by r^{2 lambda} e^{2 psi}. Should equal calibrate_kappa().
double monopole_kappa_estimate(double r, double y, double lambda);

/// Residual of psi_knot_model on every node of a 2D (r, y) domain. The Laplacian is a
/// Cartesian 7-point stencil at (x2, x3, y) = (r, 0, y) with step equal to the local axis
/// spacing; off-grid values come from the closed form. Values of the domain are ignored.
GridField ebe_residual(const ModelParams& params, const GridField& domain);

} // namespace khg
