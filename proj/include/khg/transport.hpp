#pragma once

// Horizontal transport of fibre points of the thick-eigenvalue map inside a Slodowy slice,
// monodromy fixed points, vanishing cycles and Lagrangian intersections.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "khg/adjoint_quotient.hpp"
#include "khg/braids.hpp"

namespace khg {

using Coords = std::vector<Complex>;

struct TransportOptions {
    double step_init = 1e-2;
    double step_min = 1e-10;
    double step_max = 5e-2;
    double tol = 1e-11;  // embedded Runge-Kutta local error, relative to 1 + |c|
    double fibre_tol = kFibreTol;
    std::optional<double> clamp_radius;  // rescaled mode
    double hard_radius = 1e4;            // Diverged beyond this coordinate norm
    int max_steps = 200000;

    void validate() const;
};

struct TransportSample {
    double t = 0.0;
    Coords coords;
};

struct TransportResult {
    SquareMatrixC endpoint;
    Coords coords;
    PointConfig end_config;            // thick eigenvalues of the endpoint, labelled along the path
    std::vector<TransportSample> samples;  // accepted steps, projected
    double max_fibre_drift = 0.0;      // largest pre-projection fibre residual
    double max_fibre_residual = 0.0;   // largest post-projection fibre residual
    bool clamped = false;
    int steps = 0;
    int rejected = 0;
};

/// Minimum-norm slice velocity V (Frobenius metric on slice coordinates) with
/// d(chi~)(V) = beta_dot, keeping the thick/thin pattern. `beta` labels the thick values of Y.
/// SingularJacobian near the stratum boundary.
Coords horizontal_velocity(const SlodowySlice& slice, const Coords& coords, const PointConfig& beta,
                           const Coords& beta_dot, int N);

/// Orthonormal real basis (interleaved re/im coordinates, one column per direction) of the
/// tangent space of the fibre through `coords`.
Eigen::MatrixXd fibre_tangent_basis(const SlodowySlice& slice, const Coords& coords, int N);

/// Newton projection onto the fibre over `target`, seeded at `coords`.
FibreSolveResult project_to_fibre(const SlodowySlice& slice, const Coords& coords, const PointConfig& target,
                                  int N, double tol = kFibreTol);

/// Transport of y0 (slice coordinates in the fibre over paths(t0)) along the paths on [t0, t1].
/// Throws Diverged, SingularJacobian, StepUnderflow.
TransportResult parallel_transport(const SlodowySlice& slice, const Coords& y0, const StrandPaths& paths, int N,
                                   const TransportOptions& opts = {}, double t0 = 0.0, double t1 = 1.0);

struct SamplerOptions {
    int count = 8;
    double radius = 1.0;
    std::uint64_t seed = 1;
};

struct FixedPointOptions {
    TransportOptions transport = [] {
        TransportOptions t;
        t.tol = 1e-10;
        return t;
    }();
    double dedupe_radius = 1e-4;
    double fixed_tol = 1e-8;
    int newton_max_iter = 15;
    double max_newton_step = 1.0;
    double svd_cut = 1e-2;  // relative singular value cut of the Newton solve; fixed sets are continua
    double escape_radius = 10.0;  // Newton iterates stay this close to the fibre centre
    double fd_step = 1e-4;
    double null_tol = 1e-4;  // singular values of (Dh - 1) below this count as fixed directions
};

struct SampleStatus {
    Coords start;
    bool converged = false;
    bool isolated = false;
    int iterations = 0;
    int nullity = 0;
    double residual = 0.0;
    std::string error;  // empty unless the sample failed
};

struct FixedPointReport {
    std::vector<Coords> points;  // isolated fixed points, deduplicated
    std::vector<double> residuals;
    std::vector<Coords> continuum_points;  // fixed points on positive-dimensional fixed sets
    std::vector<double> continuum_residuals;
    std::vector<SampleStatus> samples;
    double dedupe_radius = 1e-4;
    bool continuum_flag = false;

    std::size_t count() const { return points.size(); }
};

/// Sorts by coordinates and keeps points farther than `radius` from every point kept so far.
std::vector<std::size_t> dedupe_points(const std::vector<Coords>& pts, double radius);

/// Slice coordinates of D(z_1) + ... + D(z_k), the centre of the sampling ball.
Coords fibre_centre(const SlodowySlice& slice, const PointConfig& base, int N);

/// Random fibre points: seeds uniform in the coordinate ball around the fibre centre,
/// projected onto the fibre.
/// Failed projections are skipped; the draw sequence only depends on the seed.
/// StratumViolation when the thick and thin values of the base are not all distinct.
std::vector<Coords> sample_fibre(const SlodowySlice& slice, const PointConfig& base, int N, const SamplerOptions& s,
                                 std::vector<std::string>* failures = nullptr);

/// Fixed points of the monodromy of a pure braid on the fibre over `base` in the slice at E_pi.
/// NotPureBraid for non-pure words, NoSamplesConverged if every sample fails.
FixedPointReport monodromy_fixed_points(const BraidWord& word, const PointConfig& base, const Partition& pi, int N,
                                        const SamplerOptions& sampler, const FixedPointOptions& opts = {});

struct VanishingOptions {
    TransportOptions transport;
    double eps_sing = 1e-5;    // transport stops at stage time 1 - eps_sing
    double tau_vanish = 1e-2;  // member if the final distance is below tau_vanish / 10
    int monitor = 16;          // geometric monitor grid towards the merge
};

enum class Verdict { Member, NotMember, Indeterminate };

std::string to_string(Verdict v);

struct VanishingReport {
    Verdict verdict = Verdict::NotMember;
    std::vector<double> s;
    std::vector<double> distance;
    Coords final_coords;
    std::string reason;
};

/// Distance of Y from the semisimple limit D(r) + D(r) of the merging pair, measured on the
/// generalised eigenspaces of the eigenvalues nearest r and -(N-1) r.
double vanishing_distance(const SquareMatrixC& y, Complex r, int N, int pair_points = 2);

/// Naive transport along an entrance stage towards the merge of its pair.
VanishingReport vanishing_cycle_check(const SlodowySlice& slice, const Coords& coords, const EntranceStage& stage,
                                      int N, const VanishingOptions& opts = {});

/// True for members, false otherwise; IndeterminateConvergence when the verdict is undecided.
bool vanishing_cycle_membership(const SlodowySlice& slice, const Coords& coords, const EntranceStage& stage, int N,
                                const VanishingOptions& opts = {});

struct LagrangianOptions {
    VanishingOptions vanishing;
    std::uint64_t seed = 1;
};

struct LagrangianSample {
    std::vector<Coords> points;
    int attempted = 0;
    int accepted = 0;
};

/// Point cloud on the vanishing cycle of a one-arc matching: unitary seeds near the singular
/// limit, transported back to the base fibre and kept when they pass the membership test.
/// InsufficientSeeds if fewer than count / 10 survive.
LagrangianSample lagrangian_sample(const CrossinglessMatching& m, const PointConfig& base, const Partition& pi, int N,
                                   int count, const LagrangianOptions& opts = {});

/// Transports every point; points whose transport fails are dropped.
std::vector<Coords> transport_cloud(const SlodowySlice& slice, const std::vector<Coords>& cloud,
                                    const StrandPaths& paths, int N, const TransportOptions& opts = {});

struct GeneratorOptions {
    double capture_radius = 0.25;
    int neighbours = 24;        // local tangent fit
    double tangent_tol = 1e-3;  // relative singular value cut for the local tangent dimension
    double match_tol = 1e-6;    // residual of the refined intersection
    double dedupe_radius = 1e-4;
};

/// Near-coincident pairs of the two clouds refined to intersections of their local tangent
/// planes. Non-transverse intersections set continuum_flag instead of being counted.
FixedPointReport intersection_generators(const std::vector<Coords>& minus, const std::vector<Coords>& plus,
                                         const GeneratorOptions& opts = {});

/// Largest-first singular values of the centred cloud (real coordinates).
std::vector<double> cloud_singular_values(const std::vector<Coords>& cloud);

/// Symmetric Hausdorff distance between two clouds.
double hausdorff_distance(const std::vector<Coords>& a, const std::vector<Coords>& b);

} // namespace khg
