#pragma once

// Braid words, strand trajectories and crossingless matchings.

#include <functional>
#include <string>
#include <vector>

#include "khg/adjoint_quotient.hpp"

namespace khg {

inline constexpr double kMergeTol = 1e-6;

struct BraidLetter {
    int index = 1;  // generator s_i, 1 <= i < k
    int sign = 1;   // +1 counterclockwise half-twist, -1 clockwise

    bool operator==(const BraidLetter&) const = default;
};

struct BraidWord {
    int strands = 1;
    std::vector<BraidLetter> letters;

    /// "k=3; s1 s2^-1 s1". InvalidBraid on malformed text or out-of-range generators.
    static BraidWord parse(const std::string& text);
    std::string to_string() const;
    void validate() const;
    /// perm[slot] = slot reached after the word by the strand that starts in `slot`.
    std::vector<int> permutation() const;
    bool is_pure() const;
    bool empty() const noexcept { return letters.empty(); }
    BraidWord inverse() const;
};

BraidWord operator*(const BraidWord& a, const BraidWord& b);

/// beta x id on 2k strands: letters act on strands 1..k, strands k+1..2k stay put.
BraidWord bipartite_extend(const BraidWord& word);

/// Labelled strand trajectories over t in [0, 1]. Labels are strands, not slots: point a of
/// every configuration is the same strand throughout.
struct StrandPaths {
    std::vector<double> t;
    std::vector<PointConfig> z;
    std::vector<std::vector<Complex>> zdot;
    double min_separation = 0.0;
    /// Exact evaluator (configuration and velocity at t), when the paths have a closed form.
    std::function<void(double, std::vector<Complex>&, std::vector<Complex>&)> exact;

    std::size_t strands() const { return z.empty() ? 0 : z.front().size(); }
    std::size_t samples() const { return t.size(); }
    const PointConfig& start() const { return z.front(); }
    const PointConfig& end() const { return z.back(); }
    /// Exact value when available, cubic Hermite interpolation of the samples otherwise.
    void eval(double time, std::vector<Complex>& pos, std::vector<Complex>& vel) const;
    PointConfig at(double time) const;

    static StrandPaths constant(const PointConfig& base, std::size_t samples = 2);
    /// Sampled from an exact evaluator on a uniform grid of `samples` points.
    static StrandPaths from_function(std::function<void(double, std::vector<Complex>&, std::vector<Complex>&)> f,
                                     std::size_t samples);
    /// t -> 1 - t.
    StrandPaths reversed() const;
    /// Runs this path on [0, 1/2] and `next` on [1/2, 1]; next must start where this ends.
    StrandPaths then(const StrandPaths& next) const;
};

/// Half-twist realisation: letter s_i^{+-1} rotates the strands in slots i, i+1 by pi about
/// their midpoint (counterclockwise for +1), each letter taking an equal share of [0, 1].
/// CollisionDetected if the paths come closer than tau_sep.
StrandPaths braid_to_paths(const BraidWord& word, const PointConfig& base, int steps_per_letter = 32,
                           double tau_sep = kSeparationTol);

/// Semicircle from p to q; side +1 bulges to the left of p -> q.
struct Arc {
    std::size_t first = 0, second = 0;  // indices of the matched points
    Complex p, q;
    int side = 1;

    Complex at(double s) const;
    Complex velocity(double s) const;
    double radius() const { return 0.5 * std::abs(q - p); }
    Complex midpoint() const { return at(0.5); }
};

struct CrossinglessMatching {
    std::vector<Arc> arcs;
    std::size_t points = 0;

    /// ArcsNotDisjoint when two arcs share a point, cross, or come closer than tau at dense
    /// sampling; DomainError when an arc does not start and end at the declared points of `config`.
    void validate(const PointConfig& config, double tau = kSeparationTol) const;
};

/// Nested semicircles pairing point i with point 2k-1-i (0-based).
CrossinglessMatching standard_matching(const PointConfig& points);

/// Matching with explicit pairs (0-based point indices), semicircles bulging to `side`.
CrossinglessMatching matching_from_pairs(const PointConfig& points, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                         int side = 1);

struct EntranceStage {
    std::size_t arc = 0;                 // index into the matching
    std::vector<std::size_t> labels;     // original point indices of the configuration below
    std::size_t pair_first = 0, pair_second = 0;  // positions of the merging points in `labels`
    StrandPaths path;                    // until the pair is closer than tau_merge
    double merge_time = 1.0;
    Complex merge_point;
};

/// Entrance path of a matching: arcs in order of increasing radius (inner arcs first); for each
/// p(t) = delta(t/2), q(t) = delta(1 - t/2) until |p - q| < tau_merge, then the pair is dropped.
std::vector<EntranceStage> matching_entrance_path(const CrossinglessMatching& m, const PointConfig& config,
                                                  int samples_per_arc = 64, double tau_merge = kMergeTol);

} // namespace khg
