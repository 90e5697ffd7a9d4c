#include <cmath>

#include <gtest/gtest.h>

#include "khg/braids.hpp"
#include "test_support.hpp"

using namespace khg;

namespace {

PointConfig line(std::initializer_list<double> xs) {
    std::vector<Complex> p;
    for (double x : xs) p.emplace_back(x, 0.0);
    return PointConfig(p);
}

// Total change of arg(z_b - z_a) along the sampled paths.
double relative_winding(const StrandPaths& s, std::size_t a, std::size_t b, int samples = 4001) {
    double total = 0.0;
    Complex prev = s.at(0.0)[b] - s.at(0.0)[a];
    for (int i = 1; i < samples; ++i) {
        const auto c = s.at(static_cast<double>(i) / (samples - 1));
        const Complex d = c[b] - c[a];
        total += std::arg(d / prev);
        prev = d;
    }
    return total;
}

} // namespace

TEST(BraidWord, ParsesAndPrints) {
    const auto w = BraidWord::parse("k=3; s1 s2^-1 s1");
    EXPECT_EQ(w.strands, 3);
    ASSERT_EQ(w.letters.size(), 3u);
    EXPECT_EQ(w.letters[1], (BraidLetter{2, -1}));
    EXPECT_EQ(w.to_string(), "k=3; s1 s2^-1 s1");
    EXPECT_EQ(BraidWord::parse(w.to_string()).letters, w.letters);
    EXPECT_TRUE(BraidWord::parse("k=2;").empty());
    EXPECT_TRUE(BraidWord::parse("k=4").empty());
}

TEST(BraidWord, RejectsMalformedWords) {
    EXPECT_KHG_ERROR(BraidWord::parse("s1 s2"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=2; s2"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=3; s0"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=3; s1^2"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=3; t1"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=x; s1"), ErrorCode::InvalidBraid);
    EXPECT_KHG_ERROR(BraidWord::parse("k=0;"), ErrorCode::InvalidBraid);
}

TEST(BraidWord, PermutationAndPurity) {
    EXPECT_EQ(BraidWord::parse("k=3; s1").permutation(), (std::vector<int>{1, 0, 2}));
    EXPECT_EQ(BraidWord::parse("k=3; s1 s2").permutation(), (std::vector<int>{2, 0, 1}));
    EXPECT_TRUE(BraidWord::parse("k=2; s1 s1").is_pure());
    EXPECT_TRUE(BraidWord::parse("k=3; s1 s2 s1 s2 s1 s2").is_pure());
    EXPECT_FALSE(BraidWord::parse("k=3; s1 s2").is_pure());
    EXPECT_TRUE(BraidWord::parse("k=3;").is_pure());
}

TEST(BraidWord, InverseAndProduct) {
    const auto w = BraidWord::parse("k=3; s1 s2^-1");
    EXPECT_EQ(w.inverse().to_string(), "k=3; s2 s1^-1");
    EXPECT_EQ((w * w.inverse()).letters.size(), 4u);
    EXPECT_TRUE((w * w.inverse()).is_pure());
    EXPECT_KHG_ERROR(w * BraidWord::parse("k=2; s1"), ErrorCode::InvalidBraid);
}

TEST(BraidWord, BipartiteExtensionLeavesSecondHalfAlone) {
    const auto w = bipartite_extend(BraidWord::parse("k=2; s1"));
    EXPECT_EQ(w.strands, 4);
    EXPECT_EQ(w.permutation(), (std::vector<int>{1, 0, 2, 3}));
    const auto paths = braid_to_paths(w, line({-3, -1, 1, 3}));
    for (double t : {0.0, 0.3, 0.5, 0.9, 1.0}) {
        const auto c = paths.at(t);
        EXPECT_EQ(c[2], Complex(1, 0));
        EXPECT_EQ(c[3], Complex(3, 0));
    }
}

TEST(BraidPaths, EmptyWordIsConstant) {
    const auto base = line({-1, 1});
    const auto p = braid_to_paths(BraidWord::parse("k=2;"), base);
    for (double t : {0.0, 0.5, 1.0}) {
        std::vector<Complex> z, v;
        p.eval(t, z, v);
        EXPECT_EQ(z, base.points);
        EXPECT_EQ(std::abs(v[0]) + std::abs(v[1]), 0.0);
    }
}

TEST(BraidPaths, HalfTwistSwapsCounterclockwise) {
    const auto p = braid_to_paths(BraidWord::parse("k=2; s1"), line({-1, 1}));
    EXPECT_EQ(p.end()[0], Complex(1, 0));
    EXPECT_EQ(p.end()[1], Complex(-1, 0));
    // counterclockwise: strand 0 starts at -1 and passes below the midpoint
    EXPECT_NEAR(p.at(0.5)[0].imag(), -1.0, 1e-12);
    EXPECT_NEAR(relative_winding(p, 0, 1), M_PI, 1e-9);
    const auto q = braid_to_paths(BraidWord::parse("k=2; s1^-1"), line({-1, 1}));
    EXPECT_NEAR(relative_winding(q, 0, 1), -M_PI, 1e-9);
    EXPECT_NEAR(p.min_separation, 2.0, 1e-12);
}

TEST(BraidPaths, FullTwistWindsOnceAndCloses) {
    const auto p = braid_to_paths(BraidWord::parse("k=2; s1 s1"), line({-1, 1}));
    EXPECT_NEAR(relative_winding(p, 0, 1), 2 * M_PI, 1e-9);
    for (std::size_t a = 0; a < 2; ++a) EXPECT_LT(std::abs(p.end()[a] - p.start()[a]), 1e-12);
}

TEST(BraidPaths, VelocityMatchesDifferenceQuotient) {
    const auto p = braid_to_paths(BraidWord::parse("k=3; s1 s2^-1 s1"), line({-2, 0, 2}));
    const double h = 1e-6;
    for (double t : {0.1, 0.4, 0.8}) {
        std::vector<Complex> z, v, zp, zm, dummy;
        p.eval(t, z, v);
        p.eval(t + h, zp, dummy);
        p.eval(t - h, zm, dummy);
        for (std::size_t a = 0; a < 3; ++a) EXPECT_LT(std::abs((zp[a] - zm[a]) / (2 * h) - v[a]), 1e-5);
    }
}

TEST(BraidPaths, HermiteInterpolationIsAccurate) {
    auto p = braid_to_paths(BraidWord::parse("k=2; s1"), line({-1, 1}), 64);
    const auto exact = p;
    p.exact = nullptr;
    for (double t : {0.013, 0.37, 0.71}) {
        const auto a = p.at(t), b = exact.at(t);
        for (std::size_t k = 0; k < 2; ++k) EXPECT_LT(std::abs(a[k] - b[k]), 1e-7);
    }
}

TEST(BraidPaths, ConcatenationAndReversal) {
    const auto base = line({-1, 1});
    const auto a = braid_to_paths(BraidWord::parse("k=2; s1"), base);
    const auto b = braid_to_paths(BraidWord::parse("k=2; s1"), a.end());
    const auto ab = a.then(b);
    EXPECT_NEAR(relative_winding(ab, 0, 1), 2 * M_PI, 1e-9);
    EXPECT_LT(std::abs(ab.end()[0] - base[0]), 1e-12);
    const auto back = ab.then(ab.reversed());
    EXPECT_NEAR(relative_winding(back, 0, 1), 0.0, 1e-9);
    EXPECT_LT(std::abs(ab.reversed().at(0.25)[0] - ab.at(0.75)[0]), 1e-12);
    EXPECT_KHG_ERROR(a.then(a), ErrorCode::DomainError);
}

TEST(BraidPaths, DetectsCollisions) {
    EXPECT_KHG_ERROR(braid_to_paths(BraidWord::parse("k=2; s1"), line({0, 0})), ErrorCode::CollisionDetected);
    // the twist of slots 1, 2 sweeps through the point at 0.5i
    const PointConfig crowded({{-1, 0}, {1, 0}, {0, 1}});
    EXPECT_KHG_ERROR(braid_to_paths(BraidWord::parse("k=3; s1"), crowded), ErrorCode::CollisionDetected);
    EXPECT_KHG_ERROR(braid_to_paths(BraidWord::parse("k=3; s1"), line({0, 1})), ErrorCode::LengthMismatch);
}

TEST(Matching, StandardMatchingIsNested) {
    for (int k : {1, 2, 3}) {
        std::vector<double> xs;
        for (int i = 0; i < 2 * k; ++i) xs.push_back(i);
        std::vector<Complex> pts(xs.begin(), xs.end());
        const PointConfig cfg(pts);
        const auto m = standard_matching(cfg);
        ASSERT_EQ(m.arcs.size(), static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            EXPECT_EQ(m.arcs[i].first, static_cast<std::size_t>(i));
            EXPECT_EQ(m.arcs[i].second, static_cast<std::size_t>(2 * k - 1 - i));
        }
        EXPECT_NO_THROW(m.validate(cfg));
    }
}

TEST(Matching, ArcGeometry) {
    const Arc a{0, 1, {-1, 0}, {1, 0}, 1};
    EXPECT_LT(std::abs(a.midpoint() - Complex(0, 1)), 1e-15);
    EXPECT_EQ(a.at(1.0), Complex(1, 0));
    EXPECT_DOUBLE_EQ(a.radius(), 1.0);
    const double h = 1e-6;
    EXPECT_LT(std::abs((a.at(0.3 + h) - a.at(0.3 - h)) / (2 * h) - a.velocity(0.3)), 1e-8);
    const Arc b{0, 1, {-1, 0}, {1, 0}, -1};
    EXPECT_LT(std::abs(b.midpoint() - Complex(0, -1)), 1e-15);
}

TEST(Matching, RejectsCrossingAndTouchingArcs) {
    const auto cfg = line({0, 1, 2, 3});
    EXPECT_KHG_ERROR(matching_from_pairs(cfg, {{0, 2}, {1, 3}}), ErrorCode::ArcsNotDisjoint);
    EXPECT_NO_THROW(matching_from_pairs(cfg, {{0, 1}, {2, 3}}));
    EXPECT_KHG_ERROR(matching_from_pairs(cfg, {{0, 1}, {1, 3}}), ErrorCode::ArcsNotDisjoint);
    // arc below touches arc above at i
    const PointConfig touch({{-1, 0}, {1, 0}, {1, 2}, {-1, 2}});
    EXPECT_KHG_ERROR(matching_from_pairs(touch, {{0, 1}, {2, 3}}), ErrorCode::ArcsNotDisjoint);
    EXPECT_KHG_ERROR(matching_from_pairs(line({0, 1, 2}), {{0, 1}}), ErrorCode::LengthMismatch);
}

TEST(Entrance, SinglePairMergesAtArcMidpoint) {
    const auto cfg = line({-1, 1});
    const auto stages = matching_entrance_path(standard_matching(cfg), cfg);
    ASSERT_EQ(stages.size(), 1u);
    const auto& s = stages[0];
    const auto end = s.path.end();
    EXPECT_NEAR(std::abs(end[0] - end[1]), kMergeTol, 1e-12);
    EXPECT_LT(std::abs(end[0] - Complex(0, 1)), 1e-6);
    EXPECT_LT(std::abs(s.merge_point - Complex(0, 1)), 1e-15);
    EXPECT_NEAR(s.merge_time, 1.0 - (2 / M_PI) * std::asin(kMergeTol / 2), 1e-15);
}

TEST(Entrance, InnerArcsMergeFirstAndPointsOnlyDisappear) {
    const auto cfg = line({0, 1, 2, 3, 4, 5});
    const auto m = standard_matching(cfg);
    const auto stages = matching_entrance_path(m, cfg);
    ASSERT_EQ(stages.size(), 3u);
    EXPECT_EQ(stages[0].arc, 2u);
    EXPECT_EQ(stages[1].arc, 1u);
    EXPECT_EQ(stages[2].arc, 0u);
    std::size_t previous = cfg.size() + 1;
    for (const auto& s : stages) {
        EXPECT_LT(s.labels.size(), previous);
        EXPECT_EQ(s.path.strands(), s.labels.size());
        previous = s.labels.size();
        EXPECT_GT(s.path.min_separation, 0.5 * kMergeTol);
        EXPECT_EQ(s.labels[s.pair_first], m.arcs[s.arc].first);
        EXPECT_EQ(s.labels[s.pair_second], m.arcs[s.arc].second);
    }
    EXPECT_EQ(stages.back().labels.size(), 2u);
}

TEST(Entrance, SideBySideArcs) {
    const auto cfg = line({0, 1, 2, 3});
    const auto m = matching_from_pairs(cfg, {{0, 1}, {2, 3}}, -1);
    const auto stages = matching_entrance_path(m, cfg);
    ASSERT_EQ(stages.size(), 2u);
    EXPECT_LT(std::abs(stages[0].merge_point - Complex(0.5, -0.5)), 1e-15);
    EXPECT_EQ(stages[1].labels, (std::vector<std::size_t>{2, 3}));
}
