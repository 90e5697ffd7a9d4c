#include "test_support.hpp"

#include "khg/higgs_divisor.hpp"

using namespace khg;

namespace {

VectorC unit(int n, int i) {
    VectorC v = VectorC::Zero(n);
    v(i) = 1.0;
    return v;
}

std::vector<std::vector<int>> all_weights(int len, int max_entry) {
    std::vector<std::vector<int>> out;
    std::vector<int> l(static_cast<std::size_t>(len), 0);
    while (true) {
        out.push_back(l);
        std::size_t i = 0;
        while (i < l.size() && l[i] == max_entry) l[i++] = 0;
        if (i == l.size()) break;
        ++l[i];
    }
    return out;
}

} // namespace

TEST(Polynomial, TaylorShiftMatchesEvaluation) {
    const Polynomial p({Complex(1, 2), Complex(-3, 0.5), 0.0, Complex(2, -1), Complex(0.25)});
    const Complex c(0.3, -0.7);
    const Polynomial q = taylor_shift(p, c);
    for (const Complex z : {Complex(0.0), Complex(1.1, 0.2), Complex(-0.4, 0.9)})
        EXPECT_LT(std::abs(q(z) - p(z + c)), 1e-13);
}

TEST(Polynomial, VanishingOrder) {
    const Polynomial p = Polynomial({-1.0, 1.0}) * Polynomial({-1.0, 1.0}) * Polynomial({2.0, 1.0});
    EXPECT_EQ(vanishing_order(p, 1.0), 2);
    EXPECT_EQ(vanishing_order(p, -2.0), 1);
    EXPECT_EQ(vanishing_order(p, 0.5), 0);
    EXPECT_EQ(vanishing_order(Polynomial(), 0.0), kInfiniteOrder);
}

TEST(Polynomial, RootsOfKnownProduct) {
    const std::vector<Complex> want = {Complex(1, 1), Complex(-2, 0.5), Complex(0.3, -0.1)};
    Polynomial p({1.0});
    for (const auto& r : want) p = p * Polynomial({-r, 1.0});
    const auto got = polynomial_roots(p);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& r : want) {
        double best = 1e300;
        for (const auto& g : got) best = std::min(best, std::abs(g - r));
        EXPECT_LT(best, 1e-12);
    }
}

TEST(WedgeOrder, Examples) {
    const SquareMatrixC e = jordan_nilpotent({2});
    PolyMatrix phi(2);
    phi.add_term(e, 1);
    EXPECT_EQ(wedge_order(phi, unit(2, 0), 1, 0.0), 1);
    EXPECT_EQ(wedge_order(PolyMatrix::constant(e), unit(2, 0), 1, Complex(0.7, 0.2)), 0);

    const auto b = chevalley_basis(3);
    for (int a = 0; a <= 3; ++a)
        for (int bb = 0; bb <= 3; ++bb) {
            PolyMatrix f(3);
            f.add_term(b.raising[0], a);
            f.add_term(b.raising[1], bb);
            EXPECT_EQ(wedge_order(f, unit(3, 0), 2, 0.0), 2 * a + bb);
            EXPECT_EQ(wedge_order(f, unit(3, 0), 1, 0.0), a);
        }
}

TEST(WedgeOrder, IdenticallyZeroIsFlagged) {
    // e_N is killed by the row action of an upper-triangular nilpotent.
    EXPECT_EQ(wedge_order(PolyMatrix::constant(jordan_nilpotent({2})), unit(2, 1), 1, 0.0), kInfiniteOrder);
}

TEST(DivisorOf, Examples) {
    for (int l = 0; l <= 4; ++l) {
        const auto d = divisor_of(knot_higgs_field({l}), unit(2, 0));
        if (l == 0) {
            EXPECT_TRUE(d.points.empty());
            continue;
        }
        ASSERT_EQ(d.points.size(), 1u);
        EXPECT_EQ(d.points[0].p, Complex(0.0));
        EXPECT_EQ(d.points[0].lambda, (std::vector<int>{l}));
        EXPECT_TRUE(d.effective);
    }

    const auto d3 = divisor_of(knot_higgs_field({1, 2}), unit(3, 0));
    ASSERT_EQ(d3.points.size(), 1u);
    EXPECT_EQ(d3.points[0].orders, (std::vector<int>{1, 4}));
    EXPECT_EQ(d3.points[0].lambda, (std::vector<int>{1, 2}));

    EXPECT_TRUE(divisor_of(knot_higgs_field({0, 0, 0}), unit(4, 0)).points.empty());
    EXPECT_KHG_ERROR(divisor_of(PolyMatrix::constant(jordan_nilpotent({2})), unit(2, 1)),
                     ErrorCode::IdenticallyZeroWedge);
}

TEST(DivisorOf, SecondDifferenceRule) {
    EXPECT_EQ(lambda_from_orders({1, 4}), (std::vector<int>{1, 2}));
    EXPECT_EQ(lambda_from_orders({2, 4, 6}), (std::vector<int>{2, 0, 0}));
    EXPECT_EQ(lambda_from_orders({0, 0, 1}), (std::vector<int>{0, 0, 1}));
}

TEST(DivisorOf, RoundTripAndOrbitConsistency) {
    for (int n = 2; n <= 4; ++n)
        for (const auto& lambda : all_weights(n - 1, 2)) {
            const auto phi = knot_higgs_field(lambda);
            const auto d = divisor_of(phi, unit(n, 0));
            const bool trivial = std::all_of(lambda.begin(), lambda.end(), [](int l) { return l == 0; });
            if (trivial) {
                EXPECT_TRUE(d.points.empty());
                continue;
            }
            ASSERT_EQ(d.points.size(), 1u);
            EXPECT_EQ(d.points[0].p, Complex(0.0));
            EXPECT_EQ(d.points[0].lambda, lambda);
            EXPECT_EQ(orbit_partition(phi.evaluate(0.0)), weight_to_partition(lambda));
        }
}

TEST(DivisorOf, TranslationCovariance) {
    const Complex c(0.5, -0.25);
    for (int n = 2; n <= 4; ++n)
        for (const auto& lambda : all_weights(n - 1, 2)) {
        if (std::all_of(lambda.begin(), lambda.end(), [](int l) { return l == 0; })) continue;
        const auto d = divisor_of(knot_higgs_field(lambda).translated(c), unit(n, 0));
        ASSERT_EQ(d.points.size(), 1u);
        EXPECT_LT(std::abs(d.points[0].p - c), 1e-10);
        EXPECT_EQ(d.points[0].lambda, lambda);
        }
}

TEST(DivisorOf, SeveralPoints) {
    // phi = (z - 1) E_1^+ + z^2 (z + i) E_2^+ on C^3.
    const auto b = chevalley_basis(3);
    PolyMatrix phi(3);
    phi.add_term(b.raising[0], 1);
    phi.add_term(b.raising[0], 0, -1.0);
    phi.add_term(b.raising[1], 3);
    phi.add_term(b.raising[1], 2, Complex(0, 1));
    const auto d = divisor_of(phi, unit(3, 0));
    ASSERT_EQ(d.points.size(), 3u);
    EXPECT_TRUE(d.effective);
    for (const auto& pt : d.points) {
        if (std::abs(pt.p - 1.0) < 1e-8) EXPECT_EQ(pt.lambda, (std::vector<int>{1, 0}));
        else if (std::abs(pt.p) < 1e-8) EXPECT_EQ(pt.lambda, (std::vector<int>{0, 2}));
        else {
            EXPECT_LT(std::abs(pt.p + Complex(0, 1)), 1e-8);
            EXPECT_EQ(pt.lambda, (std::vector<int>{0, 1}));
        }
    }
}

TEST(DivisorOf, DiagonalPartKeepsWeight) {
    PolyMatrix phi(2);
    SquareMatrixC m = SquareMatrixC::Zero(2, 2);
    m(0, 1) = 1.0;
    phi.add_term(m, 1);
    SquareMatrixC h = SquareMatrixC::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    phi.add_term(h, 0);
    const auto d = divisor_of(phi, unit(2, 0));
    ASSERT_EQ(d.points.size(), 1u);
    EXPECT_EQ(d.points[0].lambda, (std::vector<int>{1}));
}
