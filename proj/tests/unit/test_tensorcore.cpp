#include "hybridfpca/error.hpp"
#include "hybridfpca/tensorcore.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hybridfpca;
using namespace hybridfpca::testing;

TEST(Grid, TrapezoidWeightsOnIrregularPoints) {
    const auto g = Grid1D::trapezoid({0.0, 0.2, 1.0});
    ASSERT_EQ(g.size(), 3);
    EXPECT_NEAR(g.weights()[0], 0.1, 1e-15);
    EXPECT_NEAR(g.weights()[1], 0.5, 1e-15);
    EXPECT_NEAR(g.weights()[2], 0.4, 1e-15);
}

TEST(Grid, RejectsBadPoints) {
    EXPECT_THROW(Grid1D::trapezoid({0.0}), Error);
    EXPECT_THROW(Grid1D::trapezoid({0.0, 0.0, 1.0}), Error);
    try {
        Grid1D::trapezoid({1.0, 0.5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidGrid);
    }
}

TEST(Grid, UniformMatchesHandWeights) {
    const auto g = Grid1D::uniform(0.0, 1.0, 5);
    const auto w = oracle_trapezoid(g.points());
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(g.weights()[j], w[j], 1e-15);
}

TEST(InnerProduct, ConstantOneGivesIntervalLength) {
    const auto g = Grid1D::uniform(0.0, 1.0, 3);
    const std::vector<double> one{1, 1, 1};
    EXPECT_NEAR(weighted_inner_product(one, one, g), 1.0, 1e-15);
}

TEST(InnerProduct, DisjointSupportsGiveZero) {
    const auto g = Grid1D::uniform(0.0, 1.0, 3);
    const std::vector<double> f{1, 0, 0}, h{0, 1, 0};
    EXPECT_EQ(weighted_inner_product(f, h, g), 0.0);
}

TEST(InnerProduct, HandSummation) {
    // Weights 0.25, 0.5, 0.25 come from the uniform 3-point grid on [0, 1].
    const auto g = Grid1D::uniform(0.0, 1.0, 3);
    const std::vector<double> f{1, 2, 3}, h{4, 5, 6};
    const double expected = 1 * 4 * 0.25 + 2 * 5 * 0.5 + 3 * 6 * 0.25;
    EXPECT_NEAR(weighted_inner_product(f, h, g), expected, 1e-14);
    EXPECT_NEAR(expected, 10.5, 1e-14);
}

TEST(InnerProduct, LengthMismatchIsShapeError) {
    const auto g = Grid1D::uniform(0.0, 1.0, 3);
    const std::vector<double> f{1, 2}, h{1, 2, 3};
    try {
        weighted_inner_product(f, h, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Shape);
    }
}

TEST(InnerProduct, ExactForPiecewiseLinear) {
    // Product of a linear and a constant function is linear between nodes,
    // so trapezoid integrates it exactly: int_0^2 (3x + 1) * 2 dx = 16.
    const auto g = Grid1D::trapezoid({0.0, 0.3, 0.7, 1.6, 2.0});
    std::vector<double> f, c;
    for (double x : g.points()) {
        f.push_back(3 * x + 1);
        c.push_back(2.0);
    }
    EXPECT_NEAR(weighted_inner_product(f, c, g), 16.0, 16.0 * 1e-12);
}

TEST(InnerProduct, SymmetricAndBilinear) {
    Rng rng(3, 0);
    const auto g = random_grid(rng, 9);
    std::vector<double> a(9), b(9), c(9), ab(9);
    for (int j = 0; j < 9; ++j) {
        a[j] = rng.normal();
        b[j] = rng.normal();
        c[j] = rng.normal();
        ab[j] = 2 * a[j] - 3 * b[j];
    }
    EXPECT_NEAR(weighted_inner_product(a, c, g), weighted_inner_product(c, a, g), 1e-14);
    EXPECT_NEAR(weighted_inner_product(ab, c, g),
                2 * weighted_inner_product(a, c, g) - 3 * weighted_inner_product(b, c, g), 1e-12);
}

TEST(Tensor, RejectsNonFiniteObservedValues) {
    auto g = Grid1D::uniform(0, 1, 2);
    std::vector<double> v(2 * 1 * 2 * 2, 1.0);
    v[3] = NAN;
    try {
        HybridTensor t(2, 1, g, g, v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidData);
    }
}

TEST(Tensor, RejectsWrongValueCount) {
    auto g = Grid1D::uniform(0, 1, 2);
    EXPECT_THROW(HybridTensor(2, 1, g, g, std::vector<double>(7, 0.0)), Error);
}

TEST(Tensor, MaskedOmegaWeightsUseObservedPointsOnly) {
    auto og = Grid1D::uniform(0, 1, 5);
    auto sg = Grid1D::uniform(0, 1, 2);
    Mask mask = Mask::Constant(2, 5, true);
    mask(1, 1) = false;
    mask(1, 3) = false;
    std::vector<double> v(2 * 1 * 5 * 2, 1.0);
    HybridTensor t(2, 1, og, sg, v, mask);
    const Vector w0 = t.omega_weights(0);
    const Vector w1 = t.omega_weights(1);
    EXPECT_NEAR(w0.sum(), 1.0, 1e-15);
    // Observed 0, 0.5, 1 -> weights 0.25, 0.5, 0.25.
    EXPECT_NEAR(w1[0], 0.25, 1e-15);
    EXPECT_EQ(w1[1], 0.0);
    EXPECT_NEAR(w1[2], 0.5, 1e-15);
    EXPECT_EQ(w1[3], 0.0);
    EXPECT_NEAR(w1[4], 0.25, 1e-15);
}

TEST(Center, IdenticalSubjectsGiveZero) {
    Rng rng(1, 0);
    auto g = Grid1D::uniform(0, 1, 3);
    std::vector<double> one(2 * 3 * 3);
    for (auto& x : one) x = rng.normal();
    std::vector<double> v;
    for (int i = 0; i < 3; ++i) v.insert(v.end(), one.begin(), one.end());
    const auto c = center(HybridTensor(3, 2, g, g, v));
    for (double x : c.demeaned.values()) EXPECT_NEAR(x, 0.0, 1e-15);
    EXPECT_LE(max_abs_diff(c.mean, one), 1e-15);
}

TEST(Center, AntisymmetricPair) {
    Rng rng(2, 0);
    auto g = Grid1D::uniform(0, 1, 3);
    std::vector<double> v(2 * 2 * 3 * 3);
    const std::size_t half = v.size() / 2;
    for (std::size_t j = 0; j < half; ++j) {
        v[j] = rng.normal();
        v[j + half] = -v[j];
    }
    const auto c = center(HybridTensor(2, 2, g, g, v));
    for (double m : c.mean) EXPECT_EQ(m, 0.0);
    EXPECT_EQ(c.demeaned.values(), v);
}

TEST(Center, MatchesBruteForceMean) {
    Rng rng(5, 0);
    const auto t = random_tensor(rng, 2, 2, 2, 2);
    const auto c = center(t);
    EXPECT_LE(max_abs_diff(c.mean, oracle_mean(t)), 1e-15);
    for (int r = 0; r < 2; ++r)
        for (int w = 0; w < 2; ++w)
            for (int s = 0; s < 2; ++s) EXPECT_NEAR(c.demeaned(0, r, w, s) + c.demeaned(1, r, w, s), 0.0, 1e-10);
}

TEST(Center, Idempotent) {
    Rng rng(6, 0);
    const auto t = random_tensor(rng, 7, 3, 4, 5);
    const auto twice = center(center(t).demeaned);
    for (double m : twice.mean) EXPECT_NEAR(m, 0.0, 1e-10);
}

TEST(Center, NeedsTwoSubjects) {
    Rng rng(7, 0);
    const auto t = random_tensor(rng, 1, 2, 3, 3);
    try {
        center(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientSubjects);
    }
}

TEST(Center, MaskedMeanUsesObservedSubjects) {
    auto og = Grid1D::uniform(0, 1, 3);
    auto sg = Grid1D::uniform(0, 1, 2);
    Mask mask = Mask::Constant(3, 3, true);
    mask(2, 1) = false;
    std::vector<double> v(3 * 1 * 3 * 2);
    for (int i = 0; i < 3; ++i)
        for (int w = 0; w < 3; ++w)
            for (int s = 0; s < 2; ++s) v[(i * 3 + w) * 2 + s] = (w == 1 && i == 2) ? NAN : i + 10.0 * w + s;
    const auto c = center(HybridTensor(3, 1, og, sg, v, mask));
    // omega index 1: subjects 0 and 1 only -> mean of 10+s and 11+s.
    EXPECT_NEAR(c.mean[2], 10.5, 1e-15);
    EXPECT_NEAR(c.mean[0], 1.0, 1e-15);
    EXPECT_EQ(c.demeaned(2, 0, 1, 0), 0.0);
}

TEST(Tensor, SelectSubjectsPermutes) {
    Rng rng(8, 0);
    const auto t = random_tensor(rng, 3, 2, 2, 2);
    const std::vector<int> order{2, 0};
    const auto sub = t.select_subjects(order);
    ASSERT_EQ(sub.subjects(), 2);
    EXPECT_EQ(sub(0, 1, 1, 0), t(2, 1, 1, 0));
    EXPECT_EQ(sub(1, 0, 0, 1), t(0, 0, 0, 1));
}
