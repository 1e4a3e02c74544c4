#include <gtest/gtest.h>

#include <random>

#include "nle/divergence.hpp"
#include "oracles.hpp"

using nle::Vector;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST(KlTest, IdenticalDistributionsGiveZero) {
    const Vector p = vec2(0.3, 0.7);
    EXPECT_DOUBLE_EQ(nle::kl_divergence(p, p), 0.0);
}

TEST(KlTest, MatchesScalarOracle) {
    const Vector e = vec2(0.5, 0.5);
    const Vector o = vec2(0.25, 0.75);
    // 0.5 ln 2 + 0.5 ln(2/3)
    const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    EXPECT_NEAR(nle::kl_divergence(e, o), expected, 1e-15);
    EXPECT_NEAR(nle::kl_divergence(e, o), 0.14384, 1e-5);
}

TEST(KlTest, Asymmetric) {
    const Vector e = vec2(0.5, 0.5);
    const Vector o = vec2(0.25, 0.75);
    const double forward = nle::kl_divergence(e, o);
    const double backward = nle::kl_divergence(o, e);
    EXPECT_NEAR(backward, 0.13081, 1e-5);
    EXPECT_NE(forward, backward);
}

TEST(KlTest, LengthMismatchThrows) {
    Vector e(3);
    e << 0.2, 0.3, 0.5;
    EXPECT_THROW(nle::kl_divergence(e, vec2(0.5, 0.5)), nle::ShapeError);
}

TEST(SklTest, IdenticalDistributionsGiveZero) {
    const Vector p = vec2(0.4, 0.6);
    EXPECT_DOUBLE_EQ(nle::skl_divergence(p, p), 0.0);
}

TEST(SklTest, MatchesSumOfBothKlDirections) {
    const Vector e = vec2(0.5, 0.5);
    const Vector o = vec2(0.25, 0.75);
    EXPECT_NEAR(nle::skl_divergence(e, o), 0.27465, 1e-5);
    EXPECT_NEAR(nle::skl_divergence(e, o),
                nle::kl_divergence(e, o) + nle::kl_divergence(o, e), 1e-15);
}

TEST(SklTest, SymmetricOnRandomPairs) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector a = oracle::random_prob_row(rng, 6);
        const Vector b = oracle::random_prob_row(rng, 6);
        EXPECT_NEAR(nle::skl_divergence(a, b), nle::skl_divergence(b, a), 1e-12);
    }
}

TEST(SklTest, DominatesBothKlDirections) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector a = oracle::random_prob_row(rng, 5);
        const Vector b = oracle::random_prob_row(rng, 5);
        const double s = nle::skl_divergence(a, b);
        EXPECT_GE(s, nle::kl_divergence(a, b) - 1e-12);
        EXPECT_GE(s, nle::kl_divergence(b, a) - 1e-12);
        EXPECT_GE(s, -1e-12);
    }
}

TEST(DivergenceTest, AgreesWithIndependentOracle) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector a = oracle::random_prob_row(rng, 8);
        const Vector b = oracle::random_prob_row(rng, 8);
        EXPECT_NEAR(nle::kl_divergence(a, b), oracle::kl(oracle::to_std(a), oracle::to_std(b)),
                    1e-13);
        EXPECT_NEAR(nle::skl_divergence(a, b), oracle::skl(oracle::to_std(a), oracle::to_std(b)),
                    1e-13);
    }
}
