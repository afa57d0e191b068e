#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hslab/core.hpp"
#include "hslab/functionals.hpp"
#include "oracles.hpp"

using namespace hslab;

TEST(CriticalExponent, Examples) {
    EXPECT_DOUBLE_EQ(critical_exponent(3, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(critical_exponent(3, 0.0), 6.0);
    EXPECT_DOUBLE_EQ(critical_exponent(4, 0.0), 4.0);
}

TEST(CriticalExponent, RejectsBadArguments) {
    EXPECT_THROW(critical_exponent(2, 0.0), DomainError);
    EXPECT_THROW(critical_exponent(3, 2.0), DomainError);
    EXPECT_THROW(critical_exponent(3, -0.1), DomainError);
    EXPECT_THROW(ModelParams(3, 2.5), DomainError);
}

TEST(CriticalExponent, AboveTwoAndMatchesQcAtGammaZero) {
    for (int d = 3; d <= 8; ++d) {
        EXPECT_DOUBLE_EQ(critical_exponent(d, 0.0), ModelParams(d, 0.0).q_c());
        for (double g = 0.0; g < 2.0; g += 0.125) EXPECT_GT(critical_exponent(d, g), 2.0);
    }
}

TEST(Grid, UniformUnitBallVolume) {
    const auto g = make_graded_grid(3, 16, 1.0, 1.0);
    double s = 0.0;
    for (double w : g->cell_weights_plain()) s += w;
    EXPECT_NEAR(s / (4.0 * std::numbers::pi / 3.0), 1.0, 1e-12);
}

TEST(Grid, GradedFirstNodeBelowUniformSpacing) {
    const auto g = make_graded_grid(3, 1024, 200.0, 2.0);
    EXPECT_GT(g->node(0), 0.0);
    EXPECT_LT(g->node(0), 200.0 / 1024.0);
    for (std::size_t i = 1; i < g->size(); ++i) ASSERT_GT(g->node(i), g->node(i - 1));
}

TEST(Grid, SingularWeightSum) {
    const auto g = make_graded_grid(3, 256, 10.0, 2.0, 1.0);
    double s = 0.0;
    for (double w : g->cell_weights_singular()) s += w;
    const double exact = 4.0 * std::numbers::pi * oracle::integrate([](double r) { return r; }, 0.0, 10.0);
    EXPECT_NEAR(exact, 628.3185307179586, 1e-9);
    EXPECT_NEAR(s / exact, 1.0, 1e-10);
}

TEST(Grid, WeightSumsMatchAntiderivatives) {
    for (int d : {3, 4, 5})
        for (double gamma : {0.0, 0.5, 1.0, 1.7}) {
            const auto g = make_graded_grid(d, 300, 7.0, 2.0, gamma);
            double s = 0.0, ss = 0.0;
            for (std::size_t i = 0; i < g->size(); ++i) {
                s += g->cell_weights_plain()[i];
                ss += g->cell_weights_singular()[i];
                ASSERT_GT(g->cell_weights_singular()[i], 0.0);
            }
            const double om = oracle::sphere_area(d);
            EXPECT_NEAR(s / (om * std::pow(7.0, d) / d), 1.0, 1e-10);
            EXPECT_NEAR(ss / (om * std::pow(7.0, d - gamma) / (d - gamma)), 1.0, 1e-10);
        }
}

TEST(Grid, RejectsBadArguments) {
    EXPECT_THROW(make_graded_grid(3, 16, 0.0, 1.0), DomainError);
    EXPECT_THROW(make_graded_grid(3, 16, -1.0, 1.0), DomainError);
    EXPECT_THROW(make_graded_grid(3, 8, 1.0, 1.0), DomainError);
    EXPECT_THROW(make_graded_grid(3, 16, 1.0, 0.5), DomainError);
}

TEST(Quadrature, ZeroField) {
    const auto g = make_graded_grid(3, 64, 5.0, 2.0, 1.0);
    EXPECT_EQ(quadrature(RadialField::zeros(g), 2.0, false), 0.0);
    EXPECT_EQ(quadrature(RadialField::zeros(g), 4.0, true), 0.0);
}

TEST(Quadrature, OnesOnUnitBall) {
    const auto g = make_graded_grid(3, 64, 1.0, 1.0);
    const auto one = RadialField::sample(g, [](double) { return 1.0; });
    EXPECT_NEAR(quadrature(one, 2.0, false) / (4.0 * std::numbers::pi / 3.0), 1.0, 1e-12);
}

TEST(Quadrature, GroundStatePotential) {
    const auto g = make_graded_grid(3, 4096, 200.0, 2.0, 1.0);
    const auto u = RadialField::sample(g, oracle::w31);
    const double ref = oracle::potential_w31();
    EXPECT_NEAR(ref, 8.0 * std::numbers::pi / 3.0, 1e-8);
    EXPECT_NEAR(quadrature(u, 4.0, true) / ref, 1.0, 5e-3);
}

TEST(Quadrature, RejectsNaNAndLowPower) {
    const auto g = make_graded_grid(3, 32, 1.0, 1.0);
    EXPECT_THROW(quadrature(RadialField::zeros(g), 0.5, false), DomainError);
    std::vector<double> v(g->size(), 1.0);
    v[3] = std::nan("");
    EXPECT_THROW(RadialField(g, v), DomainError);
}

TEST(Quadrature, MonotoneInPointwiseMagnitude) {
    const auto g = make_graded_grid(3, 200, 10.0, 2.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const double a = 0.1 * (k + 1), b = 0.5 + 0.05 * k;
        const auto u = RadialField::sample(g, [&](double r) { return a * std::sin(r) * std::exp(-b * r); });
        const auto v = RadialField::sample(g, [&](double r) { return a * std::exp(-b * r) * (1.0 + 0.1 * r); });
        for (double p : {1.0, 2.0, 4.0, 6.0})
            for (bool s : {false, true}) EXPECT_LE(quadrature(u, p, s), quadrature(v, p, s));
    }
}

TEST(ScaleField, IdentityAndZero) {
    const auto g = make_graded_grid(3, 128, 20.0, 2.0, 1.0);
    const auto u = RadialField::sample(g, [](double r) { return std::exp(-r) * (1 + r); });
    const auto s = scale_field(u, 1.0);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(s[i], u[i]);
    const auto z = scale_field(RadialField::zeros(g), 0.5);
    EXPECT_EQ(z.sup_norm(), 0.0);
    EXPECT_THROW(scale_field(u, 0.0), DomainError);
    EXPECT_THROW(scale_field(u, -1.0), DomainError);
}

TEST(ScaleField, GroundStateEnergyInvariant) {
    const ModelParams p(3, 1.0);
    const auto g = make_graded_grid(3, 4096, 200.0, 2.0, 1.0);
    const auto w = ground_state(p, g);
    const double e0 = energy(w, p);
    const double e_scaled = energy(scale_field(w, 2.0), p);
    // direct quadrature of the closed-form rescaled W
    const double lam = 2.0;
    const double e_direct = energy(RadialField::sample(g, [&](double r) { return std::sqrt(lam) * oracle::w31(lam * r); }), p);
    EXPECT_NEAR(e_scaled / e0, 1.0, 1e-2);
    EXPECT_NEAR(e_scaled / e_direct, 1.0, 1e-2);
}

TEST(ScaleField, EnergyInvariantForCompactData) {
    const ModelParams p(3, 1.0);
    const auto g = make_graded_grid(3, 2048, 40.0, 2.0, 1.0);
    const auto u = RadialField::sample(g, [](double r) { return 0.8 * std::exp(-r * r) * smooth_cutoff(r / 4.0); });
    const double e0 = energy(u, p);
    for (double lam : {0.5, 2.0})
        EXPECT_LE(std::abs(energy(scale_field(u, lam), p) - e0), 1e-2 * std::max(1.0, std::abs(e0)));
}

TEST(SmoothCutoff, Profile) {
    EXPECT_EQ(smooth_cutoff(0.0), 1.0);
    EXPECT_EQ(smooth_cutoff(1.0), 1.0);
    EXPECT_EQ(smooth_cutoff(2.0), 0.0);
    EXPECT_NEAR(smooth_cutoff(1.5), 0.5, 1e-15);
    for (double s = 1.0; s < 2.0; s += 0.01) EXPECT_GE(smooth_cutoff(s), smooth_cutoff(s + 0.01));
}

TEST(Boundary, BallActiveCount) {
    const auto g = make_graded_grid(3, 100, 10.0, 1.0);
    const Boundary b = Boundary::ball(5.0);
    const std::size_t m = b.active_count(*g);
    EXPECT_LT(g->node(m - 1), 5.0);
    EXPECT_GE(g->node(m), 5.0);
    EXPECT_THROW(Boundary::ball(20.0).active_count(*g), DomainError);
    const auto u = RadialField::sample(g, [](double) { return 1.0; }, b);
    EXPECT_TRUE(u.pinned_nodes_zero());
}
