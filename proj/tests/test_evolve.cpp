#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hslab/data.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"
#include "hslab/laplacian.hpp"
#include "hslab/propagator.hpp"

using namespace hslab;

namespace {

const ModelParams p31(3, 1.0);

// The dichotomy setup: a large box so the cutoff barely moves E(lambda W).
GridPtr box_grid() {
    static const GridPtr g = make_graded_grid(3, 1024, 1000.0, 2.0, 1.0);
    return g;
}

EvolveConfig long_run() {
    EvolveConfig c;
    c.dt_max = 100.0;
    c.t_horizon = 1e8;
    c.checkpoint_stride = 100;
    return c;
}

const Trajectory& half_w_run() {
    static const Trajectory t = simulate(mollified_ground_state(p31, box_grid(), 0.5), p31, long_run());
    return t;
}

const Trajectory& blowup_run() {
    static const Trajectory t = simulate(mollified_ground_state(p31, box_grid(), 1.2), p31, long_run());
    return t;
}

double box_lhs() { return mountain_pass_energy(p31, box_grid()); }

Trajectory smooth_run(std::size_t n, double dt, double amplitude = 0.5, double horizon = 1.0, std::size_t stride = 10) {
    const auto g = make_graded_grid(3, n, 40.0, 2.0, 1.0);
    EvolveConfig c;
    c.dt_init = c.dt_max = dt;
    c.t_horizon = horizon;
    c.checkpoint_stride = stride;
    return simulate(gaussian_data(g, amplitude), p31, c);
}

}  // namespace

TEST(NonlinearTerm, Examples) {
    const auto g = make_graded_grid(3, 2048, 10.0, 1.0, 1.0);
    EXPECT_EQ(nonlinear_term(RadialField::zeros(g), p31).sup_norm(), 0.0);
    const auto one = RadialField::sample(g, [](double) { return 1.0; });
    const auto n = nonlinear_term(one, p31);
    const std::size_t i = g->first_node_at_or_beyond(2.0);
    EXPECT_NEAR(n[i], 1.0 / g->node(i), 1e-6);
    EXPECT_NEAR(n[i], 0.5, 3e-3);
    const auto na = nonlinear_term(one, p31.with_sign(Sign::Absorbing));
    EXPECT_EQ(na[i], -n[i]);
}

TEST(NonlinearTerm, MatchesMinusLaplacianOfGroundState) {
    std::vector<double> h, err;
    for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
        const auto g = make_graded_grid(3, n, 200.0, 2.0, 1.0);
        const auto w = ground_state(p31, g);
        const auto nl = nonlinear_term(w, p31);
        const auto lap = discrete_laplacian(w);
        double e = 0.0;
        for (std::size_t i = 2; i < static_cast<std::size_t>(0.9 * n); ++i)
            e = std::max(e, g->node(i) * std::abs(nl[i] + lap[i]));
        h.push_back(1.0 / n);
        err.push_back(e);
    }
    EXPECT_NEAR(loglog_slope(h, err), 2.0, 0.3);
}

TEST(NonlinearTerm, OverflowSignalsBlowUp) {
    const auto g = make_graded_grid(3, 64, 1.0, 2.0, 1.0);
    const auto big = RadialField::sample(g, [](double) { return 1e200; });
    EXPECT_THROW(nonlinear_values(big, p31), BlowUpSignal);
}

TEST(ImexStep, ZeroStaysZero) {
    const auto g = make_graded_grid(3, 128, 10.0, 2.0, 1.0);
    EXPECT_EQ(imex_step(RadialField::zeros(g), 0.1, p31).sup_norm(), 0.0);
}

TEST(ImexStep, AbsorptionOnlyRemovesMass) {
    const ModelParams pa(3, 1.0, Sign::Absorbing);
    const auto g = make_graded_grid(3, 512, 20.0, 2.0, 1.0);
    const auto u = gaussian_data(g, 3.0, 2.0);
    for (double dt : {1e-5, 1e-4, 1e-3}) {
        const auto a = imex_step(u, dt, pa), h = heat_step(u, dt);
        for (std::size_t i = 0; i < u.size(); ++i) {
            ASSERT_GE(a[i], 0.0);
            ASSERT_LE(a[i], h[i] + 1e-15);
        }
    }
}

TEST(ImexStep, GroundStateIsStationary) {
    std::vector<double> h, drift;
    const double dt = 1e-6;
    for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
        const auto g = make_graded_grid(3, n, 200.0, 2.0, 1.0);
        const auto w = ground_state(p31, g);
        const auto w1 = imex_step(w, dt, p31);
        // weight r^gamma as for the elliptic residual
        double e = 0.0;
        for (std::size_t i = 2; i < static_cast<std::size_t>(0.9 * n); ++i)
            e = std::max(e, g->node(i) * std::abs(w1[i] - w[i]) / dt);
        h.push_back(1.0 / n);
        drift.push_back(e);
    }
    EXPECT_NEAR(loglog_slope(h, drift), 2.0, 0.3);
}

TEST(Simulate, ZeroDataIsDissipative) {
    const auto t = simulate(RadialField::zeros(box_grid()), p31, long_run());
    EXPECT_EQ(t.verdict, Verdict::Dissipative);
    EXPECT_EQ(t.checkpoints.size(), 1u);
}

TEST(Simulate, HalfGroundStateDissipates) {
    const auto& t = half_w_run();
    EXPECT_EQ(evaluate_functionals(t.checkpoints.front().field, p31, box_lhs()).membership, Membership::MPlus);
    EXPECT_EQ(t.verdict, Verdict::Dissipative) << t.halt_reason;
    const auto& cps = t.checkpoints;
    EXPECT_LT(cps.back().h1_norm, 1e-3 * cps.front().h1_norm);
    for (std::size_t k = cps.size() - 9; k < cps.size(); ++k) EXPECT_LE(cps[k].h1_norm, cps[k - 1].h1_norm);
    for (std::size_t k = 1; k < cps.size(); ++k) EXPECT_GT(cps[k].t, cps[k - 1].t);
}

TEST(Simulate, ScaledGroundStateBlowsUp) {
    const auto& t = blowup_run();
    EXPECT_EQ(evaluate_functionals(t.checkpoints.front().field, p31, box_lhs()).membership, Membership::MMinus);
    EXPECT_EQ(t.verdict, Verdict::BlowUp);
    const auto& last = t.checkpoints.back();
    EXPECT_TRUE(last.sup > t.config.blowup_sup_threshold ||
                detail::stable_dt(last.field, p31, t.config.stability_safety) < t.config.dt_min)
        << t.halt_reason;
}

TEST(Simulate, RejectsNonzeroPinnedData) {
    const auto g = make_graded_grid(3, 64, 10.0, 2.0, 1.0);
    const RadialField u(g, std::vector<double>(g->size(), 1.0), Boundary::decay());
    EXPECT_NO_THROW(simulate(u.scaled(1e-3), p31, EvolveConfig{1e-3, 1e-3, 1e-12, 1e-2, 5}));
    std::vector<double> v(g->size(), 1.0);
    const RadialField bad(g, v, Boundary::dirichlet_at_rmax());
    EXPECT_THROW(simulate(bad, p31, EvolveConfig{}), DomainError);
}

TEST(Simulate, ConfigValidation) {
    EvolveConfig c;
    c.dt_min = 1.0;
    EXPECT_THROW(c.validate(), DomainError);
    c = EvolveConfig{};
    c.checkpoint_stride = 0;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Simulate, StrideHalvingLeavesVerdictAndFinalStateUnchanged) {
    const auto g = make_graded_grid(3, 256, 40.0, 2.0, 1.0);
    EvolveConfig a;
    a.t_horizon = 2.0;
    a.checkpoint_stride = 20;
    EvolveConfig b = a;
    b.checkpoint_stride = 10;
    const auto ta = simulate(gaussian_data(g, 1.0), p31, a), tb = simulate(gaussian_data(g, 1.0), p31, b);
    EXPECT_EQ(ta.verdict, tb.verdict);
    EXPECT_EQ(ta.steps, tb.steps);
    EXPECT_EQ(detail::max_abs_diff(ta.checkpoints.back().field.values(), tb.checkpoints.back().field.values()), 0.0);
}

TEST(EnergyIdentity, ZeroData) {
    EXPECT_EQ(energy_identity_residual(simulate(RadialField::zeros(box_grid()), p31, long_run())), 0.0);
}

TEST(EnergyIdentity, StationaryGroundState) {
    const auto g = make_graded_grid(3, 2048, 200.0, 2.0, 1.0);
    EvolveConfig c;
    c.dt_init = 1e-6;
    c.t_horizon = 0.01;
    const auto t = simulate(ground_state(p31, g), p31, c);
    EXPECT_LE(energy_identity_residual(t), 1e-4);
    EXPECT_TRUE(energy_monotone(t));
}

TEST(EnergyIdentity, SmallDataConvergesUnderRefinement) {
    const double r1 = energy_identity_residual(smooth_run(256, 4e-3));
    const double r2 = energy_identity_residual(smooth_run(512, 2e-3));
    const double r3 = energy_identity_residual(smooth_run(1024, 1e-3));
    EXPECT_LE(r1, 0.02);
    EXPECT_LE(r2, 0.5 * r1 * 1.1);
    EXPECT_LE(r3, 0.5 * r2 * 1.1);
}

TEST(EnergyMonotone, DissipativeStationaryAndBlowUpRuns) {
    EXPECT_TRUE(energy_monotone(half_w_run()));
    EXPECT_TRUE(energy_monotone(blowup_run()));
    const auto g = make_graded_grid(3, 1024, 200.0, 2.0, 1.0);
    EvolveConfig c;
    c.dt_init = 1e-6;
    c.t_horizon = 0.01;
    EXPECT_TRUE(energy_monotone(simulate(ground_state(p31, g), p31, c)));
}

TEST(Duhamel, ZeroData) {
    EXPECT_EQ(duhamel_residual(simulate(RadialField::zeros(box_grid()), p31, long_run()), 0.0), 0.0);
}

TEST(Duhamel, SmallDataMatchesLinearFlow) {
    const auto t = smooth_run(1024, 1e-3, 1e-3, 0.5, 10);
    EXPECT_LE(duhamel_residual(t, 0.5), 1e-3);
}

TEST(Duhamel, ModerateDataConvergesInStride) {
    const auto coarse = smooth_run(1024, 1e-3, 1.0, 0.5, 50);
    const auto fine = smooth_run(1024, 1e-3, 1.0, 0.5, 10);
    const double rc = duhamel_residual(coarse, 0.5), rf = duhamel_residual(fine, 0.5);
    EXPECT_LE(rc, 0.05);
    EXPECT_LT(rf, rc);
}

TEST(Duhamel, RequiresCheckpointTimeAndEnoughIntervals) {
    const auto t = smooth_run(256, 1e-2, 0.5, 0.5, 1000000);
    ASSERT_EQ(t.checkpoints.size(), 2u);
    EXPECT_THROW(duhamel_residual(t, 0.123), DomainError);
    EXPECT_THROW(duhamel_residual(t, 0.5), DomainError);
}

TEST(Picard, ZeroData) {
    const auto g = make_graded_grid(3, 128, 40.0, 2.0, 1.0);
    EXPECT_EQ(picard_iterate(RadialField::zeros(g), 5, 0.01, p31).sup_norm(), 0.0);
}

TEST(Picard, AgreesWithImexAndContracts) {
    const auto g = make_graded_grid(3, 1024, 40.0, 2.0, 1.0);
    const auto u0 = gaussian_data(g, 0.1);
    const auto pr = picard_sequence(u0, 6, 0.01, p31, {2000, 1});
    EvolveConfig c{5e-6, 5e-6, 1e-12, 0.01, 100};
    const auto t = simulate(u0, p31, c);
    EXPECT_LE(detail::max_abs_diff(pr.iterates.back().values(), t.checkpoints.back().field.values()), 1e-4);
    const auto ratios = contraction_ratios(pr.increments, 1e-13);
    ASSERT_FALSE(ratios.empty());
    for (double r : ratios) EXPECT_LT(r, 0.5);
}

TEST(Picard, DivergenceIsReported) {
    const auto g = make_graded_grid(3, 512, 40.0, 2.0, 1.0);
    EXPECT_THROW(picard_sequence(gaussian_data(g, 3.0), 6, 0.01, p31), DomainError);
}

TEST(Invariance, MembershipAndGap) {
    const double l = box_lhs();
    for (const Trajectory* t : {&half_w_run(), &blowup_run()}) {
        EXPECT_FALSE(membership_violation(*t, l).has_value());
        EXPECT_TRUE(mminus_gap_holds(*t, l));
    }
    for (const auto& c : half_w_run().checkpoints) EXPECT_GE(c.j_gamma, 0.0);
}

TEST(Invariance, StationarityDriftIsSecondOrder) {
    std::vector<double> h, drift;
    for (std::size_t n : {256u, 512u, 1024u}) {
        const auto g = make_graded_grid(3, n, 200.0, 2.0, 1.0);
        const auto w = ground_state(p31, g);
        EvolveConfig c;
        c.dt_init = 1e-6;
        c.t_horizon = 1.0;
        c.checkpoint_stride = 1000000;
        const auto t = simulate(w, p31, c);
        h.push_back(1.0 / n);
        drift.push_back(detail::max_abs_diff(t.checkpoints.back().field.values(), w.values()));
    }
    EXPECT_NEAR(loglog_slope(h, drift), 2.0, 0.3);
}

TEST(Absorbing, LargeDataDissipates) {
    const ModelParams pa(3, 1.0, Sign::Absorbing);
    EvolveConfig c;
    c.t_horizon = 100.0;
    c.checkpoint_stride = 20;
    for (double a : {20.0, 50.0}) {
        const auto t = simulate(gaussian_data(box_grid(), a), pa, c);
        EXPECT_EQ(t.verdict, Verdict::Dissipative) << a;
        EXPECT_TRUE(energy_monotone(t));
    }
}
