#include <gtest/gtest.h>

#include <cmath>

#include "hslab/dirichlet.hpp"
#include "hslab/io.hpp"

using namespace hslab;

namespace {

const ModelParams p31(3, 1.0);

EvolveConfig ball_run(std::size_t stride = 100) {
    EvolveConfig c;
    c.dt_max = 1.0;
    c.t_horizon = 1e4;
    c.checkpoint_stride = stride;
    return c;
}

EvolveConfig horizon_one() {
    EvolveConfig c;
    c.t_horizon = 1.0;
    c.dt_max = 0.01;
    return c;
}

double whole_space_l() {
    static const double l = mountain_pass_energy(p31, make_graded_grid(3, 4096, 200.0, 2.0, 1.0));
    return l;
}

const BallDomain& ball20() {
    static const BallDomain b = BallDomain::make(3, 1024, 20.0, 1.5, 1.0);
    return b;
}

struct Nested {
    GridPtr grid = make_graded_grid(3, 512, 10.0, 1.5, 1.0);
    BallDomain small{grid, 5.0}, big{grid, 10.0};
    RadialField big_data(double a) const { return ball_ground_state_trial(p31, big, 4.0).scaled(a); }
    RadialField small_data(double a) const {
        const auto b = big_data(a);
        std::vector<double> v(b.values().begin(), b.values().end());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= smooth_cutoff(2.0 * grid->node(i) / 5.0);
        return RadialField(grid, std::move(v), small.boundary());
    }
};

double sup_diff(const RadialField& a, const RadialField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(BallDomain, RejectsRadiusBeyondGrid) {
    EXPECT_THROW(BallDomain(make_graded_grid(3, 64, 10.0, 1.5, 1.0), 20.0), DomainError);
    EXPECT_THROW(BallDomain(nullptr, 1.0), std::invalid_argument);
    EXPECT_NO_THROW(BallDomain(make_graded_grid(3, 64, 10.0, 1.5, 1.0), 5.0));
}

TEST(DirichletSimulate, ZeroData) {
    const auto t = dirichlet_simulate(RadialField::zeros(ball20().grid()).with_boundary(ball20().boundary()),
                                      ball20(), p31, ball_run());
    EXPECT_EQ(t.verdict, Verdict::Dissipative);
}

TEST(DirichletSimulate, NonzeroBoundaryRejected) {
    const auto one = RadialField::sample(ball20().grid(), [](double) { return 1.0; });
    EXPECT_THROW(dirichlet_simulate(one, ball20(), p31, ball_run()), DomainError);
    const auto other = BallDomain::make(3, 1024, 20.0, 1.5, 1.0);
    EXPECT_THROW(dirichlet_simulate(ball_ground_state_trial(p31, other, 16.0), ball20(), p31, ball_run()),
                 DomainError);
}

TEST(DirichletSimulate, HalfGroundStateDissipates) {
    const auto u = ball_ground_state_trial(p31, ball20(), 16.0).scaled(0.5);
    const auto r = evaluate_functionals(u, p31, whole_space_l());
    ASSERT_LT(r.energy, whole_space_l());
    ASSERT_GT(r.nehari, 0.0);
    EXPECT_EQ(dirichlet_simulate(u, ball20(), p31, ball_run()).verdict, Verdict::Dissipative);
}

TEST(DirichletSimulate, AboveGroundStateBlowsUp) {
    const auto u = ball_ground_state_trial(p31, ball20(), 16.0).scaled(1.3);
    const auto r = evaluate_functionals(u, p31, whole_space_l());
    ASSERT_LT(r.energy, whole_space_l());
    ASSERT_LT(r.nehari, 0.0);
    EXPECT_EQ(dirichlet_simulate(u, ball20(), p31, ball_run()).verdict, Verdict::BlowUp);
}

TEST(DirichletSimulate, DichotomyOnBall) {
    for (double a : {0.3, 0.5, 0.8, 1.1, 1.2, 1.5}) {
        const auto u = ball_ground_state_trial(p31, ball20(), 16.0).scaled(a);
        const auto r = evaluate_functionals(u, p31, whole_space_l());
        const Verdict expected = a < 1.0 ? Verdict::Dissipative : Verdict::BlowUp;
        EXPECT_EQ(r.membership, a < 1.0 ? Membership::MPlus : Membership::MMinus) << a;
        EXPECT_EQ(dirichlet_simulate(u, ball20(), p31, ball_run()).verdict, expected) << a;
    }
}

TEST(DirichletSimulate, BoundaryExactAtEveryStep) {
    for (double a : {0.5, 1.2}) {
        const auto t =
            dirichlet_simulate(ball_ground_state_trial(p31, ball20(), 16.0).scaled(a), ball20(), p31, ball_run(1));
        for (const auto& c : t.checkpoints) ASSERT_TRUE(ball20().vanishes_on_boundary(c.field)) << "t = " << c.t;
    }
}

TEST(BallThreshold, MatchesWholeSpace) {
    for (double R : {100.0, 200.0}) {
        const auto dom = BallDomain::make(3, 4096, R, 2.0, 1.0);
        const double lb = ball_mountain_pass_energy(p31, dom);
        EXPECT_NEAR(lb / whole_space_l(), 1.0, 1e-2) << R;
    }
}

TEST(Comparison, IdenticalData) {
    const Nested s;
    const auto u = s.big_data(0.5);
    const auto rep = comparison_check(u, s.big, u, s.big, p31, horizon_one());
    EXPECT_LE(rep.max_excess, 1e-12);
}

TEST(Comparison, NestedBalls) {
    const Nested s;
    const auto rep = comparison_check(s.small_data(0.5), s.small, s.big_data(0.5), s.big, p31, horizon_one());
    EXPECT_LE(rep.max_excess, 1e-8);
    EXPECT_EQ(rep.r1, 5.0);
    EXPECT_EQ(rep.r2, 10.0);
    const auto j = to_json(rep);
    for (const char* k : {"max_excess", "time_of_max", "radii", "verdicts"}) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Comparison, SameDataOnLargerBallDominates) {
    const Nested s;
    const auto u = s.small_data(0.8);
    const auto rep = comparison_check(u, s.small, u.with_boundary(s.big.boundary()), s.big, p31, horizon_one());
    EXPECT_LE(rep.max_excess, 1e-8);
}

TEST(Comparison, SignFlipped) {
    const Nested s;
    const auto u = s.big_data(0.5);
    const auto rep = comparison_check(u.scaled(-1.0), s.big, u, s.big, p31, horizon_one());
    EXPECT_LE(rep.max_excess, 1e-12);
}

TEST(Comparison, HypothesisErrors) {
    const Nested s;
    const auto big = s.big_data(0.5), small = s.small_data(0.5);
    EXPECT_THROW(comparison_check(big, s.big, small, s.small, p31, horizon_one()), DomainError);
    EXPECT_THROW(comparison_check(s.small_data(0.6), s.small, big, s.big, p31, horizon_one()), DomainError);
    EXPECT_THROW(comparison_check(small.scaled(-1.0), s.small, big.scaled(-1.0), s.big, p31, horizon_one()),
                 DomainError);
    EXPECT_THROW(comparison_check(small, s.small, big, s.big, p31.with_sign(Sign::Absorbing), horizon_one()),
                 DomainError);
    const auto other = make_graded_grid(3, 512, 10.0, 1.5, 1.0);
    const BallDomain other_big(other, 10.0);
    EXPECT_THROW(comparison_check(small, s.small, ball_ground_state_trial(p31, other_big, 4.0), other_big, p31,
                                  horizon_one()),
                 DomainError);
}

TEST(PicardComparison, ZeroData) {
    const Nested s;
    const auto it = picard_comparison_sequence(RadialField::zeros(s.grid).with_boundary(s.big.boundary()), s.big, 4,
                                               0.01, p31);
    ASSERT_EQ(it.size(), 4u);
    for (const auto& v : it) EXPECT_EQ(v.sup_norm(), 0.0);
}

TEST(PicardComparison, IteratesOrdered) {
    const Nested s;
    const auto a = picard_comparison_sequence(s.small_data(0.1), s.small, 4, 0.01, p31);
    const auto b = picard_comparison_sequence(s.big_data(0.1), s.big, 4, 0.01, p31);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_LE(picard_ordering_violation(a, b), 1e-10);
}

TEST(PicardComparison, Contraction) {
    const Nested s;
    const auto it = picard_comparison_sequence(s.big_data(0.1), s.big, 5, 0.01, p31);
    std::vector<double> d;
    for (std::size_t k = 1; k < it.size(); ++k) d.push_back(sup_diff(it[k], it[k - 1]));
    for (std::size_t k = 1; k < d.size(); ++k)
        if (d[k - 1] > 1e-14) {
            EXPECT_LT(d[k] / d[k - 1], 0.5) << k;
        }
}

TEST(PicardComparison, LengthMismatchRejected) {
    const Nested s;
    const auto a = picard_comparison_sequence(s.small_data(0.1), s.small, 3, 0.01, p31);
    const auto b = picard_comparison_sequence(s.big_data(0.1), s.big, 4, 0.01, p31);
    EXPECT_THROW(picard_ordering_violation(a, b), std::invalid_argument);
}
