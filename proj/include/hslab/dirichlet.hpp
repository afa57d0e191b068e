#pragma once

// Dirichlet problems on balls centred at the origin: the ball solver, the
// comparison principle between nested balls (co-evolution and Picard
// iterates) and the mountain-pass level of a ball.

#include <cmath>
#include <string>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"

namespace hslab {

/// Ball B_radius on a shared grid; nodes with r >= radius are pinned to zero.
class BallDomain {
public:
    BallDomain(GridPtr grid, double radius) : grid_(std::move(grid)), radius_(radius) {
        if (!grid_) throw std::invalid_argument("BallDomain needs a grid");
        boundary().active_count(*grid_);  // validates radius against the grid
    }

    /// Grid truncated at the ball radius.
    static BallDomain make(int d, std::size_t n, double radius, double grading, double gamma) {
        return {make_graded_grid(d, n, radius, grading, gamma), radius};
    }

    double radius() const { return radius_; }
    const GridPtr& grid() const { return grid_; }
    Boundary boundary() const { return Boundary::ball(radius_); }

    /// True when u vanishes at every node on or outside the sphere.
    bool vanishes_on_boundary(const RadialField& u) const {
        for (std::size_t i = boundary().active_count(*grid_); i < u.size(); ++i)
            if (u[i] != 0.0) return false;
        return true;
    }

private:
    GridPtr grid_;
    double radius_;
};

inline void require_same_grid(const RadialField& u, const BallDomain& dom) {
    if (u.grid_ptr() != dom.grid()) throw DomainError("field and ball domain live on different grids");
}

/// The IMEX solver with u = 0 imposed on r >= radius.
inline Trajectory dirichlet_simulate(const RadialField& u0, const BallDomain& dom, const ModelParams& params,
                                     const EvolveConfig& cfg) {
    require_same_grid(u0, dom);
    if (!dom.vanishes_on_boundary(u0)) throw DomainError("Dirichlet data must vanish on the boundary of the ball");
    return simulate(u0.with_boundary(dom.boundary()), params, cfg);
}

/// W_mu(r) - W_mu(radius) on the ball, W_mu = mu^{(d-2)/2} W(mu r).
inline RadialField ball_ground_state_trial(const ModelParams& params, const BallDomain& dom, double mu) {
    const ModelParams foc = params.with_sign(Sign::Focusing);
    const GroundStateSpec spec(foc);
    const double e = 2.0 - params.gamma(), amp = std::pow(mu, 0.5 * (params.dim() - 2));
    const double edge = amp * spec(mu * dom.radius(), e);
    return RadialField::sample(
        dom.grid(), [&](double r) { return std::max(0.0, amp * spec(mu * r, e) - edge); }, dom.boundary());
}

/// Mountain-pass level of the ball: the least ray maximum max_lambda E(lambda v)
/// over the concentrating trial family v = W_mu - W_mu(radius), mu = 1, 2, 4, ...
/// Each trial value bounds the level from above, and the bound tends to the
/// whole-space l_HS as mu grows.
inline double ball_mountain_pass_energy(const ModelParams& params, const BallDomain& dom,
                                        std::size_t doublings = 7) {
    const ModelParams foc = params.with_sign(Sign::Focusing);
    double best = HUGE_VAL, mu = 1.0;
    for (std::size_t k = 0; k < doublings; ++k, mu *= 2.0)
        best = std::min(best, ray_maximum_energy(ball_ground_state_trial(foc, dom, mu), foc));
    return best;
}

struct ComparisonReport {
    double max_excess = 0.0;  // max over steps and nodes of (|u1| - u2)_+
    double time_of_max = 0.0;
    double r1 = 0.0, r2 = 0.0;
    Verdict verdict_small = Verdict::Undetermined;
    Verdict verdict_big = Verdict::Undetermined;
    double t_end = 0.0;
    std::size_t steps = 0;
};

namespace detail {

inline void check_comparison_hypotheses(const RadialField& a, const BallDomain& da, const RadialField& b,
                                        const BallDomain& db, const ModelParams& params) {
    require_focusing(params, "comparison principle");
    require_same_grid(a, da);
    require_same_grid(b, db);
    if (da.grid() != db.grid()) throw DomainError("comparison needs both balls on one grid");
    if (da.radius() > db.radius()) throw DomainError("comparison needs R1 <= R2");
    if (!da.vanishes_on_boundary(a) || !db.vanishes_on_boundary(b))
        throw DomainError("comparison data must vanish on the ball boundaries");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] < 0.0) throw DomainError("comparison needs nonnegative dominating data");
        if (std::abs(a[i]) > b[i]) throw DomainError("comparison needs |u0_small| <= u0_big pointwise");
    }
}

inline double excess(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]) - b[i]);
    return m;
}

}  // namespace detail

/// Co-evolves u_1 on B_{R1} and u_2 on B_{R2} with a shared step size (the
/// smaller of the two stability rules) and records (|u_1| - u_2)_+. The run
/// ends once each solution has blown up or lost all but the dissipation
/// fraction of its initial H^1 norm.
inline ComparisonReport comparison_check(const RadialField& u0_small, const BallDomain& small,
                                         const RadialField& u0_big, const BallDomain& big,
                                         const ModelParams& params, const EvolveConfig& cfg) {
    cfg.validate();
    check_grid_matches(u0_small, params);
    detail::check_comparison_hypotheses(u0_small, small, u0_big, big, params);
    const Boundary b1 = small.boundary(), b2 = big.boundary();
    RadialField u1 = u0_small.with_boundary(b1), u2 = u0_big.with_boundary(b2);

    ComparisonReport rep;
    rep.r1 = small.radius();
    rep.r2 = big.radius();
    rep.max_excess = std::max(0.0, detail::excess(u1.values(), u2.values()));
    double t = 0.0, dt_prev = cfg.dt_init / cfg.dt_growth;
    bool done1 = false, done2 = false;
    auto blown = [&](const RadialField& u) { return u.sup_norm() > cfg.blowup_sup_threshold; };
    const double h1_small = std::sqrt(kinetic_norm_sq(u1)), h1_big = std::sqrt(kinetic_norm_sq(u2));
    auto faded = [&](const RadialField& u, double h1_0) {
        return std::sqrt(kinetic_norm_sq(u)) < cfg.dissipation_rel_threshold * h1_0;
    };
    bool faded1 = h1_small == 0.0, faded2 = h1_big == 0.0;

    while (!((done1 || faded1) && (done2 || faded2)) && rep.steps < cfg.max_steps) {
        const double rule = std::min(done1 ? HUGE_VAL : detail::stable_dt(u1, params, cfg.stability_safety),
                                     done2 ? HUGE_VAL : detail::stable_dt(u2, params, cfg.stability_safety));
        if (rule < cfg.dt_min) {
            if (!done1) rep.verdict_small = Verdict::BlowUp;
            if (!done2) rep.verdict_big = Verdict::BlowUp;
            break;
        }
        double dt = std::min({rule, cfg.dt_max, cfg.dt_growth * dt_prev});
        const bool last = t + dt >= cfg.t_horizon * (1.0 - 1e-14);
        if (last) dt = cfg.t_horizon - t;
        try {
            if (!done1) u1 = imex_step(u1, dt, params);
            if (!done2) u2 = imex_step(u2, dt, params);
        } catch (const std::exception&) {
            if (!done1) rep.verdict_small = Verdict::BlowUp;
            if (!done2) rep.verdict_big = Verdict::BlowUp;
            break;
        }
        t = last ? cfg.t_horizon : t + dt;
        dt_prev = dt;
        ++rep.steps;
        const double ex = detail::excess(u1.values(), u2.values());
        if (ex > rep.max_excess) {
            rep.max_excess = ex;
            rep.time_of_max = t;
        }
        if (!done1 && blown(u1)) done1 = true, rep.verdict_small = Verdict::BlowUp;
        if (!done2 && blown(u2)) done2 = true, rep.verdict_big = Verdict::BlowUp;
        faded1 = faded1 || (!done1 && faded(u1, h1_small));
        faded2 = faded2 || (!done2 && faded(u2, h1_big));
        if (last) break;
    }
    if (faded1 && !done1) rep.verdict_small = Verdict::Dissipative;
    if (faded2 && !done2) rep.verdict_big = Verdict::Dissipative;
    rep.t_end = t;
    return rep;
}

/// Picard iterates v_1, ..., v_n at t_span for the Dirichlet problem on dom.
inline std::vector<RadialField> picard_comparison_sequence(const RadialField& u0, const BallDomain& dom,
                                                           std::size_t n, double t_span,
                                                           const ModelParams& params,
                                                           const PicardOptions& opt = {}) {
    require_same_grid(u0, dom);
    if (!dom.vanishes_on_boundary(u0)) throw DomainError("Dirichlet data must vanish on the boundary of the ball");
    return picard_sequence(u0.with_boundary(dom.boundary()), n, t_span, params, opt).iterates;
}

/// Largest (|v_{1,k}| - v_{2,k})_+ over iterates k and nodes.
inline double picard_ordering_violation(const std::vector<RadialField>& small, const std::vector<RadialField>& big) {
    if (small.size() != big.size()) throw std::invalid_argument("iterate sequences differ in length");
    double m = 0.0;
    for (std::size_t k = 0; k < small.size(); ++k)
        m = std::max(m, detail::excess(small[k].values(), big[k].values()));
    return m;
}

}  // namespace hslab
