#pragma once

// Nonlinear evolution u_t = Delta u +- |x|^{-gamma}|u|^{p-2}u by a first-order
// IMEX scheme (implicit heat, explicit source), trajectory recording, and the
// a-posteriori checks run on trajectories: energy identity, Duhamel residual,
// Picard iteration and membership invariance.

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/functionals.hpp"
#include "hslab/laplacian.hpp"
#include "hslab/propagator.hpp"

namespace hslab {

struct EvolveConfig {
    double dt_init = 1e-4;
    double dt_max = 1.0;
    double dt_min = 1e-12;
    double t_horizon = 100.0;
    std::size_t checkpoint_stride = 50;  // steps between checkpoints
    double blowup_sup_threshold = 1e6;
    double dissipation_rel_threshold = 1e-3;
    double stability_safety = 0.2;
    double dt_growth = 1.25;  // cap on dt_{k+1}/dt_k
    std::vector<double> lq_orders{9.0};
    std::size_t max_steps = 20'000'000;

    void validate() const {
        if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
            throw DomainError("evolve: need 0 < dt_min <= dt_init <= dt_max");
        if (!(t_horizon > 0.0)) throw DomainError("evolve: t_horizon must be positive");
        if (checkpoint_stride == 0) throw DomainError("evolve: checkpoint_stride must be >= 1");
        if (!(blowup_sup_threshold > 0.0 && dissipation_rel_threshold > 0.0 && stability_safety > 0.0))
            throw DomainError("evolve: thresholds must be positive");
        if (!(dt_growth >= 1.0)) throw DomainError("evolve: dt_growth must be >= 1");
        for (double q : lq_orders)
            if (!(q >= 1.0)) throw DomainError("evolve: recorded L^q orders need q >= 1");
    }
};

enum class Verdict { Dissipative, BlowUp, Undetermined };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Dissipative: return "Dissipative";
    case Verdict::BlowUp: return "BlowUp";
    case Verdict::Undetermined: return "Undetermined";
    }
    return "?";
}

struct Checkpoint {
    double t = 0.0;
    RadialField field;
    double e_gamma = 0.0;
    double j_gamma = 0.0;
    double h1_norm = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double sup = 0.0;
    double l2 = 0.0;
    std::map<double, double> lq_norms;
    double dt_used = 0.0;
    double dissipated_integral = 0.0;  // int_0^t ||u_t||^2_{L^2}
    std::size_t step = 0;
};

struct Trajectory {
    ModelParams params;
    EvolveConfig config;
    Boundary boundary;
    std::vector<Checkpoint> checkpoints;
    Verdict verdict = Verdict::Undetermined;
    std::string halt_reason;
    std::size_t steps = 0;
};

/// Thrown when the explicit source overflows; simulate() turns it into BlowUp.
struct BlowUpSignal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// +-rho_i |u_i|^{p-2} u_i, rho_i being the cell average of r^{-gamma} (the
/// pointwise r_i^{-gamma} up to O(h^2)). With this choice the explicit term is
/// the exact gradient of the discrete potential sum_i w^_i |u_i|^p / p.
inline std::vector<double> nonlinear_values(const RadialField& u, const ModelParams& params) {
    const auto rho = u.grid().singular_density();
    const double p = params.p(), s = params.sign_factor();
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = u[i];
        if (v == 0.0) continue;
        out[i] = s * rho[i] * std::pow(std::abs(v), p - 2.0) * v;
        if (!std::isfinite(out[i])) throw BlowUpSignal("nonlinear term overflowed");
    }
    return out;
}

inline RadialField nonlinear_term(const RadialField& u, const ModelParams& params) {
    check_grid_matches(u, params);
    auto v = nonlinear_values(u, params);
    for (std::size_t i = u.boundary().active_count(u.grid()); i < v.size(); ++i) v[i] = 0.0;
    return u.with_values(std::move(v));
}

namespace detail {

// (M + dt A) v = M (v + dt N(v)) in place.
inline void imex_update(const RadialGrid& g, const Boundary& b, std::vector<double>& v, std::span<const double> nl,
                        double dt) {
    const auto w = g.cell_weights_plain();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] * (v[i] + dt * nl[i]);
    ShiftedStiffness(g, b, dt).solve(v);
}

inline double stable_dt(const RadialField& u, const ModelParams& params, double safety) {
    const auto rho = u.grid().singular_density();
    const double p = params.p();
    double lip = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::abs(u[i]);
        if (a != 0.0) lip = std::max(lip, rho[i] * std::pow(a, p - 2.0));
    }
    return lip > 0.0 ? safety / lip : HUGE_VAL;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double l2_weighted(const RadialGrid& g, std::span<const double> v) {
    const auto w = g.cell_weights_plain();
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
    return std::sqrt(s);
}

}  // namespace detail

/// One step (I - dt Delta_h) u+ = u + dt N(u), in the conservative form
/// (M + dt A) u+ = M (u + dt N(u)).
inline RadialField imex_step(const RadialField& u, double dt, const ModelParams& params) {
    if (!(dt > 0.0)) throw DomainError("imex_step needs dt > 0");
    check_grid_matches(u, params);
    const auto nl = nonlinear_values(u, params);
    std::vector<double> v(u.values().begin(), u.values().end());
    detail::imex_update(u.grid(), u.boundary(), v, nl, dt);
    return u.with_values(std::move(v));
}

inline Checkpoint make_checkpoint(double t, const RadialField& u, const ModelParams& params,
                                  const EvolveConfig& cfg, double dt_used, double dissipated, std::size_t step) {
    Checkpoint c{.t = t, .field = u, .lq_norms = {}};
    c.kinetic = kinetic_norm_sq(u);
    c.potential = weighted_potential(u, params.p());
    const auto rep = report_from_parts(c.kinetic, c.potential, params, 1.0);
    c.e_gamma = rep.energy;
    c.j_gamma = rep.nehari;
    c.h1_norm = std::sqrt(c.kinetic);
    c.sup = u.sup_norm();
    c.l2 = lq_norm(u, 2.0);
    for (double q : cfg.lq_orders) c.lq_norms[q] = lq_norm(u, q);
    c.dt_used = dt_used;
    c.dissipated_integral = dissipated;
    c.step = step;
    return c;
}

/// Adaptive IMEX integration with checkpointing and outcome classification.
///
/// dt_k = min(dt_growth dt_{k-1}, dt_max, c_stab / max_i rho_i |u_i|^{p-2}),
/// truncated to land on t_horizon. BlowUp when the sup norm passes the
/// threshold, the step-size rule falls below dt_min or the source overflows.
/// Dissipative when, at a checkpoint, the H^1-dot norm is below
/// dissipation_rel_threshold times its initial value and has not increased
/// across the last 10 checkpoints.
inline Trajectory simulate(const RadialField& u0, const ModelParams& params, const EvolveConfig& cfg) {
    cfg.validate();
    check_grid_matches(u0, params);
    if (!u0.pinned_nodes_zero()) throw DomainError("simulate: initial data must vanish on pinned boundary nodes");

    Trajectory traj{params, cfg, u0.boundary(), {}, Verdict::Undetermined, {}, 0};
    const RadialGrid& g = u0.grid();
    const auto w = g.cell_weights_plain();
    traj.checkpoints.push_back(make_checkpoint(0.0, u0, params, cfg, 0.0, 0.0, 0));
    const double h1_0 = traj.checkpoints.front().h1_norm;
    if (h1_0 == 0.0) {
        traj.verdict = Verdict::Dissipative;
        traj.halt_reason = "zero data";
        return traj;
    }

    std::vector<double> v(u0.values().begin(), u0.values().end()), prev(v.size());
    RadialField cur = u0;
    double t = 0.0, dt_prev = cfg.dt_init / cfg.dt_growth, dissipated = 0.0;
    std::size_t step = 0;

    auto settle = [&](Verdict verdict, std::string why) {
        traj.verdict = verdict;
        traj.halt_reason = std::move(why);
        traj.steps = step;
    };
    auto dissipation_reached = [&] {
        const auto& cps = traj.checkpoints;
        if (cps.back().h1_norm >= cfg.dissipation_rel_threshold * h1_0 || cps.size() < 10) return false;
        for (std::size_t k = cps.size() - 9; k < cps.size(); ++k)
            if (cps[k].h1_norm > cps[k - 1].h1_norm) return false;
        return true;
    };

    while (true) {
        const double rule = detail::stable_dt(cur, params, cfg.stability_safety);
        if (rule < cfg.dt_min) {
            settle(Verdict::BlowUp, "dt collapsed below dt_min");
            if (traj.checkpoints.back().step != step)
                traj.checkpoints.push_back(make_checkpoint(t, cur, params, cfg, dt_prev, dissipated, step));
            return traj;
        }
        double dt = std::min({rule, cfg.dt_max, cfg.dt_growth * dt_prev});
        const bool last = t + dt >= cfg.t_horizon * (1.0 - 1e-14);
        if (last) dt = cfg.t_horizon - t;

        std::copy(v.begin(), v.end(), prev.begin());
        try {
            const auto nl = nonlinear_values(cur, params);
            detail::imex_update(g, traj.boundary, v, nl, dt);
        } catch (const BlowUpSignal&) {
            settle(Verdict::BlowUp, "nonlinear term overflowed");
            if (traj.checkpoints.back().step != step)
                traj.checkpoints.push_back(make_checkpoint(t, cur, params, cfg, dt_prev, dissipated, step));
            return traj;
        }
        double sup = 0.0, inc = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) finite = false;
            sup = std::max(sup, std::abs(v[i]));
            const double dv = v[i] - prev[i];
            inc += w[i] * dv * dv;
        }
        if (!finite) {
            settle(Verdict::BlowUp, "solution overflowed");
            if (traj.checkpoints.back().step != step)
                traj.checkpoints.push_back(make_checkpoint(t, cur, params, cfg, dt_prev, dissipated, step));
            return traj;
        }
        t = last ? cfg.t_horizon : t + dt;
        dissipated += inc / dt;
        dt_prev = dt;
        ++step;
        cur = RadialField(u0.grid_ptr(), v, traj.boundary);

        const bool blown = sup > cfg.blowup_sup_threshold;
        if (blown || last || step % cfg.checkpoint_stride == 0 || step >= cfg.max_steps)
            traj.checkpoints.push_back(make_checkpoint(t, cur, params, cfg, dt, dissipated, step));
        if (blown) {
            settle(Verdict::BlowUp, "sup norm exceeded threshold");
            return traj;
        }
        if (traj.checkpoints.back().step == step && dissipation_reached()) {
            settle(Verdict::Dissipative, "H1 norm below dissipation threshold");
            return traj;
        }
        if (last) {
            settle(Verdict::Undetermined, "horizon reached");
            return traj;
        }
        if (step >= cfg.max_steps) {
            settle(Verdict::Undetermined, "step budget exhausted");
            return traj;
        }
    }
}

/// max_k |E(t_k) + int_{t_0}^{t_k} ||u_t||^2 - E(t_0)| / max(1, |E(t_0)|), with t_0
/// the first checkpoint after t = 0.
inline double energy_identity_residual(const Trajectory& traj) {
    const auto& cps = traj.checkpoints;
    if (cps.size() < 3) return 0.0;
    const Checkpoint& c0 = cps[1];
    const double scale = std::max(1.0, std::abs(c0.e_gamma));
    double res = 0.0;
    for (std::size_t k = 2; k < cps.size(); ++k) {
        const double diss = cps[k].dissipated_integral - c0.dissipated_integral;
        res = std::max(res, std::abs(cps[k].e_gamma + diss - c0.e_gamma) / scale);
    }
    return res;
}

inline constexpr double kEnergyMonotoneSlack = 1e-8;

inline bool energy_monotone(const Trajectory& traj) {
    const auto& cps = traj.checkpoints;
    if (cps.empty()) return true;
    const double slack = kEnergyMonotoneSlack * std::max(1.0, std::abs(cps.front().e_gamma));
    for (std::size_t k = 1; k < cps.size(); ++k)
        if (cps[k].e_gamma > cps[k - 1].e_gamma + slack) return false;
    return true;
}

namespace detail {

// Accumulates L_j = S_j...S_0 u_0 and the trapezoidal Duhamel sum
// D_{j+1} = S_j D_j + h_j/2 (S_j N_j + N_{j+1}), where S_j is the heat
// propagator over [t_j, t_{j+1}] realised by `substeps` Backward Euler steps.
class DuhamelAccumulator {
public:
    DuhamelAccumulator(const RadialGrid& g, const Boundary& b, std::vector<double> u0)
        : g_(&g), b_(b), lin_(std::move(u0)), duh_(lin_.size(), 0.0) {}

    void advance(double h, std::size_t substeps, const std::vector<double>& n_left,
                 const std::vector<double>& n_right) {
        const LinearPropagator prop(*g_, b_, h / static_cast<double>(substeps));
        std::vector<double> sn = n_left;
        for (std::size_t k = 0; k < substeps; ++k) {
            prop.apply(lin_);
            prop.apply(duh_);
            prop.apply(sn);
        }
        for (std::size_t i = 0; i < duh_.size(); ++i) duh_[i] += 0.5 * h * (sn[i] + n_right[i]);
    }

    std::vector<double> value() const {
        std::vector<double> out(lin_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += duh_[i];
        return out;
    }

private:
    const RadialGrid* g_;
    Boundary b_;
    std::vector<double> lin_, duh_;
};

inline std::vector<double> pinned_zeroed(std::vector<double> v, const RadialGrid& g, const Boundary& b) {
    for (std::size_t i = b.active_count(g); i < v.size(); ++i) v[i] = 0.0;
    return v;
}

}  // namespace detail

/// Relative L^2 distance between the stored u(t_check) and the mild-solution
/// formula e^{t Delta} u_0 + int_0^t e^{(t-s) Delta} N(u(s)) ds, the integral being
/// the trapezoidal rule on the checkpoint times. Each checkpoint interval is
/// propagated with as many Backward Euler substeps as the run took there.
inline double duhamel_residual(const Trajectory& traj, double t_check) {
    const auto& cps = traj.checkpoints;
    std::size_t last = cps.size();
    for (std::size_t k = 0; k < cps.size(); ++k)
        if (std::abs(cps[k].t - t_check) <= 1e-12 * std::max(1.0, t_check)) last = k;
    if (!cps.empty() && cps.front().field.sup_norm() == 0.0) return 0.0;  // zero solution
    if (last == cps.size()) throw DomainError("duhamel_residual: t_check is not a checkpoint time");
    if (last < 8) throw DomainError("duhamel_residual: need at least 8 quadrature intervals in [0, t_check]");

    const RadialGrid& g = cps.front().field.grid();
    const Boundary& b = traj.boundary;
    auto nl = [&](std::size_t k) {
        return detail::pinned_zeroed(nonlinear_values(cps[k].field, traj.params), g, b);
    };
    const auto& u0 = cps.front().field.values();
    detail::DuhamelAccumulator acc(g, b, std::vector<double>(u0.begin(), u0.end()));
    auto n_left = nl(0);
    for (std::size_t k = 0; k < last; ++k) {
        auto n_right = nl(k + 1);
        const std::size_t sub = std::max<std::size_t>(1, cps[k + 1].step - cps[k].step);
        acc.advance(cps[k + 1].t - cps[k].t, sub, n_left, n_right);
        n_left = std::move(n_right);
    }
    const auto pred = acc.value();
    const auto& stored = cps[last].field.values();
    std::vector<double> diff(pred.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pred[i] - stored[i];
    const double denom = detail::l2_weighted(g, stored);
    const double num = detail::l2_weighted(g, diff);
    if (denom == 0.0) return num;
    return num / denom;
}

struct PicardOptions {
    std::size_t time_steps = 100;  // uniform mesh on [0, t_span]
    std::size_t substeps = 1;      // Backward Euler steps per mesh interval
};

struct PicardResult {
    std::vector<RadialField> iterates;  // v_1, ..., v_n at t_span
    std::vector<double> increments;     // sup |v_{k+1} - v_k| over the whole mesh
};

/// Picard iteration for the mild formulation on a fixed time mesh:
/// v_1 = e^{t Delta} u_0, v_{k+1} = e^{t Delta} u_0 + int_0^t e^{(t-s) Delta} N(v_k(s)) ds.
/// Throws when an iterate's sup norm more than doubles relative to v_1, which
/// signals that t_span is outside the contraction regime.
inline PicardResult picard_sequence(const RadialField& u0, std::size_t n_iters, double t_span,
                                    const ModelParams& params, const PicardOptions& opt = {}) {
    if (n_iters < 1) throw DomainError("picard: need at least one iterate");
    if (!(t_span > 0.0) || opt.time_steps < 1 || opt.substeps < 1)
        throw DomainError("picard: need t_span > 0 and a nonempty time mesh");
    check_grid_matches(u0, params);
    if (!u0.pinned_nodes_zero()) throw DomainError("picard: initial data must vanish on pinned boundary nodes");
    const RadialGrid& g = u0.grid();
    const Boundary& b = u0.boundary();
    const std::size_t m = opt.time_steps;
    const double h = t_span / static_cast<double>(m);
    const LinearPropagator prop(g, b, h / static_cast<double>(opt.substeps));

    std::vector<std::vector<double>> path(m + 1);
    path[0].assign(u0.values().begin(), u0.values().end());
    for (std::size_t k = 0; k < m; ++k) {
        path[k + 1] = path[k];
        for (std::size_t s = 0; s < opt.substeps; ++s) prop.apply(path[k + 1]);
    }
    const std::vector<std::vector<double>> linear = path;

    PicardResult res;
    res.iterates.push_back(u0.with_values(path[m]));
    double sup1 = 0.0;
    for (const auto& p : path)
        for (double x : p) sup1 = std::max(sup1, std::abs(x));

    auto nl = [&](const std::vector<double>& v) {
        return detail::pinned_zeroed(nonlinear_values(u0.with_values(v), params), g, b);
    };
    for (std::size_t it = 1; it < n_iters; ++it) {
        std::vector<std::vector<double>> next(m + 1);
        next[0] = path[0];
        std::vector<double> duh(g.size(), 0.0), n_left = nl(path[0]);
        for (std::size_t k = 0; k < m; ++k) {
            auto n_right = nl(path[k + 1]);
            std::vector<double> sn = n_left;
            for (std::size_t s = 0; s < opt.substeps; ++s) {
                prop.apply(duh);
                prop.apply(sn);
            }
            for (std::size_t i = 0; i < duh.size(); ++i) duh[i] += 0.5 * h * (sn[i] + n_right[i]);
            next[k + 1] = linear[k + 1];
            for (std::size_t i = 0; i < duh.size(); ++i) next[k + 1][i] += duh[i];
            n_left = std::move(n_right);
        }
        double inc = 0.0, sup = 0.0;
        for (std::size_t k = 0; k <= m; ++k) {
            inc = std::max(inc, detail::max_abs_diff(next[k], path[k]));
            for (double x : next[k]) sup = std::max(sup, std::abs(x));
        }
        if (sup > 2.0 * sup1) throw DomainError("picard: iterates diverged; t_span is outside the contraction regime");
        res.increments.push_back(inc);
        path = std::move(next);
        res.iterates.push_back(u0.with_values(path[m]));
    }
    return res;
}

inline RadialField picard_iterate(const RadialField& u0, std::size_t n_iters, double t_span,
                                  const ModelParams& params, const PicardOptions& opt = {}) {
    return picard_sequence(u0, n_iters, t_span, params, opt).iterates.back();
}

/// Ratios increment_{k+1}/increment_k, skipping pairs whose earlier increment
/// is already at round-off level (below floor).
inline std::vector<double> contraction_ratios(const std::vector<double>& increments, double floor) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < increments.size(); ++k)
        if (increments[k] > floor) out.push_back(increments[k + 1] / increments[k]);
    return out;
}

/// Membership of every checkpoint, classified against l_hs.
inline std::vector<Membership> membership_history(const Trajectory& traj, double l_hs) {
    std::vector<Membership> out;
    out.reserve(traj.checkpoints.size());
    for (const auto& c : traj.checkpoints) out.push_back(classify(c.kinetic, c.e_gamma, c.j_gamma, l_hs));
    return out;
}

/// Index of the first checkpoint whose class differs from the initial one
/// (Zero counts as MPlus, the dissipated end state); nullopt when none does.
inline std::optional<std::size_t> membership_violation(const Trajectory& traj, double l_hs) {
    const auto hist = membership_history(traj, l_hs);
    if (hist.empty()) return std::nullopt;
    auto norm = [](Membership m) { return m == Membership::Zero ? Membership::MPlus : m; };
    const Membership m0 = norm(hist.front());
    if (m0 == Membership::AboveThreshold) return std::nullopt;
    for (std::size_t k = 1; k < hist.size(); ++k)
        if (norm(hist[k]) != m0) return k;
    return std::nullopt;
}

/// On MMinus checkpoints: J < -2 (l_hs - E) (1 - slack). Returns true when
/// every MMinus checkpoint satisfies it.
inline bool mminus_gap_holds(const Trajectory& traj, double l_hs, double slack = 0.1) {
    for (const auto& c : traj.checkpoints) {
        if (classify(c.kinetic, c.e_gamma, c.j_gamma, l_hs) != Membership::MMinus) continue;
        if (!(c.j_gamma < -2.0 * (l_hs - c.e_gamma) * (1.0 - slack))) return false;
    }
    return true;
}

}  // namespace hslab
