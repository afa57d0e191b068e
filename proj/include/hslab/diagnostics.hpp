#pragma once

// Kato-norm monitoring and the localized concavity functional used in the
// blow-up argument: cutoff mass, the cutoff Nehari identity, T_R and the
// certificate I'' I - (1 + alpha) I'^2 > 0.

#include <boost/rational.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"
#include "hslab/propagator.hpp"

namespace hslab {

using Rational = boost::rational<long long>;

/// Open window (q_c, q_upper) of admissible Kato exponents:
/// 1/q_c - 1/(d(p-1)) < 1/q < 1/q_c. q_upper is infinite once the lower
/// bound on 1/q drops to 0 or below (d = 3 with gamma >= 3/2).
inline std::pair<double, double> admissible_q_window(const ModelParams& params) {
    const double inv_upper = 1.0 / params.q_c() - 1.0 / (params.dim() * (params.p() - 1.0));
    return {params.q_c(), inv_upper > 0.0 ? 1.0 / inv_upper : kInfinity};
}

/// The window in 1/q, exact for rational gamma: (max(0, 1/q_c - 1/(d(p-1))), 1/q_c).
inline std::pair<Rational, Rational> admissible_inverse_q_window_exact(int d, Rational gamma) {
    if (d < 3) throw DomainError("dimension d must be >= 3");
    if (gamma < Rational(0) || gamma >= Rational(2)) throw DomainError("gamma must lie in [0, 2)");
    const Rational inv_qc(d - 2, 2 * d);
    const Rational p = Rational(2) * (Rational(d) - gamma) / Rational(d - 2);
    const Rational lower = inv_qc - Rational(1) / (Rational(d) * (p - Rational(1)));
    return {lower > Rational(0) ? lower : Rational(0), inv_qc};
}

struct KatoConfig {
    double q;
    double alpha = 0.0;

    /// Rejects q on or outside the admissible window.
    KatoConfig(const ModelParams& params, double q_, double alpha_ = 0.0) : q(q_), alpha(alpha_) {
        const auto [lo, hi] = admissible_q_window(params);
        if (!(q > lo && q < hi))
            throw DomainError("Kato exponent q must lie strictly inside (" + std::to_string(lo) + ", " +
                              std::to_string(hi) + ")");
        if (!(alpha >= 0.0)) throw DomainError("Kato alpha must be >= 0");
    }

    /// 1/q at the midpoint of the window in 1/q (q = 9 for d = 3, gamma = 1).
    static KatoConfig midpoint(const ModelParams& params) {
        const auto [lo, hi] = admissible_q_window(params);
        return {params, 2.0 / (1.0 / lo + 1.0 / hi)};
    }

    double time_exponent(const ModelParams& params) const {
        return 0.5 * params.dim() * (1.0 / params.q_c() - 1.0 / q) + alpha;
    }
};

/// t^{(d/2)(1/q_c - 1/q) + alpha} ||u(t)||_{L^q} at every checkpoint (0 at t = 0).
inline std::vector<double> kato_profile(const Trajectory& traj, const KatoConfig& cfg) {
    const double e = cfg.time_exponent(traj.params);
    std::vector<double> out;
    out.reserve(traj.checkpoints.size());
    for (const auto& c : traj.checkpoints) {
        const auto it = c.lq_norms.find(cfg.q);
        if (it == c.lq_norms.end()) throw DomainError("kato_norm: L^q norm for this q was not recorded");
        out.push_back(c.t > 0.0 ? std::pow(c.t, e) * it->second : 0.0);
    }
    return out;
}

/// Max of the Kato profile over checkpoints: a lower bound for the true sup.
inline double kato_norm(const Trajectory& traj, const KatoConfig& cfg) {
    double m = 0.0;
    for (double v : kato_profile(traj, cfg)) m = std::max(m, v);
    return m;
}

struct KatoSettling {
    double peak = 0.0;
    double final_value = 0.0;
    bool settled = false;  // final <= 1e-2 peak
    std::optional<std::size_t> trigger;  // first checkpoint with h1 below the dissipation threshold
    bool grows_after_trigger = false;    // running sup increased after the trigger
};

inline KatoSettling kato_settling(const Trajectory& traj, const KatoConfig& cfg, double settle_ratio = 1e-2) {
    const auto prof = kato_profile(traj, cfg);
    KatoSettling s;
    if (prof.empty()) return s;
    const double h1_0 = traj.checkpoints.front().h1_norm;
    for (std::size_t k = 0; k < prof.size(); ++k) {
        if (!s.trigger && h1_0 > 0.0 &&
            traj.checkpoints[k].h1_norm < traj.config.dissipation_rel_threshold * h1_0)
            s.trigger = k;
        if (s.trigger && k > *s.trigger && prof[k] > s.peak) s.grows_after_trigger = true;
        s.peak = std::max(s.peak, prof[k]);
    }
    s.final_value = prof.back();
    s.settled = s.final_value <= settle_ratio * s.peak;
    return s;
}

/// Linear heat flow recorded like a nonlinear run: Backward Euler with dt growing
/// geometrically from dt_init to dt_max, checkpoints every stride steps.
inline Trajectory heat_trajectory(const RadialField& u0, const ModelParams& params, const EvolveConfig& cfg) {
    cfg.validate();
    Trajectory traj{params, cfg, u0.boundary(), {}, Verdict::Undetermined, "linear flow", 0};
    traj.checkpoints.push_back(make_checkpoint(0.0, u0, params, cfg, 0.0, 0.0, 0));
    std::vector<double> v(u0.values().begin(), u0.values().end());
    double t = 0.0, dt = cfg.dt_init;
    std::size_t step = 0;
    while (t < cfg.t_horizon * (1.0 - 1e-14) && step < cfg.max_steps) {
        const double h = std::min(dt, cfg.t_horizon - t);
        LinearPropagator(u0.grid(), traj.boundary, h).apply(v);
        t += h;
        ++step;
        const bool last = t >= cfg.t_horizon * (1.0 - 1e-14);
        if (last || step % cfg.checkpoint_stride == 0)
            traj.checkpoints.push_back(
                make_checkpoint(t, RadialField(u0.grid_ptr(), v, traj.boundary), params, cfg, h, 0.0, step));
        dt = std::min(cfg.dt_max, dt * cfg.dt_growth);
    }
    traj.steps = step;
    return traj;
}

/// Linear heat flow checkpointed exactly at the given increasing times.
inline Trajectory heat_trajectory(const RadialField& u0, const ModelParams& params, const EvolveConfig& cfg,
                                  const std::vector<double>& times) {
    cfg.validate();
    Trajectory traj{params, cfg, u0.boundary(), {}, Verdict::Undetermined, "linear flow", 0};
    traj.checkpoints.push_back(make_checkpoint(0.0, u0, params, cfg, 0.0, 0.0, 0));
    std::vector<double> v(u0.values().begin(), u0.values().end());
    double t = 0.0, dt = cfg.dt_init;
    std::size_t step = 0;
    for (double target : times) {
        if (target <= t) continue;
        double h = 0.0;
        while (t < target * (1.0 - 1e-14)) {
            h = std::min(dt, target - t);
            LinearPropagator(u0.grid(), traj.boundary, h).apply(v);
            t += h;
            ++step;
            dt = std::min(cfg.dt_max, dt * cfg.dt_growth);
        }
        t = target;
        traj.checkpoints.push_back(
            make_checkpoint(t, RadialField(u0.grid_ptr(), v, traj.boundary), params, cfg, h, 0.0, step));
    }
    traj.steps = step;
    return traj;
}

struct ThresholdProbeResult {
    double flip = 0.0;                 // midpoint of the final bracket
    double lower = 0.0;                // largest amplitude seen Dissipative
    double upper = 0.0;                // smallest amplitude seen BlowUp
    bool bracketed = false;            // false: only a one-sided bound
    std::vector<std::pair<double, Verdict>> runs;
    double small_nonlinear_kato = 0.0; // at amplitude flip/2
    double small_linear_kato = 0.0;
    bool small_data_bound_holds = false;  // nonlinear <= 2 linear
};

struct ThresholdProbeOptions {
    double lo = 0.0;
    double hi = 2.0;
    std::size_t bisections = 8;
};

/// Bisects the amplitude a at which simulate(a shape) switches from
/// Dissipative to BlowUp, then compares Kato norms of the nonlinear and linear
/// flows at a = flip/2, both sampled at the nonlinear checkpoint times.
/// Undetermined runs count as not dissipative.
inline ThresholdProbeResult small_data_threshold_probe(const RadialField& shape, const ModelParams& params,
                                                       const EvolveConfig& cfg, const KatoConfig& kato,
                                                       const ThresholdProbeOptions& opt = {}) {
    require_focusing(params, "small_data_threshold_probe");
    if (!(opt.hi > opt.lo && opt.lo >= 0.0)) throw DomainError("threshold probe needs 0 <= lo < hi");
    ThresholdProbeResult res;
    auto verdict_at = [&](double a) {
        const Verdict v = simulate(shape.scaled(a), params, cfg).verdict;
        res.runs.emplace_back(a, v);
        return v;
    };
    double lo = opt.lo, hi = opt.hi;
    const bool lo_ok = lo == 0.0 || verdict_at(lo) == Verdict::Dissipative;
    const bool hi_blows = verdict_at(hi) == Verdict::BlowUp;
    res.bracketed = lo_ok && hi_blows;
    if (res.bracketed) {
        for (std::size_t k = 0; k < opt.bisections; ++k) {
            const double mid = 0.5 * (lo + hi);
            (verdict_at(mid) == Verdict::Dissipative ? lo : hi) = mid;
        }
    }
    res.lower = lo;
    res.upper = hi;
    res.flip = res.bracketed ? 0.5 * (lo + hi) : (hi_blows ? lo : hi);

    EvolveConfig kcfg = cfg;
    if (std::find(kcfg.lq_orders.begin(), kcfg.lq_orders.end(), kato.q) == kcfg.lq_orders.end())
        kcfg.lq_orders.push_back(kato.q);
    kcfg.checkpoint_stride = std::min<std::size_t>(kcfg.checkpoint_stride, 10);
    const RadialField half = shape.scaled(0.5 * res.flip);
    const Trajectory nl = simulate(half, params, kcfg);
    std::vector<double> times;
    for (const auto& c : nl.checkpoints) times.push_back(c.t);
    res.small_nonlinear_kato = kato_norm(nl, kato);
    res.small_linear_kato = kato_norm(heat_trajectory(half, params, kcfg, times), kato);
    res.small_data_bound_holds = res.small_nonlinear_kato <= 2.0 * res.small_linear_kato;
    return res;
}

/// ||chi_R u||^2_{L^2} with chi the quintic cutoff (1 on [0,1], 0 on [2,inf)).
inline double cutoff_mass(const RadialField& u, double R) {
    if (!(R > 0.0)) throw DomainError("cutoff radius must be positive");
    if (R > 0.5 * u.grid().r_max() * (1.0 + 1e-12)) throw DomainError("cutoff radius must satisfy 2R <= r_max");
    const auto w = u.grid().cell_weights_plain();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double c = smooth_cutoff(u.grid().node(i) / R);
        s += w[i] * c * c * u[i] * u[i];
    }
    return s;
}

/// max over checkpoint intervals of
/// |Delta(||chi_R u||^2/2)/Delta t + J(u) - <(chi_R^2 - 1) u, u_t>| / max(1, kinetic),
/// with u_t the difference quotient and J, u evaluated at the interval average.
inline double nehari_cutoff_identity_residual(const Trajectory& traj, double R) {
    const auto& cps = traj.checkpoints;
    if (cps.size() < 2) return 0.0;
    const RadialGrid& g = cps.front().field.grid();
    const auto w = g.cell_weights_plain();
    std::vector<double> chi2(g.size());
    for (std::size_t i = 0; i < chi2.size(); ++i) {
        const double c = smooth_cutoff(g.node(i) / R);
        chi2[i] = c * c;
    }
    double res = 0.0;
    double m_prev = cutoff_mass(cps[0].field, R);
    for (std::size_t k = 0; k + 1 < cps.size(); ++k) {
        const double m_next = cutoff_mass(cps[k + 1].field, R);
        const double dt = cps[k + 1].t - cps[k].t;
        const auto& a = cps[k].field;
        const auto& b = cps[k + 1].field;
        double cross = 0.0;
        for (std::size_t i = 0; i < chi2.size(); ++i)
            cross += w[i] * (chi2[i] - 1.0) * 0.5 * (a[i] + b[i]) * (b[i] - a[i]) / dt;
        const double j = 0.5 * (cps[k].j_gamma + cps[k + 1].j_gamma);
        const double kin = std::max({1.0, cps[k].kinetic, cps[k + 1].kinetic});
        res = std::max(res, std::abs(0.5 * (m_next - m_prev) / dt + j - cross) / kin);
        m_prev = m_next;
    }
    return res;
}

/// R^2 ||u_0||_{L^{q_c}(|x| >= R)}, with the cell straddling R counted in part
/// and, for DecayAtInfinity fields, the harmonic tail beyond r_max added.
inline double t_r(const RadialField& u0, double R) {
    const RadialGrid& g = u0.grid();
    if (!(R > 0.0 && R < g.r_max())) throw DomainError("t_r needs 0 < R < r_max");
    const int d = g.dim();
    const double qc = 2.0 * d / (d - 2.0);
    const auto f = g.faces();
    double s = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) {
        if (f[i + 1] <= R || u0[i] == 0.0) continue;
        s += g.shell_integral(std::max(f[i], R), f[i + 1]) * std::pow(std::abs(u0[i]), qc);
    }
    if (u0.boundary().kind == Boundary::Kind::DecayAtInfinity)
        s += g.omega() * std::pow(std::abs(u0[u0.size() - 1]), qc) * std::pow(g.r_max(), d) / d;
    return R * R * std::pow(s, 1.0 / qc);
}

struct CutoffConfig {
    double R;
    double A;
    double alpha = 0.05;
    double epsilon = 0.05;
    double t_a = 0.0;
    double t_b = std::numeric_limits<double>::infinity();

    /// Validates positivity and 2 p > 4 (1 + alpha)(1 + epsilon).
    void validate(const ModelParams& params) const {
        if (!(R > 0.0 && A > 0.0 && alpha > 0.0 && epsilon > 0.0))
            throw DomainError("cutoff config needs R, A, alpha, epsilon > 0");
        if (!(2.0 * params.p() > 4.0 * (1.0 + alpha) * (1.0 + epsilon)))
            throw DomainError("cutoff config violates 2p > 4(1+alpha)(1+epsilon)");
        if (!(t_b > t_a)) throw DomainError("cutoff window needs t_b > t_a");
    }
};

/// A = 2 (1 + alpha)(1 + 1/epsilon) ||chi_R u_0||^4 / (p (l_HS - E(u_0))).
inline double concavity_constant(const RadialField& u0, const ModelParams& params, double l_hs, double R,
                                 double alpha, double epsilon) {
    const double gap = l_hs - energy(u0, params);
    if (!(gap > 0.0)) throw DomainError("concavity constant needs E(u0) < l_HS");
    const double m = cutoff_mass(u0, R);
    return 2.0 * (1.0 + alpha) * (1.0 + 1.0 / epsilon) * m * m / (params.p() * gap);
}

struct ConcavityReport {
    double R = 0.0, A = 0.0, alpha = 0.0, epsilon = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    std::size_t window_points = 0;
    double fraction_holding = 0.0;
    double min_margin = 0.0;
    double t_r_value = 0.0;
    std::vector<double> I;  // per checkpoint; nondecreasing and >= A
};

/// I(t) = A + int_0^t ||chi_R u||^2 (trapezoidal over checkpoints),
/// I' = ||chi_R u||^2, I'' = three-point derivative of I' on the (possibly
/// nonuniform) checkpoint times. Counts interior checkpoints in
/// [t_a, min(t_b, T_R)] where I'' I - (1 + alpha) I'^2 > 0; T_R = 0 (no mass
/// outside R) leaves the window at [t_a, t_b].
inline ConcavityReport concavity_certificate(const Trajectory& traj, const CutoffConfig& cfg) {
    cfg.validate(traj.params);
    const auto& cps = traj.checkpoints;
    ConcavityReport rep;
    rep.R = cfg.R;
    rep.A = cfg.A;
    rep.alpha = cfg.alpha;
    rep.epsilon = cfg.epsilon;
    if (cps.empty()) throw DomainError("concavity certificate: empty trajectory");
    rep.t_r_value = t_r(cps.front().field, cfg.R);
    rep.window_lo = cfg.t_a;
    rep.window_hi = rep.t_r_value > 0.0 ? std::min(cfg.t_b, rep.t_r_value) : cfg.t_b;

    const std::size_t n = cps.size();
    std::vector<double> ip(n), t(n);
    for (std::size_t k = 0; k < n; ++k) {
        ip[k] = cutoff_mass(cps[k].field, cfg.R);
        t[k] = cps[k].t;
    }
    rep.I.assign(n, cfg.A);
    for (std::size_t k = 1; k < n; ++k) rep.I[k] = rep.I[k - 1] + 0.5 * (t[k] - t[k - 1]) * (ip[k] + ip[k - 1]);

    std::size_t holding = 0;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (t[k] < rep.window_lo || t[k] > rep.window_hi) continue;
        const double h0 = t[k] - t[k - 1], h1 = t[k + 1] - t[k];
        const double ipp = (-h1 / (h0 * (h0 + h1))) * ip[k - 1] + ((h1 - h0) / (h0 * h1)) * ip[k] +
                           (h0 / (h1 * (h0 + h1))) * ip[k + 1];
        const double margin = ipp * rep.I[k] - (1.0 + cfg.alpha) * ip[k] * ip[k];
        rep.min_margin = std::min(rep.min_margin, margin);
        if (margin > 0.0) ++holding;
        ++rep.window_points;
    }
    if (rep.window_points < 8) throw DomainError("concavity certificate: fewer than 8 checkpoints in window");
    rep.fraction_holding = static_cast<double>(holding) / static_cast<double>(rep.window_points);
    return rep;
}

}  // namespace hslab
