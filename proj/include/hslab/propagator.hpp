#pragma once

// Linear heat semigroup on the radial grid: implicit Backward Euler or
// Crank-Nicolson steps of u_t = Delta_h u, Lebesgue norms, and a probe that
// measures the large-time decay exponent of ||e^{t Delta} f||_{L^q}.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/laplacian.hpp"

namespace hslab {

enum class Scheme { BackwardEuler, CrankNicolson };

struct LinearStepConfig {
    Scheme scheme = Scheme::BackwardEuler;
    /// Closure to use; the field's own boundary when unset.
    std::optional<Boundary> boundary;

    static LinearStepConfig dirichlet_at_rmax(Scheme s = Scheme::BackwardEuler) {
        return {s, Boundary::dirichlet_at_rmax()};
    }
    static LinearStepConfig dirichlet_on_ball(double radius, Scheme s = Scheme::BackwardEuler) {
        return {s, Boundary::ball(radius)};
    }
};

/// Repeated linear steps with a fixed (dt, scheme, boundary); the tridiagonal
/// operator is assembled once.
class LinearPropagator {
public:
    LinearPropagator(const RadialGrid& g, const Boundary& b, double dt, Scheme scheme = Scheme::BackwardEuler)
        : grid_(&g), boundary_(b), dt_(dt), scheme_(scheme),
          lhs_(g, b, scheme == Scheme::BackwardEuler ? dt : 0.5 * dt) {
        if (!(dt > 0.0)) throw DomainError("heat step needs dt > 0");
    }

    double dt() const { return dt_; }

    void apply(std::vector<double>& u) const {
        const auto w = grid_->cell_weights_plain();
        const std::size_t m = lhs_.active();
        if (scheme_ == Scheme::BackwardEuler) {
            for (std::size_t i = 0; i < m; ++i) u[i] *= w[i];
        } else {
            const auto au = apply_stiffness(*grid_, u, boundary_);
            for (std::size_t i = 0; i < m; ++i) u[i] = w[i] * u[i] - 0.5 * dt_ * au[i];
        }
        lhs_.solve(u);
    }

private:
    const RadialGrid* grid_;
    Boundary boundary_;
    double dt_;
    Scheme scheme_;
    ShiftedStiffness lhs_;
};

/// One implicit step of the heat equation. Backward Euler preserves
/// nonnegativity and does not increase the sup norm.
inline RadialField heat_step(const RadialField& u, double dt, const LinearStepConfig& cfg = {}) {
    const Boundary b = cfg.boundary.value_or(u.boundary());
    std::vector<double> v(u.values().begin(), u.values().end());
    LinearPropagator(u.grid(), b, dt, cfg.scheme).apply(v);
    return {u.grid_ptr(), std::move(v), b};
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (sum_i w_i |u_i|^q)^{1/q}; the sup over nodes for q = infinity.
inline double lq_norm(const RadialField& u, double q) {
    if (!(q >= 1.0)) throw DomainError("lq_norm needs q >= 1");
    if (std::isinf(q)) return u.sup_norm();
    return std::pow(quadrature(u, q, false), 1.0 / q);
}

/// Decay-rate experiment for ||e^{t Delta}(|x|^{-weight_gamma} f)||_{L^{p2}}.
///
/// For p1 = 1 the datum is the bump exp(-r^2/a^2). For p1 > 1 it is
/// (a^2 + r^2)^{-beta/2} with beta = d/p1 + tail_excess, a fixed function just
/// inside L^{p1} whose tail saturates the L^{p1} -> L^{p2} rate; a compact bump
/// would decay at the L^1 rate instead. The core width a is kept well below
/// sqrt(t_min) so the fit window sits in the self-similar regime.
struct DecayProbe {
    int d = 3;
    double p1 = 1.0;
    double p2 = kInfinity;
    double weight_gamma = 0.0;
    double t_min = 1.0;
    double t_max = 100.0;
    std::size_t samples = 13;
    std::size_t n = 2048;
    double r_max = 400.0;
    double bump_width = 0.1;
    double tail_excess = 0.04;
    double dt_rel = 0.002;  // dt = dt_rel * t once t exceeds t_min/20
    LinearStepConfig step{};

    double predicted_slope() const {
        const double inv2 = std::isinf(p2) ? 0.0 : 1.0 / p2;
        return -0.5 * d * (1.0 / p1 - inv2) - 0.5 * weight_gamma;
    }
};

struct DecayFit {
    double slope = 0.0;
    double predicted = 0.0;
    std::vector<double> times;
    std::vector<double> norms;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline DecayFit verify_decay_rate(const DecayProbe& probe) {
    if (!(probe.p1 >= 1.0 && probe.p1 <= probe.p2)) throw DomainError("decay probe needs 1 <= p1 <= p2");
    if (probe.samples < 3 || !(probe.t_min > 0.0 && probe.t_max > probe.t_min))
        throw DomainError("decay probe needs >= 3 samples on 0 < t_min < t_max");
    auto grid = make_graded_grid(probe.d, probe.n, probe.r_max, 2.0, 0.0);
    const double beta = probe.d / probe.p1 + probe.tail_excess;
    auto u0 = RadialField::sample(grid, [&](double r) {
        const double f = probe.p1 == 1.0 ? std::exp(-r * r / (probe.bump_width * probe.bump_width))
                                         : std::pow(probe.bump_width * probe.bump_width + r * r, -0.5 * beta);
        return probe.weight_gamma > 0.0 ? std::pow(r, -probe.weight_gamma) * f : f;
    });
    const Boundary b = probe.step.boundary.value_or(u0.boundary());
    std::vector<double> v(u0.values().begin(), u0.values().end());

    DecayFit fit;
    fit.predicted = probe.predicted_slope();
    const double ratio = std::pow(probe.t_max / probe.t_min, 1.0 / (probe.samples - 1));
    double t = 0.0;
    const double t_floor = probe.t_min / 20.0;
    for (std::size_t k = 0; k < probe.samples; ++k) {
        const double target = probe.t_min * std::pow(ratio, static_cast<double>(k));
        while (t < target * (1.0 - 1e-14)) {
            double dt = probe.dt_rel * std::max(t, t_floor);
            dt = std::min(dt, target - t);
            LinearPropagator(*grid, b, dt, probe.step.scheme).apply(v);
            t += dt;
        }
        fit.times.push_back(target);
        fit.norms.push_back(lq_norm(RadialField(grid, v, b), probe.p2));
    }
    fit.slope = loglog_slope(fit.times, fit.norms);
    return fit;
}

}  // namespace hslab
