#pragma once

// Energy, Nehari and related functionals of a radial field, the explicit
// ground state W and the thresholds derived from it.

#include <algorithm>
#include <cmath>
#include <string>

#include "hslab/core.hpp"
#include "hslab/laplacian.hpp"

namespace hslab {

enum class Membership { MPlus, MMinus, AboveThreshold, Zero };

inline const char* to_string(Membership m) {
    switch (m) {
    case Membership::MPlus: return "MPlus";
    case Membership::MMinus: return "MMinus";
    case Membership::AboveThreshold: return "AboveThreshold";
    case Membership::Zero: return "Zero";
    }
    return "?";
}

struct FunctionalReport {
    double kinetic = 0.0;    // ||u||^2 in H^1-dot
    double potential = 0.0;  // int |u|^p |x|^{-gamma} dx
    double energy = 0.0;
    double nehari = 0.0;
    double i_value = 0.0;  // energy - nehari / 2
    Membership membership = Membership::Zero;
};

inline constexpr double kZeroKineticFloor = 1e-14;
inline constexpr double kThresholdSlack = 1e-6;

/// Discrete ||u||^2_{H^1-dot}: face-centred differences weighted by the face
/// area, plus the exterior harmonic tail for DecayAtInfinity fields.
inline double kinetic_norm_sq(const RadialField& u) {
    return dirichlet_energy(u.grid(), u.values(), u.boundary());
}

inline double weighted_potential(const RadialField& u, double p) { return quadrature(u, p, true); }

inline void check_grid_matches(const RadialField& u, const ModelParams& params) {
    if (u.grid().dim() != params.dim() || u.grid().gamma() != params.gamma())
        throw std::invalid_argument("field grid was built for a different (d, gamma)");
}

/// Classification of (energy, nehari) relative to the threshold l_hs. Points
/// within kThresholdSlack of E = l_hs, or with |J| below kThresholdSlack times
/// the kinetic term, are reported as AboveThreshold.
inline Membership classify(double kinetic, double energy, double nehari, double l_hs) {
    if (kinetic < kZeroKineticFloor) return Membership::Zero;
    if (energy >= l_hs || std::abs(energy - l_hs) <= kThresholdSlack * l_hs) return Membership::AboveThreshold;
    if (std::abs(nehari) <= kThresholdSlack * kinetic) return Membership::AboveThreshold;
    return nehari >= 0.0 ? Membership::MPlus : Membership::MMinus;
}

inline FunctionalReport report_from_parts(double kinetic, double potential, const ModelParams& params,
                                          double l_hs) {
    const double p = params.p();
    const double s = params.sign_factor();
    FunctionalReport r;
    r.kinetic = kinetic;
    r.potential = potential;
    r.energy = 0.5 * kinetic - s * potential / p;
    r.nehari = kinetic - s * potential;
    r.i_value = r.energy - 0.5 * r.nehari;
    r.membership = classify(kinetic, r.energy, r.nehari, l_hs);
    return r;
}

inline FunctionalReport evaluate_functionals(const RadialField& u, const ModelParams& params, double l_hs) {
    check_grid_matches(u, params);
    return report_from_parts(kinetic_norm_sq(u), weighted_potential(u, params.p()), params, l_hs);
}

inline double energy(const RadialField& u, const ModelParams& params) {
    return evaluate_functionals(u, params, 1.0).energy;
}

struct GroundStateSpec {
    double amplitude;
    double decay_exponent;

    explicit GroundStateSpec(const ModelParams& params)
        : amplitude(std::pow((params.dim() - params.gamma()) * (params.dim() - 2.0),
                             (params.dim() - 2.0) / (2.0 * (2.0 - params.gamma())))),
          decay_exponent((params.dim() - 2.0) / (2.0 - params.gamma())) {}

    double operator()(double r, double two_minus_gamma) const {
        return amplitude * std::pow(1.0 + std::pow(r, two_minus_gamma), -decay_exponent);
    }
};

inline double ground_state_value(const ModelParams& params, double r) {
    return GroundStateSpec(params)(r, 2.0 - params.gamma());
}

inline void require_focusing(const ModelParams& params, const char* what) {
    if (!params.focusing()) throw DomainError(std::string(what) + " requires the focusing sign");
}

/// Exact samples of W(x) = ((d-g)(d-2))^{(d-2)/(2(2-g))} (1+|x|^{2-g})^{-(d-2)/(2-g)}.
inline RadialField ground_state(const ModelParams& params, const GridPtr& grid,
                                Boundary boundary = Boundary::decay()) {
    require_focusing(params, "ground_state");
    const GroundStateSpec spec(params);
    const double e = 2.0 - params.gamma();
    return RadialField::sample(grid, [&](double r) { return spec(r, e); }, boundary);
}

/// max r_i^gamma |Delta_h u + rho_i |u|^{p-2} u| over the interior window that
/// skips the first two nodes and the outer 10% of the grid.
///
/// The factor r^gamma clears the singular coefficient: W behaves like
/// a - b r^{2-gamma} at the origin, so the unscaled pointwise residual at a fixed
/// node index near r = 0 does not shrink under refinement.
inline double elliptic_residual(const RadialField& u, const ModelParams& params) {
    require_focusing(params, "elliptic_residual");
    check_grid_matches(u, params);
    const auto lap = discrete_laplacian(u);
    const auto rho = u.grid().singular_density();
    const double p = params.p();
    const std::size_t n = u.size();
    const std::size_t hi = static_cast<std::size_t>(0.9 * static_cast<double>(n));
    double res = 0.0;
    for (std::size_t i = 2; i < hi; ++i) {
        const double v = u[i];
        const double local = lap[i] + rho[i] * std::pow(std::abs(v), p - 2.0) * v;
        res = std::max(res, std::pow(u.grid().node(i), params.gamma()) * std::abs(local));
    }
    return res;
}

/// ||u||_{L^p_gamma} / ||u||_{H^1-dot}.
inline double hardy_sobolev_quotient(const RadialField& u, const ModelParams& params) {
    const double k = kinetic_norm_sq(u);
    if (k <= 0.0) return 0.0;
    return std::pow(weighted_potential(u, params.p()), 1.0 / params.p()) / std::sqrt(k);
}

/// Best Hardy-Sobolev constant, evaluated on the extremal W.
inline double hardy_sobolev_constant(const ModelParams& params, const GridPtr& grid) {
    return hardy_sobolev_quotient(ground_state(params, grid), params);
}

/// l_HS = E(W), computed by quadrature of the sampled ground state.
inline double mountain_pass_energy(const ModelParams& params, const GridPtr& grid) {
    return energy(ground_state(params, grid), params.with_sign(Sign::Focusing));
}

/// max_{lambda >= 0} E(lambda u) = (1/2 - 1/p) K (K/P)^{2/(p-2)} for the
/// focusing energy; +inf when P = 0.
inline double ray_maximum_energy(const RadialField& u, const ModelParams& params) {
    const double k = kinetic_norm_sq(u), pot = weighted_potential(u, params.p()), p = params.p();
    if (k == 0.0) return 0.0;
    if (pot == 0.0) return HUGE_VAL;
    return (0.5 - 1.0 / p) * k * std::pow(k / pot, 2.0 / (p - 2.0));
}

}  // namespace hslab
