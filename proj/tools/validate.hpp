#pragma once

// The battery behind `hslab validate`: each check measures one quantity and
// compares it with a fixed tolerance.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hslab/config.hpp"
#include "hslab/data.hpp"
#include "hslab/diagnostics.hpp"
#include "hslab/dirichlet.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"
#include "hslab/io.hpp"
#include "hslab/propagator.hpp"

namespace hslab::tools {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

inline Json to_json(const CheckResult& c) {
    return Json{{"name", c.name},         {"passed", c.passed},   {"measured", c.measured},
                {"tolerance", c.tolerance}, {"detail", c.detail}, {"seconds", c.seconds}};
}

/// ||W||^2 in H^1-dot by quadrature of the closed-form derivative over (0, inf).
inline double ground_state_kinetic_reference(const ModelParams& params) {
    const GroundStateSpec spec(params.with_sign(Sign::Focusing));
    const double e = 2.0 - params.gamma(), k = spec.decay_exponent;
    const int d = params.dim();
    auto integrand = [&](double r) {
        const double re = std::pow(r, e);
        const double dw = -spec.amplitude * k * e * std::pow(r, e - 1.0) * std::pow(1.0 + re, -k - 1.0);
        return dw * dw * std::pow(r, d - 1);
    };
    boost::math::quadrature::exp_sinh<double> q;
    return sphere_area(d) * q.integrate(integrand);
}

inline std::vector<CheckResult> run_validation(const ExperimentConfig& cfg) {
    std::vector<CheckResult> out;
    auto run = [&](const std::string& name, double tol, auto&& body, auto&& passes) {
        CheckResult c;
        c.name = name;
        c.tolerance = tol;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.measured = body(c.detail);
            c.passed = passes(c.measured, tol);
        } catch (const std::exception& e) {
            c.passed = false;
            c.detail = std::string("error: ") + e.what();
        }
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(c));
    };
    auto at_most = [](double m, double tol) { return std::isfinite(m) && m <= tol; };

    const ModelParams params = cfg.params().with_sign(Sign::Focusing);
    const int d = params.dim();
    const double gamma = params.gamma();

    // Ground state on the configured node count.
    const auto gs_grid = make_graded_grid(d, cfg.grid.n, 200.0, cfg.grid.grading, gamma);
    const double k_ref = ground_state_kinetic_reference(params);
    const double lhs_ref = (2.0 - gamma) / (2.0 * (d - gamma)) * k_ref;
    run("ground_state_kinetic", 5e-3, [&](std::string& det) {
        const double k = kinetic_norm_sq(ground_state(params, gs_grid));
        det = "K = " + format_number(k) + ", reference " + format_number(k_ref);
        return std::abs(k / k_ref - 1.0);
    }, at_most);
    run("mountain_pass_energy", 5e-3, [&](std::string& det) {
        const double l = mountain_pass_energy(params, gs_grid);
        det = "l_HS = " + format_number(l) + ", reference " + format_number(lhs_ref);
        return std::abs(l / lhs_ref - 1.0);
    }, at_most);
    run("ground_state_nehari", 1e-2, [&](std::string&) {
        const auto r = evaluate_functionals(ground_state(params, gs_grid), params, 1.0);
        return std::abs(r.nehari) / r.kinetic;
    }, at_most);

    run("elliptic_residual_order", 0.3, [&](std::string& det) {
        std::vector<double> hs, res;
        for (std::size_t n : {512u, 1024u, 2048u, 4096u}) {
            const auto g = make_graded_grid(d, n, 200.0, 2.0, gamma);
            hs.push_back(1.0 / static_cast<double>(n));
            res.push_back(elliptic_residual(ground_state(params, g), params));
        }
        const double slope = loglog_slope(hs, res);
        det = "order " + format_number(slope);
        return std::abs(slope - 2.0);
    }, at_most);

    run("gaussian_heat_oracle", 1e-3, [&](std::string&) {
        const auto g = make_graded_grid(3, 2048, 40.0, 2.0, 0.0);
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-g->node(i) * g->node(i));
        const LinearPropagator prop(*g, Boundary::decay(), 1e-4);
        for (int k = 0; k < 10000; ++k) prop.apply(v);
        double err = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double r = g->node(i);
            err = std::max(err, std::abs(v[i] - std::pow(5.0, -1.5) * std::exp(-r * r / 5.0)));
        }
        return err;
    }, at_most);

    run("decay_slope_l1_linf", 0.05, [&](std::string& det) {
        DecayProbe probe;
        const auto fit = verify_decay_rate(probe);
        det = "slope " + format_number(fit.slope);
        return std::abs(fit.slope / fit.predicted - 1.0);
    }, at_most);

    const ModelParams p31(3, 1.0);
    run("energy_identity_small_data", 2e-2, [&](std::string&) {
        const auto g = make_graded_grid(3, 1024, 40.0, 2.0, 1.0);
        EvolveConfig c{1e-3, 1e-3, 1e-12, 1.0, 10};
        const auto tr = simulate(gaussian_data(g, 0.5), p31, c);
        if (!energy_monotone(tr)) throw std::runtime_error("energy increased");
        return energy_identity_residual(tr);
    }, at_most);

    run("picard_cross_check", 1e-4, [&](std::string& det) {
        const auto g = make_graded_grid(3, 1024, 40.0, 2.0, 1.0);
        const auto u0 = gaussian_data(g, 0.1);
        const auto pr = picard_sequence(u0, 6, 0.01, p31, {2000, 1});
        EvolveConfig c{5e-6, 5e-6, 1e-12, 0.01, 100};
        const auto tr = simulate(u0, p31, c);
        double worst = 0.0;
        for (double r : contraction_ratios(pr.increments, 1e-13)) worst = std::max(worst, r);
        det = "worst contraction ratio " + format_number(worst);
        if (!(worst < 0.5)) throw std::runtime_error("iterates do not contract");
        return detail::max_abs_diff(pr.iterates.back().values(), tr.checkpoints.back().field.values());
    }, at_most);

    run("comparison_principle", 1e-8, [&](std::string& det) {
        const auto g = make_graded_grid(3, 1024, 10.0, 1.5, 1.0);
        const BallDomain b1(g, 5.0), b2(g, 10.0);
        const auto big = RadialField::sample(
            g, [](double r) { return std::exp(-r * r / 4.0) * smooth_cutoff(r / 5.0); }, b2.boundary());
        const auto small = RadialField::sample(
            g, [](double r) { return std::exp(-r * r / 4.0) * smooth_cutoff(2.0 * r / 5.0); }, b1.boundary());
        EvolveConfig c{1e-4, 1e-2, 1e-12, 1.0, 100};
        const auto rep = comparison_check(small, b1, big, b2, p31, c);
        det = "verdicts " + std::string(to_string(rep.verdict_small)) + "/" + to_string(rep.verdict_big);
        return rep.max_excess;
    }, at_most);

    run("absorbing_dissipation", 1e-3, [&](std::string& det) {
        const ModelParams pa(3, 1.0, Sign::Absorbing);
        const auto g = make_graded_grid(3, 1024, 1000.0, 2.0, 1.0);
        EvolveConfig c{1e-4, 1.0, 1e-12, 100.0, 20};
        const auto tr = simulate(gaussian_data(g, 20.0), pa, c);
        det = std::string(to_string(tr.verdict)) + " at t = " + format_number(tr.checkpoints.back().t);
        if (tr.verdict != Verdict::Dissipative) return HUGE_VAL;
        return tr.checkpoints.back().h1_norm / tr.checkpoints.front().h1_norm;
    }, [](double m, double tol) { return m < tol; });

    run("blowup_above_ground_state", 0.0, [&](std::string& det) {
        const auto g = make_graded_grid(3, 1024, 1000.0, 2.0, 1.0);
        EvolveConfig c{1e-4, 100.0, 1e-12, 1e8, 100};
        const auto tr = simulate(mollified_ground_state(p31, g, 1.2), p31, c);
        det = std::string(to_string(tr.verdict)) + " (" + tr.halt_reason + ")";
        return tr.verdict == Verdict::BlowUp ? 0.0 : 1.0;
    }, at_most);

    return out;
}

}  // namespace hslab::tools
