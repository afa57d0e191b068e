#pragma once

// JSON and CSV serialisation of reports and trajectories.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hslab/diagnostics.hpp"
#include "hslab/dirichlet.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"

namespace hslab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kTrajectoryCsvSchema = "# hslab-trajectory v1";
inline constexpr const char* kPhaseCsvSchema = "# hslab-phase v1";

inline Json to_json(const FunctionalReport& r) {
    return Json{{"kinetic", r.kinetic},   {"potential", r.potential}, {"energy", r.energy},
                {"nehari", r.nehari},     {"i_value", r.i_value},     {"membership", to_string(r.membership)}};
}

inline Json to_json(const EvolveConfig& c) {
    return Json{{"dt_init", c.dt_init},
                {"dt_max", c.dt_max},
                {"dt_min", c.dt_min},
                {"t_horizon", c.t_horizon},
                {"checkpoint_stride", c.checkpoint_stride},
                {"blowup_sup_threshold", c.blowup_sup_threshold},
                {"dissipation_rel_threshold", c.dissipation_rel_threshold},
                {"stability_safety", c.stability_safety},
                {"dt_growth", c.dt_growth},
                {"lq_orders", c.lq_orders},
                {"max_steps", c.max_steps}};
}

inline Json to_json(const ConcavityReport& r) {
    return Json{{"R", r.R},
                {"A", r.A},
                {"alpha", r.alpha},
                {"epsilon", r.epsilon},
                {"window", {r.window_lo, r.window_hi}},
                {"fraction_holding", r.fraction_holding},
                {"min_margin", r.min_margin},
                {"t_r_value", r.t_r_value}};
}

inline Json to_json(const ComparisonReport& r) {
    return Json{{"max_excess", r.max_excess},
                {"time_of_max", r.time_of_max},
                {"radii", {r.r1, r.r2}},
                {"verdicts", {to_string(r.verdict_small), to_string(r.verdict_big)}}};
}

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Trajectory CSV: schema comment, a comment naming the lq column's order,
/// then t,dt,E,J,h1,sup,l2,lq,dissipated.
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const double q = traj.config.lq_orders.empty() ? 0.0 : traj.config.lq_orders.front();
    out << kTrajectoryCsvSchema << '\n';
    out << "# lq column: q = " << format_number(q) << '\n';
    out << "t,dt,E,J,h1,sup,l2,lq,dissipated\n";
    for (const auto& c : traj.checkpoints) {
        const auto it = c.lq_norms.find(q);
        const double lq = it == c.lq_norms.end() ? 0.0 : it->second;
        out << format_number(c.t) << ',' << format_number(c.dt_used) << ',' << format_number(c.e_gamma) << ','
            << format_number(c.j_gamma) << ',' << format_number(c.h1_norm) << ',' << format_number(c.sup) << ','
            << format_number(c.l2) << ',' << format_number(lq) << ',' << format_number(c.dissipated_integral)
            << '\n';
    }
}

/// Verdict, halt reason, config echo and the snapshots closest to the
/// requested times.
inline Json trajectory_sidecar(const Trajectory& traj, const std::vector<double>& snapshot_times) {
    Json j{{"verdict", to_string(traj.verdict)},
           {"halt_reason", traj.halt_reason},
           {"steps", traj.steps},
           {"checkpoints", traj.checkpoints.size()},
           {"t_final", traj.checkpoints.empty() ? 0.0 : traj.checkpoints.back().t},
           {"model",
            {{"d", traj.params.dim()},
             {"gamma", traj.params.gamma()},
             {"p", traj.params.p()},
             {"sign", to_string(traj.params.sign())}}},
           {"boundary", {{"kind", to_string(traj.boundary.kind)}, {"radius", traj.boundary.radius}}},
           {"config", to_json(traj.config)}};
    Json snaps = Json::array();
    for (double ts : snapshot_times) {
        if (traj.checkpoints.empty()) break;
        const Checkpoint* best = &traj.checkpoints.front();
        for (const auto& c : traj.checkpoints)
            if (std::abs(c.t - ts) < std::abs(best->t - ts)) best = &c;
        const auto nodes = best->field.grid().nodes();
        snaps.push_back({{"requested_t", ts},
                         {"t", best->t},
                         {"r", std::vector<double>(nodes.begin(), nodes.end())},
                         {"u", std::vector<double>(best->field.values().begin(), best->field.values().end())}});
    }
    j["snapshots"] = std::move(snaps);
    return j;
}

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace hslab
