// hslab: command-line front end.
//
//   hslab <functionals|evolve|dichotomy-sweep|dirichlet|compare|validate>
//         [--config run.json] [--output-dir DIR]
//
// Exit codes: 0 Dissipative / success, 10 BlowUp, 20 Undetermined,
// 1 failed checks, 2 invalid configuration, 3 runtime error.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "hslab/config.hpp"
#include "hslab/data.hpp"
#include "hslab/diagnostics.hpp"
#include "hslab/dirichlet.hpp"
#include "hslab/evolve.hpp"
#include "hslab/functionals.hpp"
#include "hslab/io.hpp"
#include "validate.hpp"

namespace fs = std::filesystem;
using namespace hslab;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int verdict_exit_code(Verdict v) {
    switch (v) {
    case Verdict::Dissipative: return 0;
    case Verdict::BlowUp: return 10;
    case Verdict::Undetermined: return 20;
    }
    return kExitRuntime;
}

std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HSLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs body(i) for i in [0, jobs) on a bounded pool; each slot is written by
// exactly one worker.
template <class F>
void parallel_for(std::size_t jobs, F&& body) {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const std::size_t workers = worker_count(jobs);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs; i = next++) body(i);
        });
}

fs::path prepare_output(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.output.dir);
    fs::create_directories(dir);
    write_json(to_json(cfg), (dir / "config.resolved.json").string());
    return dir;
}

GridPtr whole_space_grid(const ExperimentConfig& cfg) {
    return make_graded_grid(cfg.model.d, cfg.grid.n, cfg.grid.r_max, cfg.grid.grading, cfg.model.gamma);
}

void write_trajectory(const ExperimentConfig& cfg, const fs::path& dir, const Trajectory& traj, Json extra) {
    if (cfg.wants("csv")) write_trajectory_csv(traj, (dir / "trajectory.csv").string());
    if (cfg.wants("json")) {
        Json j = trajectory_sidecar(traj, cfg.output.snapshot_times);
        for (auto& [k, v] : extra.items()) j[k] = v;
        write_json(j, (dir / "trajectory.json").string());
    }
}

KatoConfig kato_config(const ExperimentConfig& cfg) {
    const ModelParams p = cfg.params();
    return cfg.diagnostics.kato_q > 0.0 ? KatoConfig(p, cfg.diagnostics.kato_q) : KatoConfig::midpoint(p);
}

EvolveConfig evolve_config(const ExperimentConfig& cfg) {
    EvolveConfig e = cfg.evolve;
    const double q = kato_config(cfg).q;
    if (std::find(e.lq_orders.begin(), e.lq_orders.end(), q) == e.lq_orders.end()) e.lq_orders.push_back(q);
    return e;
}

int cmd_functionals(const ExperimentConfig& cfg) {
    const ModelParams params = cfg.params(), foc = params.with_sign(Sign::Focusing);
    const auto grid = whole_space_grid(cfg);
    const double l_hs = mountain_pass_energy(foc, grid);
    const auto W = ground_state(foc, grid);
    const auto [qlo, qhi] = admissible_q_window(params);
    Json j{{"model",
            {{"d", params.dim()},
             {"gamma", params.gamma()},
             {"p", params.p()},
             {"q_c", params.q_c()},
             {"sign", to_string(params.sign())}}},
           {"l_hs", l_hs},
           {"c_hs", hardy_sobolev_constant(foc, grid)},
           {"elliptic_residual", elliptic_residual(W, foc)},
           {"kato_window", {qlo, qhi}},
           {"ground_state", to_json(evaluate_functionals(W, foc, l_hs))},
           {"data",
            {{"family", to_string(cfg.data.family)},
             {"amplitude", cfg.data.amplitude},
             {"report", to_json(evaluate_functionals(make_initial_data(cfg, grid, cfg.data.amplitude), params, l_hs))}}}};
    const auto dir = prepare_output(cfg);
    write_json(j, (dir / "functionals.json").string());
    std::cout << "l_HS = " << format_number(l_hs) << ", p = " << format_number(params.p()) << '\n';
    return 0;
}

int cmd_evolve(const ExperimentConfig& cfg) {
    const ModelParams params = cfg.params();
    const auto grid = whole_space_grid(cfg);
    const double l_hs = mountain_pass_energy(params.with_sign(Sign::Focusing), grid);
    const auto u0 = make_initial_data(cfg, grid, cfg.data.amplitude);
    const auto rep = evaluate_functionals(u0, params, l_hs);
    const auto ecfg = evolve_config(cfg);
    const auto dir = prepare_output(cfg);
    const auto traj = simulate(u0, params, ecfg);
    const auto kato = kato_config(cfg);
    write_trajectory(cfg, dir, traj,
                     Json{{"initial", to_json(rep)},
                          {"l_hs", l_hs},
                          {"energy_monotone", energy_monotone(traj)},
                          {"energy_identity_residual", energy_identity_residual(traj)},
                          {"kato", {{"q", kato.q}, {"norm", kato_norm(traj, kato)}}}});
    std::cout << to_string(traj.verdict) << " (" << traj.halt_reason << ") at t = "
              << format_number(traj.checkpoints.back().t) << '\n';
    return verdict_exit_code(traj.verdict);
}

std::string predicted_outcome(Membership m) {
    switch (m) {
    case Membership::MPlus:
    case Membership::Zero: return "Dissipative";
    case Membership::MMinus: return "BlowUp";
    case Membership::AboveThreshold: return "";
    }
    return "";
}

int cmd_dichotomy_sweep(const ExperimentConfig& cfg) {
    const ModelParams params = cfg.params();
    require_focusing(params, "dichotomy-sweep");
    const auto grid = whole_space_grid(cfg);
    const double l_hs = mountain_pass_energy(params, grid);
    const auto ecfg = evolve_config(cfg);
    const auto& amps = cfg.data.amplitudes;

    struct Row {
        double amplitude = 0.0;
        FunctionalReport report;
        std::string verdict, agreement, error;
        double t_final = 0.0;
    };
    std::vector<Row> rows(amps.size());
    const auto dir = prepare_output(cfg);
    parallel_for(amps.size(), [&](std::size_t i) {
        Row& row = rows[i];
        row.amplitude = amps[i];
        try {
            const auto u0 = make_initial_data(cfg, grid, amps[i]);
            row.report = evaluate_functionals(u0, params, l_hs);
            const auto traj = simulate(u0, params, ecfg);
            row.verdict = to_string(traj.verdict);
            row.t_final = traj.checkpoints.back().t;
            const std::string pred = predicted_outcome(row.report.membership);
            row.agreement = pred.empty() ? "n/a" : (pred == row.verdict ? "true" : "false");
        } catch (const std::exception& e) {
            row.error = e.what();
            row.verdict = "error";
            row.agreement = "n/a";
        }
    });

    std::ofstream csv((dir / "phase.csv").string());
    csv << kPhaseCsvSchema << '\n' << "# l_hs = " << format_number(l_hs) << '\n';
    csv << "amplitude,E,J,membership,verdict,agreement\n";
    Json jrows = Json::array();
    bool all_agree = true;
    for (const auto& r : rows) {
        csv << format_number(r.amplitude) << ',' << format_number(r.report.energy) << ','
            << format_number(r.report.nehari) << ',' << to_string(r.report.membership) << ',' << r.verdict << ','
            << r.agreement << '\n';
        jrows.push_back({{"amplitude", r.amplitude},
                         {"report", to_json(r.report)},
                         {"verdict", r.verdict},
                         {"agreement", r.agreement},
                         {"t_final", r.t_final},
                         {"error", r.error}});
        if (r.agreement == "false") all_agree = false;
    }
    if (cfg.wants("json")) write_json(Json{{"l_hs", l_hs}, {"rows", jrows}}, (dir / "sweep.json").string());
    std::cout << rows.size() << " rows, " << (all_agree ? "all agree" : "DISAGREEMENT") << '\n';
    return 0;
}

int cmd_dirichlet(const ExperimentConfig& cfg) {
    const ModelParams params = cfg.params();
    const auto dom = BallDomain::make(cfg.model.d, cfg.grid.n, cfg.dirichlet.radius, cfg.dirichlet.grading,
                                      cfg.model.gamma);
    const ModelParams foc = params.with_sign(Sign::Focusing);
    const double l_hs = mountain_pass_energy(foc, whole_space_grid(cfg));
    const auto u0 = make_ball_data(cfg, dom, cfg.data.amplitude);
    const auto rep = evaluate_functionals(u0, params, l_hs);
    const auto dir = prepare_output(cfg);
    const auto traj = dirichlet_simulate(u0, dom, params, evolve_config(cfg));
    write_trajectory(cfg, dir, traj,
                     Json{{"initial", to_json(rep)},
                          {"l_hs", l_hs},
                          {"ball_l_hs", ball_mountain_pass_energy(foc, dom)},
                          {"energy_monotone", energy_monotone(traj)}});
    std::cout << to_string(traj.verdict) << " (" << traj.halt_reason << ")\n";
    return verdict_exit_code(traj.verdict);
}

int cmd_compare(const ExperimentConfig& cfg) {
    const ModelParams params = cfg.params();
    const auto grid = make_graded_grid(cfg.model.d, cfg.grid.n, cfg.dirichlet.big_radius, cfg.dirichlet.grading,
                                       cfg.model.gamma);
    const BallDomain small(grid, cfg.dirichlet.small_radius), big(grid, cfg.dirichlet.big_radius);
    const auto u_big = make_ball_data(cfg, big, cfg.data.amplitude);
    std::vector<double> v(u_big.values().begin(), u_big.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= smooth_cutoff(2.0 * grid->node(i) / small.radius());
    const auto u_small = RadialField(grid, std::move(v), small.boundary());
    const auto dir = prepare_output(cfg);
    const auto rep = comparison_check(u_small, small, u_big, big, params, evolve_config(cfg));
    Json j = to_json(rep);
    bool ok = rep.max_excess <= 1e-8;
    try {
        const auto s1 = picard_comparison_sequence(u_small, small, 4, 0.01, params);
        const auto s2 = picard_comparison_sequence(u_big, big, 4, 0.01, params);
        const double viol = picard_ordering_violation(s1, s2);
        j["picard_ordering_violation"] = viol;
        ok = ok && viol <= 1e-10;
    } catch (const DomainError& e) {
        j["picard_ordering_violation"] = nullptr;
        j["picard_error"] = e.what();
    }
    write_json(j, (dir / "comparison.json").string());
    std::cout << "max excess " << format_number(rep.max_excess) << '\n';
    return ok ? 0 : kExitFailedChecks;
}

int cmd_validate(const ExperimentConfig& cfg) {
    const auto dir = prepare_output(cfg);
    const auto checks = tools::run_validation(cfg);
    Json arr = Json::array();
    std::size_t failed = 0;
    for (const auto& c : checks) {
        arr.push_back(tools::to_json(c));
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured " << format_number(c.measured)
                  << "  tol " << format_number(c.tolerance) << (c.detail.empty() ? "" : "  " + c.detail) << '\n';
        if (!c.passed) ++failed;
    }
    write_json(Json{{"passed", failed == 0}, {"failures", failed}, {"checks", arr}},
               (dir / "validate.json").string());
    return failed == 0 ? 0 : kExitFailedChecks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial Hardy-Sobolev parabolic laboratory"};
    app.require_subcommand(1);
    std::string config_path, output_dir;
    const std::vector<std::string> names{"functionals", "evolve", "dichotomy-sweep", "dirichlet", "compare",
                                         "validate"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("-o,--output-dir", output_dir, "Override output.dir");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
        if (!output_dir.empty()) cfg.output.dir = output_dir;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        if (cmd == "functionals") return cmd_functionals(cfg);
        if (cmd == "evolve") return cmd_evolve(cfg);
        if (cmd == "dichotomy-sweep") return cmd_dichotomy_sweep(cfg);
        if (cmd == "dirichlet") return cmd_dirichlet(cfg);
        if (cmd == "compare") return cmd_compare(cfg);
        return cmd_validate(cfg);
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
