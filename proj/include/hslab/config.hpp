#pragma once

// Experiment configuration: one JSON document per run, parsed with defaults,
// validated field by field before any computation, and echoed back resolved.

#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hslab/data.hpp"
#include "hslab/diagnostics.hpp"
#include "hslab/dirichlet.hpp"
#include "hslab/evolve.hpp"
#include "hslab/io.hpp"

namespace hslab {

/// Validation failure naming the offending field, e.g. "model.gamma: ...".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DataFamily { GroundState, Gaussian, Custom };

inline const char* to_string(DataFamily f) {
    switch (f) {
    case DataFamily::GroundState: return "GroundState";
    case DataFamily::Gaussian: return "Gaussian";
    case DataFamily::Custom: return "Custom";
    }
    return "?";
}

struct ExperimentConfig {
    struct Model {
        int d = 3;
        double gamma = 1.0;
        Sign sign = Sign::Focusing;
    } model;
    struct Grid {
        std::size_t n = 1024;
        double r_max = 1000.0;
        double grading = 2.0;
    } grid;
    EvolveConfig evolve{1e-4, 100.0, 1e-12, 1e8, 100};
    struct Data {
        DataFamily family = DataFamily::GroundState;
        double amplitude = 0.5;
        std::vector<double> amplitudes{0.3, 0.5, 0.8, 1.1, 1.2, 1.5};
        double mollify_radius = 0.0;  // 0: 0.8 r_max for GroundState, no cutoff otherwise
        double width = 1.0;
        double mu = 16.0;  // concentration of the ball ground-state family
        std::string path;
    } data;
    struct Diagnostics {
        double kato_q = 0.0;  // 0: midpoint of the admissible window
        std::vector<double> cutoff_R{10.0, 20.0, 40.0};
        double cutoff_A = 0.0;  // 0: the concavity-proof formula
        double alpha = 0.05;
        double epsilon = 0.05;
    } diagnostics;
    struct Dirichlet {
        double radius = 20.0;
        double small_radius = 5.0;
        double big_radius = 10.0;
        double grading = 1.5;
    } dirichlet;
    struct Output {
        std::string dir = "hslab-out";
        std::vector<std::string> formats{"csv", "json"};
        std::vector<double> snapshot_times;
    } output;

    ModelParams params() const { return {model.d, model.gamma, model.sign}; }
    bool wants(const std::string& fmt) const {
        for (const auto& f : output.formats)
            if (f == fmt) return true;
        return false;
    }
};

namespace detail {

class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where(key) + "has the wrong type");
        }
    }

    std::optional<Reader> child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Reader(j_.at(key), path_.empty() ? key : path_ + "." + key);
    }

    void reject_unknown() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError(where(k) + "unknown key");
    }

    std::string where(const std::string& key) const {
        const std::string p = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
        return (p.empty() ? std::string("config") : p) + ": ";
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field + ": " + msg);
}

}  // namespace detail

/// Checks every module precondition the config can violate.
inline void validate(const ExperimentConfig& c) {
    using detail::require;
    try {
        critical_exponent(c.model.d, c.model.gamma);
    } catch (const DomainError& e) {
        throw ConfigError(std::string(c.model.d < 3 ? "model.d" : "model.gamma") + ": " + e.what());
    }
    require(c.grid.n >= 16, "grid.n", "must be >= 16");
    require(c.grid.r_max > 0.0, "grid.r_max", "must be positive");
    require(c.grid.grading >= 1.0, "grid.grading", "must be >= 1");
    const auto& e = c.evolve;
    require(e.dt_min > 0.0 && e.dt_min <= e.dt_init, "evolve.dt_min", "need 0 < dt_min <= dt_init");
    require(e.dt_init <= e.dt_max, "evolve.dt_max", "need dt_init <= dt_max");
    require(e.t_horizon > 0.0, "evolve.t_horizon", "must be positive");
    require(e.checkpoint_stride >= 1, "evolve.checkpoint_stride", "must be >= 1");
    require(e.blowup_sup_threshold > 0.0, "evolve.blowup_sup_threshold", "must be positive");
    require(e.dissipation_rel_threshold > 0.0, "evolve.dissipation_rel_threshold", "must be positive");
    require(e.stability_safety > 0.0, "evolve.stability_safety", "must be positive");
    require(e.dt_growth >= 1.0, "evolve.dt_growth", "must be >= 1");
    for (double q : e.lq_orders) require(q >= 1.0, "evolve.lq_orders", "entries must be >= 1");
    require(c.data.width > 0.0, "data.width", "must be positive");
    require(c.data.mu > 0.0, "data.mu", "must be positive");
    require(c.data.mollify_radius >= 0.0 && c.data.mollify_radius <= c.grid.r_max, "data.mollify_radius",
            "must lie in [0, grid.r_max]");
    require(c.data.family != DataFamily::Custom || !c.data.path.empty(), "data.path",
            "required for the Custom family");
    const auto [qlo, qhi] = admissible_q_window(c.params());
    require(c.diagnostics.kato_q == 0.0 || (c.diagnostics.kato_q > qlo && c.diagnostics.kato_q < qhi),
            "diagnostics.kato_q",
            "must lie strictly inside (" + format_number(qlo) + ", " + format_number(qhi) + ") or be 0");
    for (double R : c.diagnostics.cutoff_R)
        require(R > 0.0 && 2.0 * R <= c.grid.r_max, "diagnostics.cutoff.R", "need 0 < R <= r_max/2");
    require(c.diagnostics.cutoff_A >= 0.0, "diagnostics.cutoff.A", "must be >= 0");
    require(c.diagnostics.alpha > 0.0 && c.diagnostics.epsilon > 0.0, "diagnostics.cutoff",
            "alpha and epsilon must be positive");
    require(2.0 * c.params().p() > 4.0 * (1.0 + c.diagnostics.alpha) * (1.0 + c.diagnostics.epsilon),
            "diagnostics.cutoff", "violates 2p > 4(1+alpha)(1+epsilon)");
    require(c.dirichlet.radius > 0.0, "dirichlet.radius", "must be positive");
    require(c.dirichlet.small_radius > 0.0 && c.dirichlet.small_radius <= c.dirichlet.big_radius,
            "dirichlet.small_radius", "need 0 < small_radius <= big_radius");
    require(c.dirichlet.grading >= 1.0, "dirichlet.grading", "must be >= 1");
    for (const auto& f : c.output.formats)
        require(f == "csv" || f == "json", "output.formats", "entries must be \"csv\" or \"json\"");
    require(!c.output.dir.empty(), "output.dir", "must be nonempty");
}

inline ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig c;
    detail::Reader root(j, "");
    if (auto m = root.child("model")) {
        std::string sign = to_string(c.model.sign);
        m->get("d", c.model.d);
        m->get("gamma", c.model.gamma);
        m->get("sign", sign);
        if (sign == "focusing") c.model.sign = Sign::Focusing;
        else if (sign == "absorbing") c.model.sign = Sign::Absorbing;
        else throw ConfigError("model.sign: expected \"focusing\" or \"absorbing\"");
        m->reject_unknown();
    }
    if (auto g = root.child("grid")) {
        g->get("n", c.grid.n);
        g->get("r_max", c.grid.r_max);
        g->get("grading", c.grid.grading);
        g->reject_unknown();
    }
    if (auto e = root.child("evolve")) {
        auto& v = c.evolve;
        e->get("dt_init", v.dt_init);
        e->get("dt_max", v.dt_max);
        e->get("dt_min", v.dt_min);
        e->get("t_horizon", v.t_horizon);
        e->get("checkpoint_stride", v.checkpoint_stride);
        e->get("blowup_sup_threshold", v.blowup_sup_threshold);
        e->get("dissipation_rel_threshold", v.dissipation_rel_threshold);
        e->get("stability_safety", v.stability_safety);
        e->get("dt_growth", v.dt_growth);
        e->get("lq_orders", v.lq_orders);
        e->get("max_steps", v.max_steps);
        e->reject_unknown();
    }
    if (auto d = root.child("data")) {
        std::string fam = to_string(c.data.family);
        d->get("family", fam);
        if (fam == "GroundState") c.data.family = DataFamily::GroundState;
        else if (fam == "Gaussian") c.data.family = DataFamily::Gaussian;
        else if (fam == "Custom") c.data.family = DataFamily::Custom;
        else throw ConfigError("data.family: expected GroundState, Gaussian or Custom");
        d->get("amplitude", c.data.amplitude);
        d->get("amplitudes", c.data.amplitudes);
        d->get("mollify_radius", c.data.mollify_radius);
        d->get("width", c.data.width);
        d->get("mu", c.data.mu);
        d->get("path", c.data.path);
        d->reject_unknown();
    }
    if (auto d = root.child("diagnostics")) {
        d->get("kato_q", c.diagnostics.kato_q);
        if (auto cut = d->child("cutoff")) {
            cut->get("R", c.diagnostics.cutoff_R);
            cut->get("A", c.diagnostics.cutoff_A);
            cut->get("alpha", c.diagnostics.alpha);
            cut->get("epsilon", c.diagnostics.epsilon);
            cut->reject_unknown();
        }
        d->reject_unknown();
    }
    if (auto d = root.child("dirichlet")) {
        d->get("radius", c.dirichlet.radius);
        d->get("small_radius", c.dirichlet.small_radius);
        d->get("big_radius", c.dirichlet.big_radius);
        d->get("grading", c.dirichlet.grading);
        d->reject_unknown();
    }
    if (auto o = root.child("output")) {
        o->get("dir", c.output.dir);
        o->get("formats", c.output.formats);
        o->get("snapshot_times", c.output.snapshot_times);
        o->reject_unknown();
    }
    root.reject_unknown();
    // The default Kato exponent is always recorded.
    if (c.evolve.lq_orders.empty()) c.evolve.lq_orders.push_back(9.0);
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

/// Fully resolved config, defaults included.
inline Json to_json(const ExperimentConfig& c) {
    return Json{
        {"model", {{"d", c.model.d}, {"gamma", c.model.gamma}, {"sign", to_string(c.model.sign)}}},
        {"grid", {{"n", c.grid.n}, {"r_max", c.grid.r_max}, {"grading", c.grid.grading}}},
        {"evolve", to_json(c.evolve)},
        {"data",
         {{"family", to_string(c.data.family)},
          {"amplitude", c.data.amplitude},
          {"amplitudes", c.data.amplitudes},
          {"mollify_radius", c.data.mollify_radius},
          {"width", c.data.width},
          {"mu", c.data.mu},
          {"path", c.data.path}}},
        {"diagnostics",
         {{"kato_q", c.diagnostics.kato_q},
          {"cutoff",
           {{"R", c.diagnostics.cutoff_R},
            {"A", c.diagnostics.cutoff_A},
            {"alpha", c.diagnostics.alpha},
            {"epsilon", c.diagnostics.epsilon}}}}},
        {"dirichlet",
         {{"radius", c.dirichlet.radius},
          {"small_radius", c.dirichlet.small_radius},
          {"big_radius", c.dirichlet.big_radius},
          {"grading", c.dirichlet.grading}}},
        {"output",
         {{"dir", c.output.dir}, {"formats", c.output.formats}, {"snapshot_times", c.output.snapshot_times}}}};
}

/// Whole-space initial data of the configured family at amplitude a.
inline RadialField make_initial_data(const ExperimentConfig& c, const GridPtr& grid, double a) {
    const ModelParams params = c.params();
    const double rm = c.data.mollify_radius;
    auto cut = [&](RadialField u) {
        if (rm <= 0.0) return u;
        std::vector<double> v(u.values().begin(), u.values().end());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= smooth_cutoff(2.0 * grid->node(i) / rm);
        return u.with_values(std::move(v));
    };
    switch (c.data.family) {
    case DataFamily::GroundState: return mollified_ground_state(params, grid, a, rm);
    case DataFamily::Gaussian: return cut(gaussian_data(grid, a, c.data.width));
    case DataFamily::Custom: return cut(custom_data(grid, c.data.path, a));
    }
    throw ConfigError("data.family: unsupported");
}

/// Ball data of the configured family: the concentrated ground-state
/// truncation a (W_mu - W_mu(R))_+ or the cut-off Gaussian/custom profile.
inline RadialField make_ball_data(const ExperimentConfig& c, const BallDomain& dom, double a) {
    if (c.data.family == DataFamily::GroundState)
        return ball_ground_state_trial(c.params(), dom, c.data.mu).scaled(a);
    ExperimentConfig cc = c;
    if (cc.data.mollify_radius <= 0.0 || cc.data.mollify_radius > dom.radius()) cc.data.mollify_radius = dom.radius();
    return make_initial_data(cc, dom.grid(), a).with_boundary(dom.boundary());
}

}  // namespace hslab
