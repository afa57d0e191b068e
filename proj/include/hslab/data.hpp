#pragma once

// Initial-data families used by the experiments.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hslab/core.hpp"
#include "hslab/functionals.hpp"

namespace hslab {

/// lambda W(r) chi(2r/R): equal to lambda W on r <= R/2 and zero for r >= R,
/// where R is `support_radius` (0.8 r_max when nonpositive).
inline RadialField mollified_ground_state(const ModelParams& params, const GridPtr& grid, double lambda,
                                          double support_radius = 0.0, Boundary boundary = Boundary::decay()) {
    const ModelParams foc = params.with_sign(Sign::Focusing);
    const GroundStateSpec spec(foc);
    const double e = 2.0 - params.gamma();
    const double rc = support_radius > 0.0 ? support_radius : 0.8 * grid->r_max();
    if (rc > grid->r_max() * (1.0 + 1e-12)) throw DomainError("mollify radius exceeds r_max");
    return RadialField::sample(
        grid, [&](double r) { return lambda * spec(r, e) * smooth_cutoff(2.0 * r / rc); }, boundary);
}

/// a exp(-r^2 / width^2).
inline RadialField gaussian_data(const GridPtr& grid, double amplitude, double width = 1.0,
                                 Boundary boundary = Boundary::decay()) {
    if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
    return RadialField::sample(
        grid, [&](double r) { return amplitude * std::exp(-r * r / (width * width)); }, boundary);
}

/// Two whitespace-separated columns r u(r), '#' comments allowed, r strictly
/// increasing. The profile is interpolated monotonically onto the grid, held
/// constant below the first sample and set to zero beyond the last.
inline RadialField custom_data(const GridPtr& grid, const std::string& path, double amplitude,
                               Boundary boundary = Boundary::decay()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file " + path);
    std::vector<double> rs, us;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double r, u;
        if (!(ss >> r)) continue;
        if (!(ss >> u) || !std::isfinite(r) || !std::isfinite(u))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected two finite numbers");
        if (!rs.empty() && r <= rs.back())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": radii must increase");
        rs.push_back(r);
        us.push_back(u);
    }
    if (rs.size() < 2) throw std::runtime_error(path + ": need at least two samples");
    const MonotoneCubic f(rs, us);
    const double r_last = rs.back();
    return RadialField::sample(
        grid, [&](double r) { return r > r_last ? 0.0 : amplitude * f(r); }, boundary);
}

}  // namespace hslab
