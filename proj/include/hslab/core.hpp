#pragma once

// Model parameters, graded radial grids, sampled radial fields and the
// quadrature rules every other component computes with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hslab {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class Sign { Focusing, Absorbing };

inline const char* to_string(Sign s) { return s == Sign::Focusing ? "focusing" : "absorbing"; }

/// 2*(gamma) = 2(d - gamma)/(d - 2).
inline double critical_exponent(int d, double gamma) {
    if (d < 3) throw DomainError("dimension d must be >= 3, got " + std::to_string(d));
    if (!(gamma >= 0.0 && gamma < 2.0))
        throw DomainError("gamma must lie in [0, 2), got " + std::to_string(gamma));
    return 2.0 * (d - gamma) / (d - 2.0);
}

/// Surface area of the unit sphere S^{d-1}.
inline double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

class ModelParams {
public:
    ModelParams(int d, double gamma, Sign sign = Sign::Focusing)
        : d_(d), gamma_(gamma), sign_(sign) {
        critical_exponent(d, gamma);  // validates
    }

    int dim() const { return d_; }
    double gamma() const { return gamma_; }
    Sign sign() const { return sign_; }
    bool focusing() const { return sign_ == Sign::Focusing; }

    // exponents recomputed from (d, gamma) on every call
    double p() const { return critical_exponent(d_, gamma_); }
    double q_c() const { return 2.0 * d_ / (d_ - 2.0); }
    /// +1 for the focusing source, -1 for the absorbing one.
    double sign_factor() const { return focusing() ? 1.0 : -1.0; }

    ModelParams with_sign(Sign s) const { return {d_, gamma_, s}; }

private:
    int d_;
    double gamma_;
    Sign sign_;
};

/// Graded cell-centred radial mesh on [0, r_max].
///
/// Node i sits at the image of xi_i = (i + 1/2)/(n - 1/2) under r = r_max xi^s,
/// so the last node is r_max itself and the first node is strictly positive.
/// Interior faces sit halfway between neighbouring nodes, face_0 = 0 and
/// face_n = r_max. Cell weights are exact integrals of omega r^{d-1} and
/// omega r^{d-1-gamma} over [face_i, face_{i+1}].
class RadialGrid {
public:
    int dim() const { return d_; }
    double gamma() const { return gamma_; }
    std::size_t size() const { return nodes_.size(); }
    double r_max() const { return faces_.back(); }
    double grading() const { return grading_; }
    double omega() const { return omega_; }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> faces() const { return faces_; }
    std::span<const double> cell_weights_plain() const { return w_; }
    std::span<const double> cell_weights_singular() const { return w_sing_; }
    /// Cell average of r^{-gamma}: cell_weights_singular / cell_weights_plain.
    std::span<const double> singular_density() const { return rho_; }
    /// Face conductances omega face^{d-1} / (r_{i+1} - r_i), size n-1.
    std::span<const double> conductances() const { return cond_; }
    /// Coefficient of u_N^2 in the Dirichlet energy of the harmonic exterior
    /// extension u_N (r_N/r)^{d-2}: omega (d-2) r_N^{d-2}.
    double tail_coefficient() const { return tail_; }

    double node(std::size_t i) const { return nodes_[i]; }

    /// omega * integral of r^{d-1-shift} over [lo, hi].
    double shell_integral(double lo, double hi, double shift = 0.0) const {
        const double a = d_ - shift;
        return omega_ * (std::pow(hi, a) - std::pow(lo, a)) / a;
    }

    /// Index of the first node with r >= radius (size() if none).
    std::size_t first_node_at_or_beyond(double radius) const {
        const double tol = 1e-12 * r_max();
        auto it = std::lower_bound(nodes_.begin(), nodes_.end(), radius - tol);
        return static_cast<std::size_t>(it - nodes_.begin());
    }

private:
    friend std::shared_ptr<const RadialGrid> make_graded_grid(int, std::size_t, double, double, double);
    RadialGrid() = default;

    int d_ = 3;
    double gamma_ = 0.0;
    double grading_ = 1.0;
    double omega_ = 0.0;
    double tail_ = 0.0;
    std::vector<double> nodes_, faces_, w_, w_sing_, rho_, cond_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_graded_grid(int d, std::size_t n, double r_max, double grading_strength,
                                double gamma = 0.0) {
    critical_exponent(d, gamma);
    if (n < 16) throw DomainError("grid needs at least 16 nodes");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw DomainError("r_max must be positive and finite");
    if (!(grading_strength >= 1.0)) throw DomainError("grading strength must be >= 1");

    std::shared_ptr<RadialGrid> g(new RadialGrid());
    g->d_ = d;
    g->gamma_ = gamma;
    g->grading_ = grading_strength;
    g->omega_ = sphere_area(d);

    const double denom = static_cast<double>(n) - 0.5;
    auto map = [&](double xi) { return r_max * std::pow(xi, grading_strength); };

    g->nodes_.resize(n);
    g->faces_.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) g->nodes_[i] = map((static_cast<double>(i) + 0.5) / denom);
    g->nodes_.back() = r_max;
    g->faces_[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) g->faces_[i] = 0.5 * (g->nodes_[i - 1] + g->nodes_[i]);
    g->faces_[n] = r_max;

    g->w_.resize(n);
    g->w_sing_.resize(n);
    g->rho_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = g->faces_[i], hi = g->faces_[i + 1];
        g->w_[i] = g->shell_integral(lo, hi, 0.0);
        g->w_sing_[i] = g->shell_integral(lo, hi, gamma);
        g->rho_[i] = g->w_sing_[i] / g->w_[i];
        if (!(g->w_[i] > 0.0) || !(g->w_sing_[i] > 0.0) || !std::isfinite(g->w_sing_[i]))
            throw DomainError("degenerate grid cell; increase r_max or reduce n");
    }
    g->cond_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        g->cond_[i] = g->omega_ * std::pow(g->faces_[i + 1], d - 1) / (g->nodes_[i + 1] - g->nodes_[i]);
    g->tail_ = g->omega_ * (d - 2.0) * std::pow(r_max, d - 2);
    return g;
}

/// Closure of a radial field at the outer edge of its grid.
struct Boundary {
    enum class Kind { DecayAtInfinity, DirichletAtRmax, DirichletOnBall };
    Kind kind = Kind::DecayAtInfinity;
    double radius = 0.0;  // only meaningful for DirichletOnBall

    static Boundary decay() { return {Kind::DecayAtInfinity, 0.0}; }
    static Boundary dirichlet_at_rmax() { return {Kind::DirichletAtRmax, 0.0}; }
    static Boundary ball(double radius) {
        if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
        return {Kind::DirichletOnBall, radius};
    }

    bool is_dirichlet() const { return kind != Kind::DecayAtInfinity; }

    /// Number of leading nodes that carry unknowns; the remaining nodes are
    /// pinned to zero.
    std::size_t active_count(const RadialGrid& g) const {
        switch (kind) {
        case Kind::DecayAtInfinity: return g.size();
        case Kind::DirichletAtRmax: return g.size() - 1;
        case Kind::DirichletOnBall: {
            if (radius > g.r_max() * (1.0 + 1e-12))
                throw DomainError("ball radius exceeds the grid's r_max");
            const std::size_t k = g.first_node_at_or_beyond(radius);
            if (k < 2) throw DomainError("ball radius too small for the grid");
            return std::min(k, g.size() - 1);
        }
        }
        return g.size();
    }

    /// Effective boundary radius: the first pinned node (r_max for decay).
    double effective_radius(const RadialGrid& g) const {
        const std::size_t m = active_count(g);
        return m < g.size() ? g.node(m) : g.r_max();
    }

    bool operator==(const Boundary&) const = default;
};

inline const char* to_string(Boundary::Kind k) {
    switch (k) {
    case Boundary::Kind::DecayAtInfinity: return "decay";
    case Boundary::Kind::DirichletAtRmax: return "dirichlet_rmax";
    case Boundary::Kind::DirichletOnBall: return "dirichlet_ball";
    }
    return "?";
}

/// Real samples u(r_i) on a shared immutable grid.
class RadialField {
public:
    RadialField(GridPtr grid, std::vector<double> values, Boundary boundary = Boundary::decay())
        : grid_(std::move(grid)), values_(std::move(values)), boundary_(boundary) {
        if (!grid_) throw std::invalid_argument("RadialField needs a grid");
        if (values_.size() != grid_->size())
            throw std::invalid_argument("RadialField: value count does not match grid size");
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("RadialField: non-finite sample");
        boundary_.active_count(*grid_);  // validates ball radius
    }

    static RadialField zeros(GridPtr grid, Boundary boundary = Boundary::decay()) {
        const std::size_t n = grid->size();
        return {std::move(grid), std::vector<double>(n, 0.0), boundary};
    }

    template <class F>
    static RadialField sample(GridPtr grid, F&& f, Boundary boundary = Boundary::decay()) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
        RadialField out(std::move(grid), std::move(v), boundary);
        out.zero_pinned();
        return out;
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    const Boundary& boundary() const { return boundary_; }

    RadialField with_values(std::vector<double> v) const { return {grid_, std::move(v), boundary_}; }
    RadialField with_boundary(Boundary b) const {
        RadialField out(grid_, values_, b);
        out.zero_pinned();
        return out;
    }
    RadialField scaled(double a) const {
        std::vector<double> v(values_);
        for (double& x : v) x *= a;
        return with_values(std::move(v));
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// True when every node outside the active set holds exactly zero.
    bool pinned_nodes_zero() const {
        for (std::size_t i = boundary_.active_count(*grid_); i < values_.size(); ++i)
            if (values_[i] != 0.0) return false;
        return true;
    }

private:
    void zero_pinned() {
        for (std::size_t i = boundary_.active_count(*grid_); i < values_.size(); ++i) values_[i] = 0.0;
    }

    GridPtr grid_;
    std::vector<double> values_;
    Boundary boundary_;
};

/// Sum_i weight_i |u_i|^power with the plain (r^{d-1}) or singular
/// (r^{d-1-gamma}) cell weights.
inline double quadrature(const RadialField& u, double power, bool singular) {
    if (!(power >= 1.0)) throw DomainError("quadrature power must be >= 1");
    auto w = singular ? u.grid().cell_weights_singular() : u.grid().cell_weights_plain();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::abs(u[i]);
        if (std::isnan(a)) throw DomainError("quadrature: NaN sample");
        if (a != 0.0) s += w[i] * std::pow(a, power);
    }
    return s;
}

/// Weighted L^2 inner product sum_i w_i u_i v_i.
inline double inner(const RadialField& u, const RadialField& v) {
    auto w = u.grid().cell_weights_plain();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * v[i];
    return s;
}

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), quintic smoothstep in between so
/// that the profile (and its square) is C^2.
inline double smooth_cutoff(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double x = s - 1.0;
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slopes with the usual three-point one-sided end slopes).
class MonotoneCubic {
public:
    MonotoneCubic(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need >= 2 matching samples");
        std::vector<double> h(n - 1), del(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            del[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        if (n == 2) {
            m_[0] = m_[1] = del[0];
            return;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (del[k - 1] * del[k] <= 0.0) continue;
            const double w1 = 2.0 * h[k] + h[k - 1], w2 = h[k] + 2.0 * h[k - 1];
            m_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
        m_[0] = end_slope(h[0], h[1], del[0], del[1]);
        m_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }

    double operator()(double t) const {
        if (t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[k + 1] - x_[k], s = (t - x_[k]) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y_[k] + (s3 - 2 * s2 + s) * h * m_[k] + (-2 * s3 + 3 * s2) * y_[k + 1] +
               (s3 - s2) * h * m_[k + 1];
    }

private:
    static double end_slope(double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0)) return 3.0 * d0;
        return m;
    }

    std::vector<double> x_, y_, m_;
};

/// u_lambda(r) = lambda^{(d-2)/2} u(lambda r), resampled onto u's grid.
///
/// Beyond the grid the field is continued by its harmonic tail u_N (r_N/r)^{d-2}
/// for DecayAtInfinity fields and by zero otherwise; below the first node it is
/// held constant.
inline RadialField scale_field(const RadialField& u, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("scale_field: lambda must be positive");
    const auto& g = u.grid();
    if (lambda == 1.0) return u;
    const int d = g.dim();
    const double amp = std::pow(lambda, 0.5 * (d - 2));
    const MonotoneCubic interp(g.nodes(), u.values());
    const double r_end = g.r_max(), u_end = u[u.size() - 1];
    const bool decay = u.boundary().kind == Boundary::Kind::DecayAtInfinity;
    return RadialField::sample(
        u.grid_ptr(),
        [&](double r) {
            const double s = lambda * r;
            if (s <= r_end) return amp * interp(s);
            return decay ? amp * u_end * std::pow(r_end / s, d - 2) : 0.0;
        },
        u.boundary());
}

}  // namespace hslab
