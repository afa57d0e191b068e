#pragma once

// Conservative finite-volume discretisation of the radial Laplacian
//   Delta u = u_rr + (d-1)/r u_r
// on a RadialGrid. With M = diag(cell_weights_plain) and the symmetric
// stiffness matrix A (face fluxes plus the harmonic exterior tail for
// DecayAtInfinity fields) the discrete operator is Delta_h = -M^{-1} A, and
// u^T A u is the discrete Dirichlet energy ||u||^2_{H^1-dot}.

#include <cassert>
#include <span>
#include <vector>

#include "hslab/core.hpp"

namespace hslab {

/// (A u)_i over all nodes, honouring the boundary closure of `b`.
inline std::vector<double> apply_stiffness(const RadialGrid& g, std::span<const double> u, const Boundary& b) {
    const std::size_t n = g.size();
    const auto c = g.conductances();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double flux = c[i] * (u[i] - u[i + 1]);
        out[i] += flux;
        out[i + 1] -= flux;
    }
    if (b.kind == Boundary::Kind::DecayAtInfinity) out[n - 1] += g.tail_coefficient() * u[n - 1];
    return out;
}

/// Pointwise discrete Laplacian -(A u)_i / w_i.
inline std::vector<double> discrete_laplacian(const RadialField& u) {
    const auto& g = u.grid();
    auto au = apply_stiffness(g, u.values(), u.boundary());
    const auto w = g.cell_weights_plain();
    for (std::size_t i = 0; i < au.size(); ++i) au[i] = -au[i] / w[i];
    return au;
}

/// u^T A u.
inline double dirichlet_energy(const RadialGrid& g, std::span<const double> u, const Boundary& b) {
    const auto c = g.conductances();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double du = u[i + 1] - u[i];
        s += c[i] * du * du;
    }
    if (b.kind == Boundary::Kind::DecayAtInfinity) s += g.tail_coefficient() * u.back() * u.back();
    return s;
}

/// Symmetric tridiagonal system (M + theta A) restricted to the active nodes,
/// solved with the Thomas algorithm. The matrix is an M-matrix for theta > 0.
class ShiftedStiffness {
public:
    ShiftedStiffness(const RadialGrid& g, const Boundary& b, double theta)
        : active_(b.active_count(g)), diag_(active_), off_(active_ > 0 ? active_ - 1 : 0) {
        const std::size_t n = g.size();
        const auto c = g.conductances();
        const auto w = g.cell_weights_plain();
        for (std::size_t i = 0; i < active_; ++i) {
            double a = 0.0;
            if (i > 0) a += c[i - 1];
            if (i + 1 < n) a += c[i];
            if (i == n - 1 && b.kind == Boundary::Kind::DecayAtInfinity) a += g.tail_coefficient();
            diag_[i] = w[i] + theta * a;
        }
        for (std::size_t i = 0; i + 1 < active_; ++i) off_[i] = -theta * c[i];
    }

    std::size_t active() const { return active_; }

    /// Solves in place; entries at index >= active() are set to zero.
    void solve(std::vector<double>& rhs) const {
        const std::size_t m = active_;
        assert(rhs.size() >= m);
        scratch_.resize(m);
        double beta = diag_[0];
        assert(beta > 0.0);
        rhs[0] /= beta;
        for (std::size_t i = 1; i < m; ++i) {
            scratch_[i] = off_[i - 1] / beta;
            beta = diag_[i] - off_[i - 1] * scratch_[i];
            assert(beta > 0.0);
            rhs[i] = (rhs[i] - off_[i - 1] * rhs[i - 1]) / beta;
        }
        for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= scratch_[i + 1] * rhs[i + 1];
        for (std::size_t i = m; i < rhs.size(); ++i) rhs[i] = 0.0;
    }

private:
    std::size_t active_;
    std::vector<double> diag_, off_;
    mutable std::vector<double> scratch_;
};

}  // namespace hslab
