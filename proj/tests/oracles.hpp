#pragma once

// Test-side reference values: adaptive quadrature of closed forms, kept
// independent of the library's cell-weight quadrature.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

inline double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// int_lo^hi f(r) dr, adaptive Gauss-Kronrod.
template <class F>
double integrate(F f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-13);
}

// int_lo^inf f(r) dr.
template <class F>
double integrate_tail(F f, double lo) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double s) { return f(lo + s); });
}

// Ground state for d = 3, gamma = 1 and its derivative.
inline double w31(double r) { return std::sqrt(2.0) / (1.0 + r); }
inline double dw31(double r) { return -std::sqrt(2.0) / ((1.0 + r) * (1.0 + r)); }

inline double kinetic_w31() {
    return 4.0 * std::numbers::pi * integrate_tail([](double r) { return dw31(r) * dw31(r) * r * r; }, 0.0);
}

inline double potential_w31() {
    return 4.0 * std::numbers::pi * integrate_tail([](double r) { return std::pow(w31(r), 4) * r; }, 0.0);
}

}  // namespace oracle
