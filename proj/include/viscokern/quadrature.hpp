#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "viscokern/errors.hpp"

namespace viscokern::quad {

/// Fixed Gauss-Legendre order used for smooth panels.
inline constexpr unsigned gauss_order = 16;

/// Absolute/relative tolerance for adaptive quadrature of expression kernels.
inline constexpr double adaptive_tol = 1e-8;

/// Nodes and weights of a quadrature rule on some interval.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule of `gauss_order` points mapped to [lo, hi].
inline Rule gauss_rule(double lo, double hi) {
    using G = boost::math::quadrature::gauss<double, gauss_order>;
    const auto& abs = G::abscissa();
    const auto& wts = G::weights();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    Rule r;
    r.nodes.reserve(gauss_order);
    r.weights.reserve(gauss_order);
    // boost stores the non-negative half of the symmetric rule
    for (std::size_t i = abs.size(); i-- > 0;) {
        if (abs[i] == 0.0) continue;
        r.nodes.push_back(mid - half * abs[i]);
        r.weights.push_back(half * wts[i]);
    }
    for (std::size_t i = 0; i < abs.size(); ++i) {
        r.nodes.push_back(mid + half * abs[i]);
        r.weights.push_back(half * wts[i]);
    }
    return r;
}

/// Single-panel Gauss-Legendre integral.
template <class F>
double gauss(F&& f, double lo, double hi) {
    if (hi == lo) return 0.0;
    return boost::math::quadrature::gauss<double, gauss_order>::integrate(f, lo, hi);
}

/// Composite Gauss over `panels` equal panels of [lo, hi].
template <class F>
double composite_gauss(F&& f, double lo, double hi, std::size_t panels) {
    if (hi == lo || panels == 0) return 0.0;
    const double w = (hi - lo) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + static_cast<double>(p) * w;
        const double b = (p + 1 == panels) ? hi : a + w;
        sum += gauss(f, a, b);
    }
    return sum;
}

/// Adaptive Gauss-Kronrod integral; throws ToleranceError on non-convergence.
template <class F>
double adaptive(F&& f, double lo, double hi, double tol = adaptive_tol) {
    if (hi == lo) return 0.0;
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, lo, hi, 15, tol, &err);
    if (!std::isfinite(value) || err > tol * std::max(1.0, std::abs(value))) {
        throw ToleranceError("adaptive quadrature on [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] did not converge (error estimate " +
                             std::to_string(err) + ")");
    }
    return value;
}

}  // namespace viscokern::quad
