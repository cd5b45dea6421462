#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "viscokern/discretization.hpp"
#include "viscokern/errors.hpp"
#include "viscokern/expr.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/solver.hpp"

namespace viscokern {

namespace detail {
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string("(") + buf + ")";
}
}  // namespace detail

/// Manufactured solution u*(x, t) = sin(k (x - a)) cos(t), k = pi / (b - a),
/// for a Prony kernel. The convolution of G' with cos is closed form:
///
///   int_0^t exp(-lam (t - s)) cos(s) ds = (lam cos t + sin t - lam e^{-lam t}) / (lam^2 + 1)
///
/// so f = sin(k(x-a)) [ -cos t + k^2 G(0) cos t - k^2 sum_i (g_i/tau_i) J_i(t) ].
struct ManufacturedSolution {
    ProblemData data;
    double a = 0.0;
    double k = 0.0;

    double operator()(double x, double t) const { return std::sin(k * (x - a)) * std::cos(t); }
};

inline ManufacturedSolution manufactured_prony(const RelaxationKernel& kernel, const Grid& grid) {
    const auto* p = std::get_if<Prony>(&kernel.variant());
    if (!p) throw UnsupportedKernel("the manufactured solution is available for Prony kernels only");

    const double k = std::numbers::pi / grid.length();
    const double k2 = k * k;
    const std::string mode = "sin(" + detail::num(k) + "*(x-" + detail::num(grid.a()) + "))";

    std::string bracket = "-cos(t) + " + detail::num(k2 * kernel(0.0)) + "*cos(t)";
    for (const auto& term : p->terms) {
        const double lam = 1.0 / term.tau;
        const double c = k2 * (term.g / term.tau) / (lam * lam + 1.0);
        bracket += " - " + detail::num(c) + "*(" + detail::num(lam) + "*cos(t) + sin(t) - " +
                   detail::num(lam) + "*exp(-" + detail::num(lam) + "*t))";
    }

    ManufacturedSolution m;
    m.a = grid.a();
    m.k = k;
    m.data.u0 = parse(mode);
    m.data.u1 = parse("0");
    m.data.f = parse(mode + "*(" + bracket + ")");
    return m;
}

}  // namespace viscokern
