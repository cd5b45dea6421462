#pragma once

// Energy functional of the viscoelastic problem,
//
//   E(t) = 1/2 int G(t)|u_x|^2 + 1/2 int |u_t|^2
//          - 1/2 int_0^t ds int G'(s) |u_x(t) - u_x(t-s)|^2,
//
// whose rate is int f u_t + 1/2 int G'(t)|u_x|^2 - 1/2 int_0^t G''(s)|...|^2,
// together with the a priori bound alpha e^T C, alpha = max{1/G(T+1), 1}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "viscokern/discretization.hpp"
#include "viscokern/errors.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/mollify.hpp"
#include "viscokern/solver.hpp"

namespace viscokern {

struct EnergySample {
    double t;
    double elastic;   // 1/2 G(t) ||u_x||^2
    double kinetic;   // 1/2 ||u_t||^2
    double history;   // -1/2 int_0^t G'(s) ||u_x(t) - u_x(t-s)||^2 ds
    double total;
    double plain;     // 1/2 ||u_x||^2 + 1/2 ||u_t||^2
};

struct EnergyReport {
    std::vector<EnergySample> samples;
    double alpha = 1.0;     // max{1/G(T+1), 1}
    double C = 0.0;         // 1/2 ||f||^2_{L2(D)} + 1/2 G(0) ||u0'||^2 + 1/2 ||u1||^2
    double bound = 0.0;     // alpha e^T C
    bool forced = false;    // f is not identically zero
    std::optional<double> identity_residual;  // relative; absent when G'' is unavailable
};

namespace detail {

/// Cell gradients (u_{j+1} - u_j)/h including the two boundary cells.
inline std::vector<double> cell_gradient(const Field& u) {
    const std::size_t n = u.size();
    const double h = u.grid().h();
    std::vector<double> g(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double left = j > 0 ? u[j - 1] : 0.0;
        const double right = j < n ? u[j] : 0.0;
        g[j] = (right - left) / h;
    }
    return g;
}

inline double sq_norm(const std::vector<double>& v, double h) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return h * s;
}

inline double sq_distance(const std::vector<double>& a, const std::vector<double>& b, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return h * s;
}

template <class Kernel>
std::optional<double> second_derivative_of(const Kernel& k, double t) {
    if constexpr (requires { k.second_derivative(t); }) {
        return k.second_derivative(t);
    } else {
        return std::nullopt;
    }
}

}  // namespace detail

/// ||grad u||^2 with the cell-difference stencil, the form for which
/// -(L u, u)_h = ||grad u||^2 holds exactly.
inline double gradient_sq_norm(const Field& u) {
    return detail::sq_norm(detail::cell_gradient(u), u.grid().h());
}

/// Energy terms at every time level of `sol` for the kernel it was solved with.
template <MemoryKernel Kernel>
EnergyReport energy_series(const SolutionField& sol, const Kernel& kernel) {
    if (sol.snapshots.size() < 3 || sol.snapshots.size() != sol.n_steps + 1) {
        throw ConfigurationError(
            "energy series needs every time level (at least 3 snapshots) for the history integral");
    }
    const Grid& grid = sol.grid;
    const double h = grid.h();
    const double dt = sol.dt();
    const std::size_t N = sol.n_steps;

    const Field u1 = sample(grid, sol.data.u1);
    const std::vector<Field> velocities =
        sol.velocities.empty() ? reconstruct_velocity(sol.snapshots, dt, &u1) : sol.velocities;

    std::vector<std::vector<double>> grad;
    grad.reserve(N + 1);
    for (const auto& u : sol.snapshots) grad.push_back(detail::cell_gradient(u));

    const GdotFormWeights weights(kernel, dt, N);

    EnergyReport rep;
    rep.samples.reserve(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
        const double t = sol.time(k);
        const double gx = detail::sq_norm(grad[k], h);
        double vv = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) vv += velocities[k][i] * velocities[k][i];
        vv *= h;

        double hist = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            const double w = weights.lag(k, j);
            if (w == 0.0) continue;
            hist += w * detail::sq_distance(grad[k], grad[k - j], h);
        }

        EnergySample s{};
        s.t = t;
        s.elastic = 0.5 * kernel(t) * gx;
        s.kinetic = 0.5 * vv;
        s.history = 0.0 - 0.5 * hist;  // +0 rather than -0 for an empty history
        s.total = s.elastic + s.kinetic + s.history;
        s.plain = 0.5 * gx + 0.5 * vv;
        rep.samples.push_back(s);
    }

    // bound constant
    rep.forced = !sol.data.f.is_zero_literal();
    double f_sq = 0.0;
    if (rep.forced) {
        for (std::size_t n = 0; n <= N; ++n) {
            double level = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double v = sol.data.f(grid.x(i), sol.time(n));
                level += v * v;
            }
            f_sq += ((n == 0 || n == N) ? 0.5 : 1.0) * level * h * dt;
        }
    }
    rep.alpha = std::max(1.0 / reference_modulus(kernel, sol.T), 1.0);
    rep.C = 0.5 * f_sq + 0.5 * kernel(0.0) * detail::sq_norm(grad[0], h) +
            0.5 * detail::sq_norm(std::vector<double>(u1.values().begin(), u1.values().end()), h);
    rep.bound = rep.alpha * std::exp(sol.T) * rep.C;

    // identity residual where G'' is a function
    if (detail::second_derivative_of(kernel, 0.0).has_value()) {
        std::vector<double> ddG(N + 1);
        for (std::size_t j = 0; j <= N; ++j) ddG[j] = *detail::second_derivative_of(kernel, sol.time(j));
        double worst = 0.0;
        double scale = rep.samples.front().total / sol.T;
        for (std::size_t k = 1; k < N; ++k) {
            const double t = sol.time(k);
            double rhs = 0.5 * kernel.one_sided_derivative(t, Side::left) *
                         detail::sq_norm(grad[k], h);
            double dissip = 0.0;
            for (std::size_t j = 0; j <= k; ++j) {
                const double w = (j == 0 || j == k) ? 0.5 * dt : dt;
                dissip += w * ddG[j] * detail::sq_distance(grad[k], grad[k - j], h);
            }
            rhs -= 0.5 * dissip;
            if (rep.forced) {
                double work = 0.0;
                for (std::size_t i = 0; i < grid.size(); ++i)
                    work += sol.data.f(grid.x(i), t) * velocities[k][i];
                rhs += h * work;
            }
            const double rate = (rep.samples[k + 1].total - rep.samples[k - 1].total) / (2.0 * dt);
            worst = std::max(worst, std::abs(rate - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        rep.identity_residual = scale > 0.0 ? worst / scale : 0.0;
    }
    return rep;
}

struct EnergyVerdict {
    std::optional<bool> monotone;  // absent when f is not zero
    bool bounded = true;           // E(t) <= alpha e^T C at every step
    bool plain_bounded = true;     // 1/2||u_x||^2 + 1/2||u_t||^2 <= alpha e^T C
    bool history_nonnegative = true;
    std::optional<double> first_increase;  // time of the first monotonicity failure
    std::optional<double> first_excess;    // time of the first bound failure
    double min_history = 0.0;

    bool passed() const noexcept {
        return monotone.value_or(true) && bounded && plain_bounded && history_nonnegative;
    }
};

/// Dissipation and boundedness verdict. Monotonicity is only required when
/// f = 0; `tol` is relative to E(0) (or to the bound).
inline EnergyVerdict dissipation_check(const EnergyReport& rep, bool f_is_zero, double tol = 1e-3,
                                       double history_tol = 1e-9) {
    EnergyVerdict v;
    if (rep.samples.empty()) return v;
    const double E0 = rep.samples.front().total;
    const double slack = tol * std::max(std::abs(E0), rep.bound);

    if (f_is_zero) {
        v.monotone = true;
        for (std::size_t k = 1; k < rep.samples.size(); ++k) {
            if (rep.samples[k].total > rep.samples[k - 1].total + tol * std::abs(E0)) {
                v.monotone = false;
                v.first_increase = rep.samples[k].t;
                break;
            }
        }
    }
    v.min_history = rep.samples.front().history;
    for (const auto& s : rep.samples) {
        v.min_history = std::min(v.min_history, s.history);
        if (s.total > rep.bound + slack) {
            v.bounded = false;
            if (!v.first_excess) v.first_excess = s.t;
        }
        if (s.plain > rep.bound + slack) {
            v.plain_bounded = false;
            if (!v.first_excess) v.first_excess = s.t;
        }
        if (s.history < -history_tol) v.history_nonnegative = false;
    }
    return v;
}

struct ModeDecay {
    std::vector<double> times;                // coarse time levels
    std::vector<std::vector<double>> series;  // |(w(t), w_i)| per mode i, per level
    std::vector<double> sup;                  // sup over t per mode
};

/// Projections of w = u_a - u_b onto the first Dirichlet modes. When the
/// two solutions differ in resolution, the finer one is restricted to the
/// coarser grid (grids must be nested in space and time).
inline ModeDecay mode_decay_diagnostic(const SolutionField& sol_a, const SolutionField& sol_b,
                                       std::size_t n_modes) {
    if (sol_a.grid.a() != sol_b.grid.a() || sol_a.grid.b() != sol_b.grid.b() || sol_a.T != sol_b.T)
        throw ConfigurationError("mode diagnostic needs identical domains and horizons");

    const bool a_coarse = sol_a.grid.size() <= sol_b.grid.size();
    const SolutionField& coarse = a_coarse ? sol_a : sol_b;
    const SolutionField& fine = a_coarse ? sol_b : sol_a;
    const std::size_t nc = coarse.grid.size() + 1;
    const std::size_t nf = fine.grid.size() + 1;
    if (nf % nc != 0 || fine.n_steps % coarse.n_steps != 0)
        throw ConfigurationError("mode diagnostic needs nested space and time grids");
    const std::size_t rx = nf / nc;
    const std::size_t rt = fine.n_steps / coarse.n_steps;

    const auto modes = dirichlet_eigenpairs(coarse.grid, n_modes);
    const double sign = a_coarse ? 1.0 : -1.0;

    ModeDecay out;
    out.series.assign(n_modes, {});
    out.sup.assign(n_modes, 0.0);
    for (std::size_t n = 0; n <= coarse.n_steps; ++n) {
        Field w(coarse.grid);
        for (std::size_t i = 0; i < coarse.grid.size(); ++i)
            w[i] = sign * (coarse.snapshots[n][i] - fine.snapshots[n * rt][(i + 1) * rx - 1]);
        out.times.push_back(coarse.time(n));
        for (std::size_t m = 0; m < n_modes; ++m) {
            const double p = std::abs(project(w, modes[m].mode));
            out.series[m].push_back(p);
            out.sup[m] = std::max(out.sup[m], p);
        }
    }
    return out;
}

}  // namespace viscokern
