#pragma once

// Time marching for the 1-D viscoelasticity problem on a uniform grid.
//
// Integral scheme (needs only K = int G, valid for merely continuous G):
//   u^n = sum_{m<n} w_{n,m} K(t_n - t_m) L u^m + u0 + t_n u1 + F(t_n)
// with trapezoid weights w and F the double time integral of f. Since
// K(0) = 0 the current level has zero weight and the update is explicit.
//
// Differential scheme (needs dG/dt a.e.):
//   u^{n+1} = 2u^n - u^{n-1} + dt^2 [G(0) L u^n + Q^n + f^n]
// where Q^n is the trapezoid rule for int_0^{t_n} G'(t_n - tau) L u(tau) dtau,
// split at the kinks of G.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "viscokern/discretization.hpp"
#include "viscokern/errors.hpp"
#include "viscokern/expr.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/mollify.hpp"

namespace viscokern {

enum class Scheme { integral, differential };

inline const char* to_string(Scheme s) noexcept {
    return s == Scheme::integral ? "integral" : "differential";
}

/// Initial displacement, initial velocity and body force.
struct ProblemData {
    Expr u0;
    Expr u1;
    Expr f;
};

template <MemoryKernel Kernel>
struct ProblemSpec {
    Grid grid;
    double T;
    std::size_t n_steps;
    Kernel kernel;
    ProblemData data;
    Scheme scheme = Scheme::integral;
    KinkPolicy kink_policy = KinkPolicy::left_limit;
    bool recursive_prony = true;
    double cfl_safety = 0.9;

    double dt() const noexcept { return T / static_cast<double>(n_steps); }
};

struct RunMetadata {
    Scheme scheme = Scheme::integral;
    std::string kernel;
    std::string memory_quadrature;
    bool recursive_prony = false;
    double seconds = 0.0;
};

/// u at every time level t_n = n dt, n = 0..n_steps, on the interior nodes.
struct SolutionField {
    Grid grid;
    double T = 0.0;
    std::size_t n_steps = 0;
    ProblemData data;
    std::vector<Field> snapshots;
    std::vector<Field> velocities;  // empty unless the scheme produced them
    RunMetadata meta;

    double dt() const noexcept { return T / static_cast<double>(n_steps); }
    double time(std::size_t n) const noexcept { return static_cast<double>(n) * dt(); }
};

// ---------------------------------------------------------------------------
// Convolution weights

/// Trapezoid weights for int_0^{t_n} K(t_n - tau) v(tau) dtau over levels
/// m = 0..n-1, indexed by lag j = n - m (j = 1..n). The j = 0 term has
/// K(0) = 0 and is dropped.
class KFormWeights {
public:
    KFormWeights(std::vector<double> K_on_grid, double dt) : K_(std::move(K_on_grid)), dt_(dt) {}

    template <MemoryKernel Kernel>
    KFormWeights(const Kernel& kernel, double dt, std::size_t n_steps)
        : KFormWeights(IntegratedKernel<Kernel>(kernel).on_grid(dt, n_steps), dt) {}

    /// Weight of u^{n-j} in the sum at level n, 1 <= j <= n.
    double lag(std::size_t n, std::size_t j) const noexcept {
        return (j == n ? 0.5 * dt_ : dt_) * K_[j];
    }

    double K(std::size_t j) const noexcept { return K_[j]; }
    std::size_t max_level() const noexcept { return K_.size() - 1; }

private:
    std::vector<double> K_;
    double dt_;
};

/// Trapezoid weights for int_0^{t_n} G'(s) v(t_n - s) ds with each interval
/// [k dt, (k+1) dt] split at kinks of G. Inside a split interval v is
/// interpolated linearly between its end levels, and G' is taken from the
/// inside of each piece, so no derivative is ever evaluated across a jump.
class GdotFormWeights {
public:
    template <MemoryKernel Kernel>
    GdotFormWeights(const Kernel& kernel, double dt, std::size_t n_intervals)
        : near_(n_intervals, 0.0), far_(n_intervals, 0.0) {
        std::vector<double> kinks = kernel.kinks();
        std::sort(kinks.begin(), kinks.end());
        for (std::size_t k = 0; k < n_intervals; ++k) {
            const double lo = static_cast<double>(k) * dt;
            const double hi = static_cast<double>(k + 1) * dt;
            std::vector<double> cuts{lo};
            for (double kink : kinks)
                if (kink > lo && kink < hi) cuts.push_back(kink);
            cuts.push_back(hi);
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                const double s1 = cuts[p];
                const double s2 = cuts[p + 1];
                const double d1 = kernel.one_sided_derivative(s1, Side::right);
                const double d2 = kernel.one_sided_derivative(s2, Side::left);
                const double th1 = (s1 - lo) / dt;
                const double th2 = (s2 - lo) / dt;
                const double half = 0.5 * (s2 - s1);
                near_[k] += half * (d1 * (1.0 - th1) + d2 * (1.0 - th2));
                far_[k] += half * (d1 * th1 + d2 * th2);
            }
        }
    }

    /// Weight of v(t_n - j dt) at level n, 0 <= j <= n.
    double lag(std::size_t n, std::size_t j) const noexcept {
        double w = 0.0;
        if (j < n) w += near_[j];
        if (j > 0) w += far_[j - 1];
        return w;
    }

    std::size_t intervals() const noexcept { return near_.size(); }

private:
    std::vector<double> near_;  // weight of the interval's lower-s end (lag k)
    std::vector<double> far_;   // weight of the interval's upper-s end (lag k+1)
};

enum class MemoryForm { k_form, gdot_form };

/// Assembled memory term at t_n.
///
/// K-form: `history` holds u^0..u^{n-1} and the result approximates
/// int_0^{t_n} K(t_n - tau) L u(tau) dtau. Only K is consulted.
///
/// G'-form: `history` holds u^0..u^n and the result approximates
/// int_0^{t_n} G'(t_n - tau) L u(tau) dtau.
template <MemoryKernel Kernel>
Field memory_term(const Grid& grid, std::span<const Field> history, const Kernel& kernel,
                  double t_n, MemoryForm mode) {
    Field acc(grid);
    if (history.empty()) return acc;
    const std::size_t n = mode == MemoryForm::k_form ? history.size() : history.size() - 1;
    if (n == 0) return acc;
    const double dt = t_n / static_cast<double>(n);

    if (mode == MemoryForm::k_form) {
        const KFormWeights w(kernel, dt, n);
        for (std::size_t j = 1; j <= n; ++j) {
            const Field& u = history[n - j];
            u.require_same(acc);
            const double c = w.lag(n, j);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * u[i];
        }
    } else {
        const GdotFormWeights w(kernel, dt, n);
        for (std::size_t j = 0; j <= n; ++j) {
            const Field& u = history[n - j];
            u.require_same(acc);
            const double c = w.lag(n, j);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * u[i];
        }
    }
    return laplacian_apply(acc);
}

// ---------------------------------------------------------------------------
// Solvers

namespace detail {

template <MemoryKernel Kernel>
void validate(const ProblemSpec<Kernel>& spec) {
    if (!(spec.T > 0.0)) throw ConfigurationError("horizon T must be positive");
    if (spec.n_steps < 2) throw ConfigurationError("n_steps must be at least 2");
    const double G0 = spec.kernel(0.0);
    if (G0 > 0.0) {
        const double limit = spec.cfl_safety * spec.grid.h() / std::sqrt(G0);
        if (spec.dt() > limit) {
            throw ConfigurationError("CFL violated: dt = " + std::to_string(spec.dt()) +
                                     " exceeds " + std::to_string(spec.cfl_safety) +
                                     " h / sqrt(G(0)) = " + std::to_string(limit));
        }
    }
}

/// Row-major (levels x nodes) storage for the whole history.
struct History {
    std::size_t n;
    std::vector<double> data;

    History(std::size_t levels, std::size_t nodes) : n(nodes), data(levels * nodes, 0.0) {}
    std::span<double> level(std::size_t k) noexcept { return {data.data() + k * n, n}; }
    std::span<const double> level(std::size_t k) const noexcept { return {data.data() + k * n, n}; }
};

inline void sample_into(const Grid& grid, const Expr& e, double t, std::span<double> out) {
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] = e(grid.x(j), t);
}

inline void check_finite(std::span<const double> v, std::size_t step) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericalBreakdown("non-finite value at time step " + std::to_string(step));
        }
    }
}

inline std::vector<Field> to_fields(const Grid& grid, const History& h, std::size_t levels) {
    std::vector<Field> out;
    out.reserve(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        auto lvl = h.level(k);
        out.emplace_back(grid, std::vector<double>(lvl.begin(), lvl.end()));
    }
    return out;
}

// The integral scheme applies L (scale 4/h^2) to a history sum of size
// ~ int K |u|, so a plain double sum leaves rounding noise near 1e-12 at
// modest resolutions. Carrying the sum as hi + lo (TwoSum plus Dekker's
// exact product error) and differencing hi before the second difference
// keeps the update at the rounding level of u itself. Dekker's split is
// used over std::fma because it vectorizes without target flags.
struct CompensatedSum {
    std::vector<double> hi, lo;

    explicit CompensatedSum(std::size_t n) : hi(n, 0.0), lo(n, 0.0) {}

    void clear() noexcept {
        std::fill(hi.begin(), hi.end(), 0.0);
        std::fill(lo.begin(), lo.end(), 0.0);
    }

    /// a * b - p exactly, for p = fl(a * b).
    static double product_error(double a, double b, double p) noexcept {
        constexpr double split = 134217729.0;  // 2^27 + 1
        const double ta = split * a, ah = ta - (ta - a), al = a - ah;
        const double tb = split * b, bh = tb - (tb - b), bl = b - bh;
        return ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    }

    void add_scaled(double c, std::span<const double> v) noexcept {
        for (std::size_t i = 0; i < hi.size(); ++i) {
            const double p = c * v[i];
            const double pe = product_error(c, v[i], p);
            const double s = hi[i] + p;
            const double bb = s - hi[i];
            lo[i] += ((hi[i] - (s - bb)) + (p - bb)) + pe;
            hi[i] = s;
        }
    }

    /// Dirichlet second difference of hi + lo.
    void laplacian_into(std::span<double> out, double h) const noexcept {
        const std::size_t n = hi.size();
        const double inv_h2 = 1.0 / (h * h);
        for (std::size_t j = 0; j < n; ++j) {
            const double hl = j > 0 ? hi[j - 1] : 0.0, hr = j + 1 < n ? hi[j + 1] : 0.0;
            const double ll = j > 0 ? lo[j - 1] : 0.0, lr = j + 1 < n ? lo[j + 1] : 0.0;
            out[j] = (((hr - hi[j]) - (hi[j] - hl)) + (ll - 2.0 * lo[j] + lr)) * inv_h2;
        }
    }
};

template <MemoryKernel Kernel>
std::string describe(const Kernel& k) {
    if constexpr (std::is_same_v<Kernel, RelaxationKernel>) {
        return k.describe();
    } else if constexpr (std::is_same_v<Kernel, MollifiedKernel>) {
        return "mollified(eps=" + std::to_string(k.epsilon()) + ", " + k.base().describe() + ")";
    } else {
        return "custom";
    }
}

}  // namespace detail

/// Central-difference velocity from displacement snapshots: second-order
/// one-sided at the ends, or `initial` at t = 0 when given.
inline std::vector<Field> reconstruct_velocity(const std::vector<Field>& u, double dt,
                                               const Field* initial = nullptr) {
    if (u.size() < 3) throw ConfigurationError("velocity reconstruction needs at least 3 snapshots");
    const std::size_t N = u.size() - 1;
    std::vector<Field> v;
    v.reserve(u.size());
    const Grid& g = u.front().grid();
    for (std::size_t n = 0; n <= N; ++n) {
        Field out(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (n == 0) {
                out[i] = initial ? (*initial)[i]
                                 : (-3.0 * u[0][i] + 4.0 * u[1][i] - u[2][i]) / (2.0 * dt);
            } else if (n == N) {
                out[i] = (3.0 * u[N][i] - 4.0 * u[N - 1][i] + u[N - 2][i]) / (2.0 * dt);
            } else {
                out[i] = (u[n + 1][i] - u[n - 1][i]) / (2.0 * dt);
            }
        }
        v.push_back(std::move(out));
    }
    return v;
}

/// March the integral formulation. The kernel is only touched through K.
template <MemoryKernel Kernel>
SolutionField solve_integral(const ProblemSpec<Kernel>& spec) {
    detail::validate(spec);
    const auto start = std::chrono::steady_clock::now();
    const Grid& grid = spec.grid;
    const std::size_t nx = grid.size();
    const std::size_t N = spec.n_steps;
    const double dt = spec.dt();

    const KFormWeights weights(spec.kernel, dt, N);

    detail::History u(N + 1, nx);
    std::vector<double> u0(nx), u1(nx), fprev(nx, 0.0), fcur(nx, 0.0);
    std::vector<double> g(nx, 0.0), F(nx, 0.0);  // running int f and int int f
    detail::CompensatedSum acc(nx);
    std::vector<double> mem(nx);
    const bool has_force = !spec.data.f.is_zero_literal();

    detail::sample_into(grid, spec.data.u0, 0.0, u0);
    detail::sample_into(grid, spec.data.u1, 0.0, u1);
    if (has_force) detail::sample_into(grid, spec.data.f, 0.0, fprev);
    std::copy(u0.begin(), u0.end(), u.level(0).begin());

    for (std::size_t n = 1; n <= N; ++n) {
        const double t = static_cast<double>(n) * dt;
        if (has_force) {
            detail::sample_into(grid, spec.data.f, t, fcur);
            for (std::size_t i = 0; i < nx; ++i) {
                const double g_new = g[i] + 0.5 * dt * (fprev[i] + fcur[i]);
                F[i] += 0.5 * dt * (g[i] + g_new);
                g[i] = g_new;
            }
            std::swap(fprev, fcur);
        }

        acc.clear();
        for (std::size_t j = 1; j <= n; ++j) {
            const double c = weights.lag(n, j);
            if (c != 0.0) acc.add_scaled(c, u.level(n - j));
        }
        acc.laplacian_into(mem, grid.h());

        auto un = u.level(n);
        for (std::size_t i = 0; i < nx; ++i) un[i] = mem[i] + u0[i] + t * u1[i] + F[i];
        detail::check_finite(un, n);
    }

    SolutionField sol{grid, spec.T, N, spec.data, detail::to_fields(grid, u, N + 1), {}, {}};
    sol.meta.scheme = Scheme::integral;
    sol.meta.kernel = detail::describe(spec.kernel);
    sol.meta.memory_quadrature = "product trapezoid on K, compensated history sum";
    sol.meta.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

/// March the differential formulation with an explicit central scheme.
template <MemoryKernel Kernel>
SolutionField solve_differential(const ProblemSpec<Kernel>& spec) {
    detail::validate(spec);
    const auto start = std::chrono::steady_clock::now();
    const Grid& grid = spec.grid;
    const std::size_t nx = grid.size();
    const std::size_t N = spec.n_steps;
    const double dt = spec.dt();
    const double dt2 = dt * dt;

    const auto kinks = spec.kernel.kinks();
    const bool kinks_in_range =
        std::any_of(kinks.begin(), kinks.end(), [&](double k) { return k <= spec.T; });
    if (kinks_in_range && spec.kink_policy == KinkPolicy::strict) {
        throw UnsupportedKernel(
            "kernel derivative jumps inside [0, T]; the differential scheme needs a kink policy");
    }

    const double G0 = spec.kernel(0.0);

    // Prony kernels: O(1) per step recursive trapezoid convolution
    const Prony* prony = nullptr;
    if constexpr (std::is_same_v<Kernel, RelaxationKernel>) {
        if (spec.recursive_prony) prony = std::get_if<Prony>(&spec.kernel.variant());
    }
    std::vector<double> decay, coef;
    std::vector<std::vector<double>> conv;
    if (prony) {
        for (const auto& term : prony->terms) {
            decay.push_back(std::exp(-dt / term.tau));
            coef.push_back(-term.g / term.tau);
            conv.emplace_back(nx, 0.0);
        }
    }
    const GdotFormWeights weights(spec.kernel, dt, prony ? 0 : N);

    detail::History u(N + 1, nx);
    std::vector<double> u1(nx), f(nx, 0.0), acc(nx), lap(nx);
    const bool has_force = !spec.data.f.is_zero_literal();

    detail::sample_into(grid, spec.data.u0, 0.0, u.level(0));
    detail::sample_into(grid, spec.data.u1, 0.0, u1);

    // Taylor startup: u^1 = u0 + dt u1 + dt^2/2 [G(0) L u0 + f(0)]
    {
        if (has_force) detail::sample_into(grid, spec.data.f, 0.0, f);
        const auto u0 = u.level(0);
        laplacian(u0, lap, grid.h());
        auto next = u.level(1);
        for (std::size_t i = 0; i < nx; ++i)
            next[i] = u0[i] + dt * u1[i] + 0.5 * dt2 * (G0 * lap[i] + f[i]);
        detail::check_finite(next, 1);
    }
    if (prony) {
        // T^1 = e T^0 + dt/2 (e u^0 + u^1) with T^0 = 0
        for (std::size_t p = 0; p < conv.size(); ++p) {
            const auto u0 = u.level(0);
            const auto u1l = u.level(1);
            for (std::size_t i = 0; i < nx; ++i)
                conv[p][i] = 0.5 * dt * (decay[p] * u0[i] + u1l[i]);
        }
    }

    for (std::size_t n = 1; n < N; ++n) {
        const double t = static_cast<double>(n) * dt;
        const auto un = u.level(n);

        // acc = G(0) u^n + sum_j W_j u^{n-j}; one Laplacian covers both terms
        for (std::size_t i = 0; i < nx; ++i) acc[i] = G0 * un[i];
        if (prony) {
            for (std::size_t p = 0; p < conv.size(); ++p)
                for (std::size_t i = 0; i < nx; ++i) acc[i] += coef[p] * conv[p][i];
        } else {
            for (std::size_t j = 0; j <= n; ++j) {
                const double c = weights.lag(n, j);
                if (c == 0.0) continue;
                const auto past = u.level(n - j);
                for (std::size_t i = 0; i < nx; ++i) acc[i] += c * past[i];
            }
        }
        laplacian(acc, lap, grid.h());
        if (has_force) detail::sample_into(grid, spec.data.f, t, f);

        const auto prev = u.level(n - 1);
        auto next = u.level(n + 1);
        for (std::size_t i = 0; i < nx; ++i)
            next[i] = 2.0 * un[i] - prev[i] + dt2 * (lap[i] + f[i]);
        detail::check_finite(next, n + 1);

        if (prony) {
            for (std::size_t p = 0; p < conv.size(); ++p)
                for (std::size_t i = 0; i < nx; ++i)
                    conv[p][i] = decay[p] * conv[p][i] + 0.5 * dt * (decay[p] * un[i] + next[i]);
        }
    }

    SolutionField sol{grid, spec.T, N, spec.data, detail::to_fields(grid, u, N + 1), {}, {}};
    const Field initial_velocity(grid, u1);
    sol.velocities = reconstruct_velocity(sol.snapshots, dt, &initial_velocity);
    sol.meta.scheme = Scheme::differential;
    sol.meta.kernel = detail::describe(spec.kernel);
    sol.meta.memory_quadrature =
        prony ? "recursive trapezoid (Prony)" : "trapezoid on G' split at kinks";
    sol.meta.recursive_prony = prony != nullptr;
    sol.meta.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

template <MemoryKernel Kernel>
SolutionField solve(const ProblemSpec<Kernel>& spec) {
    return spec.scheme == Scheme::integral ? solve_integral(spec) : solve_differential(spec);
}

// ---------------------------------------------------------------------------
// Space-time norms on D = (a, b) x (0, T)

/// Discrete L2(D) norm of level-wise values, trapezoid in time, h-weighted in space.
template <class LevelValue>
double l2_space_time(const SolutionField& sol, LevelValue&& value) {
    const std::size_t N = sol.n_steps;
    const double h = sol.grid.h();
    double sum = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        double level = 0.0;
        for (std::size_t i = 0; i < sol.grid.size(); ++i) {
            const double v = value(n, i);
            level += v * v;
        }
        sum += ((n == 0 || n == N) ? 0.5 : 1.0) * level;
    }
    return std::sqrt(sum * h * sol.dt());
}

inline double l2_norm(const SolutionField& sol) {
    return l2_space_time(sol, [&](std::size_t n, std::size_t i) { return sol.snapshots[n][i]; });
}

/// ||u - exact||_{L2(D)} for an exact solution exact(x, t).
template <class Exact>
double l2_error(const SolutionField& sol, Exact&& exact) {
    return l2_space_time(sol, [&](std::size_t n, std::size_t i) {
        return sol.snapshots[n][i] - exact(sol.grid.x(i), sol.time(n));
    });
}

/// ||u_a - u_b||_{L2(D)} for solutions on the same grid and time levels.
inline double l2_distance(const SolutionField& a, const SolutionField& b) {
    if (!(a.grid == b.grid) || a.n_steps != b.n_steps || a.T != b.T)
        throw ConfigurationError("solutions use different discretizations");
    return l2_space_time(a, [&](std::size_t n, std::size_t i) {
        return a.snapshots[n][i] - b.snapshots[n][i];
    });
}

}  // namespace viscokern
