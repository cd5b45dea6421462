#pragma once

// Relaxation functions G(t) of weak regularity: continuous, positive,
// nonincreasing and convex, with no assumption on derivatives. The
// integrated relaxation function K(xi) = int_0^xi G is what the integral
// formulation consumes.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "viscokern/errors.hpp"
#include "viscokern/expr.hpp"
#include "viscokern/quadrature.hpp"

namespace viscokern {

/// Which one-sided limit to take at a derivative jump.
enum class Side { left, right };

/// What eval_Gdot does exactly at a kink.
enum class KinkPolicy { strict, left_limit };

/// Linear drop from G0 to Ginf over [0, a], constant afterwards.
struct Wedge {
    double G0;
    double Ginf;
    double a;
};

struct PronyTerm {
    double g;
    double tau;
};

/// G(t) = Ginf + sum_i g_i exp(-t / tau_i).
struct Prony {
    double Ginf;
    std::vector<PronyTerm> terms;
};

struct Sample {
    double t;
    double G;
};

/// Piecewise-linear interpolation of samples; the first sample is at t = 0.
struct Tabulated {
    std::vector<Sample> samples;
};

/// G(t) given as an expression in t.
struct ExpressionKernel {
    Expr expr;
};

class RelaxationKernel {
public:
    using Variant = std::variant<Wedge, Prony, Tabulated, ExpressionKernel>;

    static RelaxationKernel wedge(double G0, double Ginf, double a) {
        if (!(G0 > 0.0) || !(Ginf > 0.0) || !(a > 0.0))
            throw ConfigurationError("wedge kernel requires G0 > 0, Ginf > 0 and a > 0");
        return RelaxationKernel(Wedge{G0, Ginf, a});
    }

    static RelaxationKernel prony(double Ginf, std::vector<PronyTerm> terms) {
        if (!(Ginf >= 0.0)) throw ConfigurationError("Prony kernel requires Ginf >= 0");
        for (const auto& term : terms) {
            if (!(term.g > 0.0) || !(term.tau > 0.0))
                throw ConfigurationError("Prony terms require g > 0 and tau > 0");
        }
        return RelaxationKernel(Prony{Ginf, std::move(terms)});
    }

    static RelaxationKernel constant(double value) {
        if (!(value > 0.0)) throw ConfigurationError("constant kernel must be positive");
        return prony(value, {});
    }

    static RelaxationKernel tabulated(std::vector<Sample> samples) {
        if (samples.size() < 2) throw ConfigurationError("tabulated kernel needs at least 2 samples");
        if (samples.front().t != 0.0)
            throw ConfigurationError("tabulated kernel must start at t = 0");
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (!(samples[i].t > samples[i - 1].t))
                throw ConfigurationError("tabulated kernel times must be strictly increasing");
        }
        RelaxationKernel k(Tabulated{std::move(samples)});
        const auto& s = std::get<Tabulated>(k.v_).samples;
        k.table_K_.assign(s.size(), 0.0);
        for (std::size_t i = 1; i < s.size(); ++i)
            k.table_K_[i] = k.table_K_[i - 1] + 0.5 * (s[i].t - s[i - 1].t) * (s[i].G + s[i - 1].G);
        return k;
    }

    static RelaxationKernel expression(Expr e) {
        if (e.depends_on_x())
            throw ConfigurationError("kernel expression may only depend on t");
        return RelaxationKernel(ExpressionKernel{std::move(e)});
    }

    const Variant& variant() const noexcept { return v_; }

    template <class T>
    bool holds() const noexcept {
        return std::holds_alternative<T>(v_);
    }

    /// G(t) for t >= 0.
    double operator()(double t) const {
        check_time(t);
        return std::visit([&](const auto& k) { return value(k, t); }, v_);
    }

    /// dG/dt. Exactly at a kink, `strict` throws and `left_limit` returns the
    /// left derivative. At t = 0 the right derivative is returned.
    double derivative(double t, KinkPolicy policy = KinkPolicy::strict) const {
        check_time(t);
        if (t > 0.0 && is_kink(t)) {
            if (policy == KinkPolicy::strict)
                throw DerivativeUndefined("dG/dt is undefined at the kink t = " + std::to_string(t));
            return one_sided_derivative(t, Side::left);
        }
        return one_sided_derivative(t, t > 0.0 ? Side::left : Side::right);
    }

    /// One-sided derivative; away from kinks both sides agree.
    double one_sided_derivative(double t, Side side) const {
        check_time(t);
        if (t == 0.0) side = Side::right;
        return std::visit([&](const auto& k) { return slope(k, t, side); }, v_);
    }

    /// d2G/dt2 where it exists as a function; piecewise-linear kernels have
    /// point masses at their kinks and report nothing.
    std::optional<double> second_derivative(double t) const {
        check_time(t);
        if (const auto* p = std::get_if<Prony>(&v_)) {
            double sum = 0.0;
            for (const auto& term : p->terms)
                sum += term.g / (term.tau * term.tau) * std::exp(-t / term.tau);
            return sum;
        }
        if (const auto* e = std::get_if<ExpressionKernel>(&v_)) {
            const double h = 1.2e-4 * std::max(1.0, t);
            auto f = [&](double s) { return e->expr(0.0, s); };
            if (t < h)  // second-order forward stencil
                return (2.0 * f(t) - 5.0 * f(t + h) + 4.0 * f(t + 2 * h) - f(t + 3 * h)) / (h * h);
            return (f(t - h) - 2.0 * f(t) + f(t + h)) / (h * h);
        }
        return std::nullopt;
    }

    /// K(xi) = int_0^xi G.
    double integrated(double xi) const {
        check_time(xi);
        return std::visit([&](const auto& k) { return antiderivative(k, xi); }, v_);
    }

    /// int_lo^hi G.
    double integral(double lo, double hi) const {
        if (hi < lo) return -integral(hi, lo);
        if (const auto* e = std::get_if<ExpressionKernel>(&v_)) {
            check_time(lo);
            return quad::adaptive([&](double t) { return e->expr(0.0, t); }, lo, hi);
        }
        return integrated(hi) - integrated(lo);
    }

    /// Points t > 0 where dG/dt jumps.
    std::vector<double> kinks() const {
        std::vector<double> out;
        if (const auto* w = std::get_if<Wedge>(&v_)) {
            if (w->G0 != w->Ginf) out.push_back(w->a);
        } else if (const auto* tab = std::get_if<Tabulated>(&v_)) {
            const auto& s = tab->samples;
            for (std::size_t i = 1; i + 1 < s.size(); ++i) {
                const double left = (s[i].G - s[i - 1].G) / (s[i].t - s[i - 1].t);
                const double right = (s[i + 1].G - s[i].G) / (s[i + 1].t - s[i].t);
                if (left != right) out.push_back(s[i].t);
            }
        }
        return out;
    }

    /// Upper end of the interval where G is defined.
    double max_time() const noexcept {
        if (const auto* tab = std::get_if<Tabulated>(&v_)) return tab->samples.back().t;
        return std::numeric_limits<double>::infinity();
    }

    /// Lipschitz constant of G on [0, inf) for piecewise-linear and Prony kernels.
    std::optional<double> lipschitz() const {
        if (const auto* w = std::get_if<Wedge>(&v_)) return std::abs(w->G0 - w->Ginf) / w->a;
        if (const auto* p = std::get_if<Prony>(&v_)) {
            double sum = 0.0;
            for (const auto& term : p->terms) sum += term.g / term.tau;
            return sum;
        }
        if (const auto* tab = std::get_if<Tabulated>(&v_)) {
            double lip = 0.0;
            const auto& s = tab->samples;
            for (std::size_t i = 1; i < s.size(); ++i)
                lip = std::max(lip, std::abs((s[i].G - s[i - 1].G) / (s[i].t - s[i - 1].t)));
            return lip;
        }
        return std::nullopt;
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Wedge>) {
                    os << "wedge(G0=" << k.G0 << ", Ginf=" << k.Ginf << ", a=" << k.a << ")";
                } else if constexpr (std::is_same_v<T, Prony>) {
                    os << "prony(Ginf=" << k.Ginf;
                    for (const auto& term : k.terms) os << ", " << term.g << ":" << term.tau;
                    os << ")";
                } else if constexpr (std::is_same_v<T, Tabulated>) {
                    os << "tabulated(" << k.samples.size() << " samples on [0, "
                       << k.samples.back().t << "])";
                } else {
                    os << "expression(" << k.expr.source() << ")";
                }
            },
            v_);
        return os.str();
    }

private:
    explicit RelaxationKernel(Variant v) : v_(std::move(v)) {}

    void check_time(double t) const {
        if (!(t >= 0.0)) throw RangeError("kernel evaluated at negative time t = " + std::to_string(t));
        if (const auto* tab = std::get_if<Tabulated>(&v_)) {
            if (t > tab->samples.back().t) {
                throw RangeError("tabulated kernel queried at t = " + std::to_string(t) +
                                 " outside its valid interval [0, " +
                                 std::to_string(tab->samples.back().t) + "]");
            }
        }
    }

    bool is_kink(double t) const {
        const auto ks = kinks();
        return std::find(ks.begin(), ks.end(), t) != ks.end();
    }

    // Index i of the segment [s[i], s[i+1]] that contains t, honoring `side`
    // at interior sample points.
    static std::size_t segment(const Tabulated& k, double t, Side side) {
        const auto& s = k.samples;
        auto it = std::upper_bound(s.begin(), s.end(), t,
                                   [](double v, const Sample& smp) { return v < smp.t; });
        std::size_t i = static_cast<std::size_t>(it - s.begin());  // first sample with s.t > t
        i = (i == 0) ? 0 : i - 1;                                    // s[i].t <= t
        if (side == Side::left && i > 0 && s[i].t == t) --i;
        return std::min(i, s.size() - 2);
    }

    static double value(const Wedge& k, double t) {
        if (t >= k.a) return k.Ginf;
        return (k.Ginf - k.G0) / k.a * t + k.G0;
    }
    static double value(const Prony& k, double t) {
        double sum = k.Ginf;
        for (const auto& term : k.terms) sum += term.g * std::exp(-t / term.tau);
        return sum;
    }
    static double value(const Tabulated& k, double t) {
        const std::size_t i = segment(k, t, Side::right);
        const auto& lo = k.samples[i];
        const auto& hi = k.samples[i + 1];
        const double theta = (t - lo.t) / (hi.t - lo.t);
        return lo.G + theta * (hi.G - lo.G);
    }
    static double value(const ExpressionKernel& k, double t) { return k.expr(0.0, t); }

    static double slope(const Wedge& k, double t, Side side) {
        if (t < k.a || (t == k.a && side == Side::left)) return (k.Ginf - k.G0) / k.a;
        return 0.0;
    }
    static double slope(const Prony& k, double t, Side) {
        double sum = 0.0;
        for (const auto& term : k.terms) sum -= term.g / term.tau * std::exp(-t / term.tau);
        return sum;
    }
    static double slope(const Tabulated& k, double t, Side side) {
        const std::size_t i = segment(k, t, side);
        const auto& lo = k.samples[i];
        const auto& hi = k.samples[i + 1];
        return (hi.G - lo.G) / (hi.t - lo.t);
    }
    static double slope(const ExpressionKernel& k, double t, Side) {
        // central difference, second-order one-sided near t = 0
        const double h = 6e-6 * std::max(1.0, t);
        if (t < h) {
            return (-3.0 * k.expr(0.0, t) + 4.0 * k.expr(0.0, t + h) - k.expr(0.0, t + 2.0 * h)) /
                   (2.0 * h);
        }
        return (k.expr(0.0, t + h) - k.expr(0.0, t - h)) / (2.0 * h);
    }

    static double antiderivative(const Wedge& k, double xi) {
        if (xi <= k.a) return k.G0 * xi + 0.5 * (k.Ginf - k.G0) / k.a * xi * xi;
        return 0.5 * k.a * (k.G0 + k.Ginf) + k.Ginf * (xi - k.a);
    }
    static double antiderivative(const Prony& k, double xi) {
        double sum = k.Ginf * xi;
        for (const auto& term : k.terms) sum -= term.g * term.tau * std::expm1(-xi / term.tau);
        return sum;
    }
    double antiderivative(const Tabulated& k, double xi) const {
        const std::size_t i = segment(k, xi, Side::right);
        const auto& lo = k.samples[i];
        return table_K_[i] + 0.5 * (xi - lo.t) * (lo.G + value(k, xi));
    }
    static double antiderivative(const ExpressionKernel& k, double xi) {
        return quad::adaptive([&](double t) { return k.expr(0.0, t); }, 0.0, xi);
    }

    Variant v_;
    std::vector<double> table_K_;  // K at the tabulated sample times
};

/// Requirements on a kernel used by the solvers and diagnostics.
template <class K>
concept MemoryKernel = requires(const K& k, double t, Side side) {
    { k(t) } -> std::convertible_to<double>;
    { k.one_sided_derivative(t, side) } -> std::convertible_to<double>;
    { k.integral(t, t) } -> std::convertible_to<double>;
    { k.kinks() } -> std::convertible_to<std::vector<double>>;
};

static_assert(MemoryKernel<RelaxationKernel>);

/// K(xi) = int_0^xi G for any memory kernel.
template <MemoryKernel Kernel>
class IntegratedKernel {
public:
    explicit IntegratedKernel(Kernel source) : source_(std::move(source)) {}

    double operator()(double xi) const {
        if (!(xi >= 0.0)) throw RangeError("K evaluated at negative argument");
        if constexpr (requires { source_.integrated(xi); }) {
            return source_.integrated(xi);
        } else {
            return source_.integral(0.0, xi);
        }
    }

    /// K(j * step) for j = 0..count. Closed forms are evaluated pointwise;
    /// otherwise the panel integrals are accumulated.
    std::vector<double> on_grid(double step, std::size_t count) const {
        std::vector<double> out(count + 1, 0.0);
        const bool closed = is_closed_form();
        for (std::size_t j = 1; j <= count; ++j) {
            const double t = static_cast<double>(j) * step;
            out[j] = closed ? (*this)(t)
                            : out[j - 1] + source_.integral(static_cast<double>(j - 1) * step, t);
        }
        return out;
    }

    const Kernel& source() const noexcept { return source_; }

private:
    bool is_closed_form() const {
        if constexpr (std::is_same_v<Kernel, RelaxationKernel>) {
            return !source_.template holds<ExpressionKernel>();
        } else {
            return false;
        }
    }

    Kernel source_;
};

inline double eval_G(const RelaxationKernel& k, double t) { return k(t); }

inline double eval_Gdot(const RelaxationKernel& k, double t,
                        KinkPolicy policy = KinkPolicy::strict) {
    return k.derivative(t, policy);
}

template <MemoryKernel Kernel>
double eval_K(const IntegratedKernel<Kernel>& K, double xi) {
    return K(xi);
}

// ---------------------------------------------------------------------------
// Admissibility audit

enum class Condition { defined, positivity, monotonicity, convexity };

inline const char* to_string(Condition c) noexcept {
    switch (c) {
        case Condition::defined: return "defined";
        case Condition::positivity: return "positivity";
        case Condition::monotonicity: return "monotonicity";
        case Condition::convexity: return "convexity";
    }
    return "?";
}

struct Violation {
    Condition condition;
    double t;       // first offending audit time
    double amount;  // size of the violation at t
};

struct AdmissibilityReport {
    double horizon = 0.0;
    std::size_t n_audit = 0;
    double tol = 0.0;
    std::vector<Violation> violations;

    bool admissible() const noexcept { return violations.empty(); }

    bool violates(Condition c) const noexcept {
        return std::any_of(violations.begin(), violations.end(),
                           [c](const Violation& v) { return v.condition == c; });
    }
};

/// Audit positivity, monotonicity and convexity of G on n_audit uniform
/// points of [0, T]. This is a necessary-condition check on a grid, not a
/// proof on (0, inf).
template <class Kernel>
AdmissibilityReport check_admissibility(const Kernel& G, double T, std::size_t n_audit,
                                        double tol = 1e-9) {
    if (!(T > 0.0) || n_audit < 3)
        throw ConfigurationError("admissibility audit needs T > 0 and at least 3 points");

    AdmissibilityReport rep{T, n_audit, tol, {}};
    auto record = [&](Condition c, double t, double amount) {
        if (!rep.violates(c)) rep.violations.push_back({c, t, amount});
    };

    const double dt = T / static_cast<double>(n_audit - 1);
    auto time = [&](std::size_t k) { return (k + 1 == n_audit) ? T : static_cast<double>(k) * dt; };
    std::vector<double> g(n_audit);
    for (std::size_t k = 0; k < n_audit; ++k) {
        const double t = time(k);
        try {
            g[k] = G(t);
        } catch (const Error&) {
            record(Condition::defined, t, 0.0);
            return rep;
        }
        if (!std::isfinite(g[k])) {
            record(Condition::defined, t, 0.0);
            return rep;
        }
    }
    for (std::size_t k = 0; k < n_audit; ++k) {
        const double t = time(k);
        if (!(g[k] > 0.0)) record(Condition::positivity, t, -g[k]);
        if (k + 1 < n_audit && g[k + 1] > g[k] + tol) record(Condition::monotonicity, t, g[k + 1] - g[k]);
        if (k > 0 && k + 1 < n_audit) {
            const double second = g[k - 1] - 2.0 * g[k] + g[k + 1];
            if (second < -tol) record(Condition::convexity, t, -second);
        }
    }
    return rep;
}

/// Kernels with documented parameters that must pass the audit.
struct CatalogEntry {
    std::string name;
    RelaxationKernel kernel;
};

inline std::vector<CatalogEntry> kernel_catalog() {
    std::vector<Sample> table;
    for (int i = 0; i <= 40; ++i) {
        const double t = 0.5 * i;
        table.push_back({t, 1.0 + std::exp(-t)});
    }
    return {
        {"wedge", RelaxationKernel::wedge(2.0, 1.0, 1.0)},
        {"wedge-steep", RelaxationKernel::wedge(5.0, 4.0, 0.1)},
        {"prony", RelaxationKernel::prony(1.0, {{1.0, 0.5}})},
        {"prony-3", RelaxationKernel::prony(0.5, {{1.0, 0.1}, {0.5, 1.0}, {0.25, 5.0}})},
        {"constant", RelaxationKernel::constant(1.0)},
        {"tabulated", RelaxationKernel::tabulated(std::move(table))},
        {"expression", RelaxationKernel::expression(parse("1 + exp(-t)/(1 + t)"))},
    };
}

}  // namespace viscokern
