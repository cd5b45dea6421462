#pragma once

// Mollified relaxation function
//
//   G_eps(t) = int rho((t - tau)/eps) / eps * G(eps + tau) dtau
//            = int_{-1}^{1} rho(s) G(eps + t - eps*s) ds,
//
// i.e. an average of G over [t, t + 2 eps]. The shift by eps keeps every
// argument of G nonnegative, so G_eps(0) is an average of G over [0, 2 eps]
// and differs from G(0) in general.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "viscokern/errors.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/quadrature.hpp"

namespace viscokern {

/// Even C-infinity bump rho(s) = exp(1/(s^2 - 1)) / Z on (-1, 1), zero outside,
/// with Z chosen so that rho has unit mass.
class Mollifier {
public:
    /// Panels of the composite rule; breakpoints cluster toward +-1 where the
    /// bump flattens.
    static constexpr std::size_t panels = 16;

    Mollifier() {
        breaks_.resize(panels + 1);
        for (std::size_t k = 0; k <= panels; ++k) {
            const double u = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(panels);
            breaks_[k] = std::sin(0.5 * std::numbers::pi * u);
        }
        breaks_.front() = -1.0;
        breaks_.back() = 1.0;
        breaks_[panels / 2] = 0.0;
        for (std::size_t k = 0; k < panels; ++k) {
            auto r = quad::gauss_rule(breaks_[k], breaks_[k + 1]);
            rule_.nodes.insert(rule_.nodes.end(), r.nodes.begin(), r.nodes.end());
            rule_.weights.insert(rule_.weights.end(), r.weights.begin(), r.weights.end());
        }

        // normalize with a 4x refined version of the same graded rule
        double mass = 0.0;
        const std::size_t fine = 4 * panels;
        for (std::size_t k = 0; k < fine; ++k) {
            const double lo = std::sin(0.5 * std::numbers::pi * (-1.0 + 2.0 * k / double(fine)));
            const double hi = std::sin(0.5 * std::numbers::pi * (-1.0 + 2.0 * (k + 1) / double(fine)));
            mass += quad::gauss([](double s) { return bump(s); }, lo, hi);
        }
        inv_mass_ = 1.0 / mass;
    }

    double operator()(double s) const noexcept { return inv_mass_ * bump(s); }

    double derivative(double s) const noexcept {
        const double r = (*this)(s);
        if (r == 0.0) return 0.0;
        const double d = s * s - 1.0;
        return r * (-2.0 * s / (d * d));
    }

    double second_derivative(double s) const noexcept {
        const double r = (*this)(s);
        if (r == 0.0) return 0.0;
        const double d = s * s - 1.0;
        const double q = -2.0 * s / (d * d);
        const double dq = -2.0 / (d * d) + 8.0 * s * s / (d * d * d);
        return r * (q * q + dq);
    }

    /// 1 / int exp(1/(s^2-1)) ds.
    double normalization() const noexcept { return inv_mass_; }

    /// int_{-1}^{1} f(s) ds with the graded composite Gauss rule; panels that
    /// contain one of `splits` are subdivided there.
    template <class F>
    double integrate(F&& f, const std::vector<double>& splits = {}) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < panels; ++k) {
            const double lo = breaks_[k];
            const double hi = breaks_[k + 1];
            std::vector<double> cuts;
            for (double s : splits)
                if (s > lo && s < hi) cuts.push_back(s);
            if (cuts.empty()) {
                const std::size_t base = k * quad::gauss_order;
                for (std::size_t i = 0; i < quad::gauss_order; ++i)
                    sum += rule_.weights[base + i] * f(rule_.nodes[base + i]);
                continue;
            }
            std::sort(cuts.begin(), cuts.end());
            double a = lo;
            cuts.push_back(hi);
            for (double b : cuts) {
                if (b > a) {
                    const auto r = quad::gauss_rule(a, b);
                    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * f(r.nodes[i]);
                }
                a = b;
            }
        }
        return sum;
    }

private:
    static double bump(double s) noexcept {
        if (!(std::abs(s) < 1.0)) return 0.0;
        return std::exp(1.0 / (s * s - 1.0));
    }

    std::vector<double> breaks_;
    quad::Rule rule_;
    double inv_mass_ = 1.0;
};

inline std::shared_ptr<const Mollifier> standard_mollifier() {
    static const auto instance = std::make_shared<const Mollifier>();
    return instance;
}

inline double eval_mollifier(const Mollifier& m, double s) { return m(s); }

/// G_eps for a base relaxation function. Smooth, so it has no kinks.
class MollifiedKernel {
public:
    MollifiedKernel(RelaxationKernel base, double epsilon,
                    std::shared_ptr<const Mollifier> rho = standard_mollifier())
        : base_(std::move(base)), eps_(epsilon), rho_(std::move(rho)) {
        if (!(eps_ > 0.0)) throw ConfigurationError("mollification requires epsilon > 0");
    }

    const RelaxationKernel& base() const noexcept { return base_; }
    double epsilon() const noexcept { return eps_; }
    const Mollifier& mollifier() const noexcept { return *rho_; }

    double operator()(double t) const {
        check(t);
        const double center = base_(eps_ + t);
        return center + rho_->integrate(
                            [&](double s) { return (*rho_)(s) * (base_(arg(t, s)) - center); },
                            splits(t));
    }

    /// dG_eps/dt = (1/eps) int rho'(s) G(eps + t - eps s) ds.
    double derivative(double t) const {
        check(t);
        const double center = base_(eps_ + t);
        return rho_->integrate(
                   [&](double s) { return rho_->derivative(s) * (base_(arg(t, s)) - center); },
                   splits(t)) /
               eps_;
    }

    double one_sided_derivative(double t, Side) const { return derivative(t); }

    /// d2G_eps/dt2 = (1/eps^2) int rho''(s) G(eps + t - eps s) ds.
    std::optional<double> second_derivative(double t) const {
        check(t);
        const double center = base_(eps_ + t);
        return rho_->integrate(
                   [&](double s) {
                       return rho_->second_derivative(s) * (base_(arg(t, s)) - center);
                   },
                   splits(t)) /
               (eps_ * eps_);
    }

    /// int_lo^hi G_eps = int rho(s) [K(eps + hi - eps s) - K(eps + lo - eps s)] ds.
    double integral(double lo, double hi) const {
        if (hi < lo) return -integral(hi, lo);
        if (hi == lo) return 0.0;
        check(lo);
        check(hi);
        auto cuts = splits(lo);
        const auto more = splits(hi);
        cuts.insert(cuts.end(), more.begin(), more.end());
        return rho_->integrate(
            [&](double s) { return (*rho_)(s) * base_.integral(arg(lo, s), arg(hi, s)); }, cuts);
    }

    double integrated(double xi) const { return integral(0.0, xi); }

    std::vector<double> kinks() const { return {}; }

private:
    double arg(double t, double s) const noexcept { return eps_ + t - eps_ * s; }

    // Values of s where eps + t - eps*s hits a kink of the base kernel.
    std::vector<double> splits(double t) const {
        std::vector<double> out;
        for (double kink : base_.kinks()) {
            const double s = (eps_ + t - kink) / eps_;
            if (s > -1.0 && s < 1.0) out.push_back(s);
        }
        return out;
    }

    void check(double t) const {
        if (!(t >= 0.0)) throw RangeError("mollified kernel evaluated at negative time");
        // the averaging window [t, t + 2 eps] must be resolvable in double precision
        if (2.0 * eps_ <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) {
            throw ToleranceError("epsilon = " + std::to_string(eps_) +
                                 " is below the resolution of the quadrature at t = " +
                                 std::to_string(t));
        }
        if (t + 2.0 * eps_ > base_.max_time()) {
            throw RangeError("mollified kernel at t = " + std::to_string(t) +
                             " needs the base kernel up to " + std::to_string(t + 2.0 * eps_));
        }
    }

    RelaxationKernel base_;
    double eps_;
    std::shared_ptr<const Mollifier> rho_;
};

static_assert(MemoryKernel<MollifiedKernel>);

inline MollifiedKernel mollify(RelaxationKernel base, double epsilon,
                               std::shared_ptr<const Mollifier> rho = standard_mollifier()) {
    return MollifiedKernel(std::move(base), epsilon, std::move(rho));
}

inline double eval_Geps_dot(const MollifiedKernel& mk, double t) { return mk.derivative(t); }

inline IntegratedKernel<MollifiedKernel> integrated_mollified(MollifiedKernel mk) {
    return IntegratedKernel<MollifiedKernel>(std::move(mk));
}

/// G(T + 1) of the unmollified kernel, the floor that G_eps stays above on
/// [0, T] when 2 eps <= 1.
template <class Kernel>
double reference_modulus(const Kernel& k, double T) {
    return k(T + 1.0);
}
inline double reference_modulus(const RelaxationKernel& k, double T) { return k(T + 1.0); }
inline double reference_modulus(const MollifiedKernel& k, double T) { return k.base()(T + 1.0); }

struct KDistance {
    double epsilon;
    double sup_distance;
};

/// sup over a uniform grid of [0, T] of |K_eps - K| for each epsilon.
inline std::vector<KDistance> sup_distance_K(const RelaxationKernel& base,
                                             const std::vector<double>& epsilons, double T,
                                             std::size_t n_grid = 1024) {
    if (!(T > 0.0) || n_grid < 1) throw ConfigurationError("sup_distance_K needs T > 0");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0)) throw ConfigurationError("epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw ConfigurationError("epsilons must be strictly decreasing");
    }
    const double step = T / static_cast<double>(n_grid);
    const auto exact = IntegratedKernel<RelaxationKernel>(base).on_grid(step, n_grid);

    std::vector<KDistance> out;
    for (double eps : epsilons) {
        const auto approx = IntegratedKernel<MollifiedKernel>(MollifiedKernel(base, eps))
                                .on_grid(step, n_grid);
        double sup = 0.0;
        for (std::size_t j = 0; j <= n_grid; ++j) sup = std::max(sup, std::abs(approx[j] - exact[j]));
        out.push_back({eps, sup});
    }
    return out;
}

}  // namespace viscokern
