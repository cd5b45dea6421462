#pragma once

// Test-only reference computations. Nothing here shares code with the
// library paths it is used to check.

#include <cmath>
#include <cstddef>
#include <functional>

namespace oracle {

/// Composite Simpson rule with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      std::size_t panels) {
    if (panels % 2 == 1) ++panels;
    const double h = (hi - lo) / static_cast<double>(panels);
    double sum = f(lo) + f(hi);
    for (std::size_t i = 1; i < panels; ++i)
        sum += f(lo + static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Simpson with the interval split at one interior breakpoint.
inline double simpson_split(const std::function<double(double)>& f, double lo, double hi,
                            double brk, std::size_t panels) {
    if (brk <= lo || brk >= hi) return simpson(f, lo, hi, panels);
    return simpson(f, lo, brk, panels) + simpson(f, brk, hi, panels);
}

/// Unnormalized standard bump.
inline double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 / (s * s - 1.0)) : 0.0; }

/// Mollified value by brute-force Simpson on the tau form of the definition:
/// int_{t-eps}^{t+eps} rho((t - tau)/eps)/eps G(eps + tau) dtau.
inline double mollified(const std::function<double(double)>& G, double eps, double t,
                        std::size_t panels = 20000) {
    const double Z = simpson(bump, -1.0, 1.0, 20000);
    return simpson([&](double tau) { return bump((t - tau) / eps) / (eps * Z) * G(eps + tau); },
                   t - eps, t + eps, panels);
}

/// Time derivative of the above, differentiating the weight under the
/// integral: int rho'((t - tau)/eps)/eps^2 G(eps + tau) dtau. `brk` splits the
/// tau range at a kink of G(eps + tau).
inline double mollified_derivative(const std::function<double(double)>& G, double eps, double t,
                                   double brk, std::size_t panels = 20000) {
    const double Z = simpson(bump, -1.0, 1.0, 20000);
    auto bump_slope = [](double s) {
        if (std::abs(s) >= 1.0) return 0.0;
        const double d = s * s - 1.0;
        return bump(s) * (-2.0 * s / (d * d));
    };
    return simpson_split(
        [&](double tau) { return bump_slope((t - tau) / eps) / (eps * eps * Z) * G(eps + tau); },
        t - eps, t + eps, brk, panels);
}

}  // namespace oracle
