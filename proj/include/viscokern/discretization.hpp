#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "viscokern/errors.hpp"
#include "viscokern/expr.hpp"

namespace viscokern {

/// Uniform grid on (a, b) with homogeneous Dirichlet ends. Only the
/// n_interior interior nodes x_j = a + j h, j = 1..n_interior, carry unknowns.
class Grid {
public:
    Grid(double a, double b, std::size_t n_interior) : a_(a), b_(b), n_(n_interior) {
        if (!(b > a)) throw ConfigurationError("grid requires b > a");
        if (n_interior < 1) throw ConfigurationError("grid requires at least one interior node");
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double length() const noexcept { return b_ - a_; }
    std::size_t size() const noexcept { return n_; }
    double h() const noexcept { return (b_ - a_) / static_cast<double>(n_ + 1); }

    /// Coordinate of interior node i (0-based storage index).
    double x(std::size_t i) const noexcept { return a_ + static_cast<double>(i + 1) * h(); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double a_;
    double b_;
    std::size_t n_;
};

/// Values at the interior nodes of a grid.
class Field {
public:
    explicit Field(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}
    Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw ConfigurationError("field length " + std::to_string(values_.size()) +
                                     " does not match grid size " + std::to_string(grid_.size()));
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    Field& operator+=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend Field operator+(Field l, const Field& r) { return l += r; }
    friend Field operator-(Field l, const Field& r) { return l -= r; }
    friend Field operator*(double s, Field f) { return f *= s; }

    void require_same(const Field& o) const {
        if (!(o.grid_ == grid_)) throw ConfigurationError("fields live on different grids");
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Second-order central difference with zero ghost values at both ends.
inline void laplacian(std::span<const double> in, std::span<double> out, double h) noexcept {
    const std::size_t n = in.size();
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? in[j - 1] : 0.0;
        const double right = j + 1 < n ? in[j + 1] : 0.0;
        out[j] = (left - 2.0 * in[j] + right) * inv_h2;
    }
}

inline Field laplacian_apply(const Field& f) {
    Field out(f.grid());
    laplacian(f.values(), out.values(), f.grid().h());
    return out;
}

/// Discrete L2 inner product h * sum f_j g_j.
inline double project(const Field& f, const Field& w) {
    f.require_same(w);
    double sum = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) sum += f[j] * w[j];
    return f.grid().h() * sum;
}

inline double norm(const Field& f) { return std::sqrt(project(f, f)); }

/// Sample an expression at the interior nodes at time t.
inline Field sample(const Grid& grid, const Expr& e, double t = 0.0) {
    Field out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] = e(grid.x(j), t);
    return out;
}

struct Eigenpair {
    double lambda;  // continuous eigenvalue (i pi / L)^2
    Field mode;     // sqrt(2/L) sin(i pi (x - a)/L) on the grid
};

/// Eigenvalue of the discrete Laplacian for the i-th sine vector.
inline double discrete_eigenvalue(const Grid& grid, std::size_t i) {
    const double h = grid.h();
    const double s = std::sin(static_cast<double>(i) * std::numbers::pi * h / (2.0 * grid.length()));
    return 4.0 / (h * h) * s * s;
}

/// First `count` Dirichlet eigenpairs of -d2/dx2 on (a, b), 1-based mode numbers.
inline std::vector<Eigenpair> dirichlet_eigenpairs(const Grid& grid, std::size_t count) {
    if (count > grid.size()) {
        throw ConfigurationError("requested " + std::to_string(count) +
                                 " eigenpairs but the grid resolves only " +
                                 std::to_string(grid.size()));
    }
    const double L = grid.length();
    const double scale = std::sqrt(2.0 / L);
    std::vector<Eigenpair> out;
    out.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        const double k = static_cast<double>(i) * std::numbers::pi / L;
        Field w(grid);
        for (std::size_t j = 0; j < grid.size(); ++j) w[j] = scale * std::sin(k * (grid.x(j) - grid.a()));
        out.push_back({k * k, std::move(w)});
    }
    return out;
}

}  // namespace viscokern
