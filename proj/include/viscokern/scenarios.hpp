#pragma once

// The reproduction studies behind the command-line tool. Each study returns
// its tables and a verdict; nothing here touches the file system except
// write_result.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "viscokern/config.hpp"
#include "viscokern/discretization.hpp"
#include "viscokern/energy.hpp"
#include "viscokern/errors.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/manufactured.hpp"
#include "viscokern/mollify.hpp"
#include "viscokern/solver.hpp"

namespace viscokern {

/// 17 significant digits in scientific notation; round-trips exactly.
inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// CSV with `#`-prefixed metadata above the header and verdict lines below
/// the data.
struct CsvTable {
    std::vector<std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footer;

    std::string render() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
            out += '\n';
        };
        for (const auto& m : meta) out += "# " + m + '\n';
        line(header);
        for (const auto& r : rows) line(r);
        for (const auto& f : footer) out += "# " + f + '\n';
        return out;
    }
};

/// Outcome of one scenario: named CSV files plus a verdict.
struct ScenarioResult {
    std::string scenario;
    std::map<std::string, CsvTable> files;
    bool passed = true;
    std::vector<std::string> summary;  // one line per verdict, for stderr
};

// ---------------------------------------------------------------------------
// Helpers

template <class F>
decltype(auto) with_kernel(const RunConfig& c, F&& f) {
    RelaxationKernel base = build_kernel(c.kernel, c.base_dir);
    if (c.kernel.epsilon) return f(mollify(std::move(base), *c.kernel.epsilon));
    return f(base);
}

template <MemoryKernel Kernel>
ProblemSpec<Kernel> make_spec(const RunConfig& c, Kernel kernel, ProblemData data,
                              std::size_t n_interior, std::size_t n_steps) {
    ProblemSpec<Kernel> s{Grid(c.problem.a, c.problem.b, n_interior), c.problem.T, n_steps,
                          std::move(kernel), std::move(data), c.discretization.scheme};
    s.kink_policy = c.kernel.kink_policy;
    return s;
}

template <MemoryKernel Kernel>
ProblemSpec<Kernel> make_spec(const RunConfig& c, Kernel kernel) {
    return make_spec(c, std::move(kernel), build_data(c.problem), c.discretization.n_interior,
                     c.discretization.n_steps);
}

/// ||u_coarse - R u_fine||_{L2(D)} on the coarse space-time grid, where R
/// picks the fine values at the shared nodes and levels.
inline double restricted_distance(const SolutionField& coarse, const SolutionField& fine) {
    const std::size_t rx = (fine.grid.size() + 1) / (coarse.grid.size() + 1);
    const std::size_t rt = fine.n_steps / coarse.n_steps;
    if (rx * (coarse.grid.size() + 1) != fine.grid.size() + 1 ||
        rt * coarse.n_steps != fine.n_steps || coarse.grid.a() != fine.grid.a() ||
        coarse.grid.b() != fine.grid.b() || coarse.T != fine.T)
        throw ConfigurationError("restriction needs nested space and time grids");
    return l2_space_time(coarse, [&](std::size_t n, std::size_t i) {
        return coarse.snapshots[n][i] - fine.snapshots[n * rt][(i + 1) * rx - 1];
    });
}

/// Free wave u_tt = c^2 u_xx with the grid data expanded in the discrete
/// sine basis, each mode advanced with its exact continuous frequency.
class WaveReference {
public:
    WaveReference(const Grid& grid, const ProblemData& data, double c) : grid_(grid) {
        const auto u0 = sample(grid, data.u0);
        const auto u1 = sample(grid, data.u1);
        const auto modes = dirichlet_eigenpairs(grid, grid.size());
        double peak = 0.0;
        std::vector<double> A, B;
        for (const auto& m : modes) {
            A.push_back(project(u0, m.mode));
            B.push_back(project(u1, m.mode));
            peak = std::max({peak, std::abs(A.back()), std::abs(B.back())});
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (std::abs(A[i]) <= 1e-15 * peak && std::abs(B[i]) <= 1e-15 * peak) continue;
            const double omega = c * std::sqrt(modes[i].lambda);
            terms_.push_back({A[i], B[i] / omega, omega, modes[i].mode});
        }
    }

    double operator()(std::size_t node, double t) const {
        double v = 0.0;
        for (const auto& term : terms_)
            v += (term.A * std::cos(term.omega * t) + term.B * std::sin(term.omega * t)) *
                 term.mode[node];
        return v;
    }

private:
    struct Term {
        double A, B, omega;
        Field mode;
    };
    Grid grid_;
    std::vector<Term> terms_;
};

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

inline std::vector<std::string> config_meta(const RunConfig& c, const std::string& scenario) {
    std::vector<std::string> m{"scenario = " + scenario};
    std::string line;
    const std::string text = render_config(c);
    for (char ch : text) {
        if (ch == '\n') {
            m.push_back(line);
            line.clear();
        } else {
            line += ch;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// solve

struct SolveReport {
    SolutionField solution;
    double l2 = 0.0;
};

inline SolveReport run_solve_report(const RunConfig& c) {
    return with_kernel(c, [&](const auto& k) {
        SolveReport r{solve(make_spec(c, k)), 0.0};
        r.l2 = l2_norm(r.solution);
        return r;
    });
}

inline ScenarioResult run_solve(const RunConfig& c) {
    const auto r = run_solve_report(c);
    const auto& sol = r.solution;
    CsvTable t;
    t.meta = config_meta(c, "solve");
    t.meta.push_back("kernel = " + sol.meta.kernel);
    t.meta.push_back("memory quadrature = " + sol.meta.memory_quadrature);
    t.header.push_back("time");
    for (std::size_t i = 0; i < sol.grid.size(); ++i) t.header.push_back(csv_number(sol.grid.x(i)));
    for (std::size_t n = 0; n <= sol.n_steps; ++n) {
        if (n % c.output.stride != 0 && n != sol.n_steps) continue;
        std::vector<std::string> row{csv_number(sol.time(n))};
        for (std::size_t i = 0; i < sol.grid.size(); ++i) row.push_back(csv_number(sol.snapshots[n][i]));
        t.rows.push_back(std::move(row));
    }
    t.footer.push_back("l2_norm = " + csv_number(r.l2));

    ScenarioResult out{"solve", {}, true, {"solve: completed, ||u||_L2(D) = " + csv_number(r.l2)}};
    out.files["solution.csv"] = std::move(t);
    return out;
}

// ---------------------------------------------------------------------------
// wave-limit

struct WaveLimitRow {
    double a;
    double abs_error;
    double rel_error;
};

struct WaveLimitReport {
    std::vector<WaveLimitRow> rows;
    bool decreasing = false;
};

inline WaveLimitReport run_wave_limit_report(const RunConfig& c) {
    if (c.kernel.type != "wedge")
        throw ConfigurationError("wave-limit needs kernel.type = wedge, got '" + c.kernel.type + "'");
    if (c.kernel.epsilon) throw ConfigurationError("wave-limit runs the unmollified wedge kernel");
    const ProblemData data = build_data(c.problem);
    if (!data.f.is_zero_literal()) throw ConfigurationError("wave-limit needs problem.f = 0");

    const Grid grid(c.problem.a, c.problem.b, c.discretization.n_interior);
    const WaveReference wave(grid, data, std::sqrt(c.kernel.Ginf));

    WaveLimitReport rep;
    std::vector<double> errs;
    for (double a : c.scenario.a_list) {
        auto spec = make_spec(c, RelaxationKernel::wedge(c.kernel.G0, c.kernel.Ginf, a), data,
                              c.discretization.n_interior, c.discretization.n_steps);
        spec.scheme = Scheme::integral;
        const auto sol = solve_integral(spec);
        const double err = l2_space_time(sol, [&](std::size_t n, std::size_t i) {
            return sol.snapshots[n][i] - wave(i, sol.time(n));
        });
        const double ref = l2_space_time(sol, [&](std::size_t n, std::size_t i) {
            return wave(i, sol.time(n));
        });
        rep.rows.push_back({a, err, ref > 0.0 ? err / ref : err});
        errs.push_back(rep.rows.back().rel_error);
    }
    rep.decreasing = strictly_decreasing(errs);
    return rep;
}

inline ScenarioResult run_wave_limit(const RunConfig& c) {
    const auto rep = run_wave_limit_report(c);
    CsvTable t;
    t.meta = config_meta(c, "wave-limit");
    t.meta.push_back("reference = free wave with c^2 = Ginf");
    t.header = {"a", "abs_l2_error", "rel_l2_error"};
    for (const auto& r : rep.rows)
        t.rows.push_back({csv_number(r.a), csv_number(r.abs_error), csv_number(r.rel_error)});
    const std::string verdict = std::string("errors strictly decreasing in a: ") +
                                (rep.decreasing ? "pass" : "FAIL");
    t.footer.push_back(verdict);
    if (rep.rows.size() >= 2)
        t.footer.push_back("last/first error ratio = " +
                           csv_number(rep.rows.back().rel_error / rep.rows.front().rel_error));

    ScenarioResult out{"wave-limit", {}, rep.decreasing, {"wave-limit: " + verdict}};
    out.files["wave_limit.csv"] = std::move(t);
    return out;
}

// ---------------------------------------------------------------------------
// mollify-study

struct MollifyRow {
    double epsilon;
    double sup_K_distance;
    double min_Geps;
    bool admissible;
    double solution_distance;
};

struct MollifyReport {
    std::vector<MollifyRow> rows;
    double reference_norm = 0.0;
    bool K_converges = false;
    bool solution_converges = false;
    bool all_admissible = false;
    bool passed() const noexcept { return K_converges && solution_converges && all_admissible; }
};

/// Absolute floor below which a distance counts as zero (identical kernels).
inline constexpr double mollify_noise_floor = 1e-10;

inline MollifyReport run_mollify_study_report(const RunConfig& c) {
    const RelaxationKernel base = build_kernel(c.kernel, c.base_dir);
    const double T = c.problem.T;
    const auto& eps = c.scenario.epsilon_list;
    const auto dist = sup_distance_K(base, eps, T, c.discretization.n_steps);

    auto spec = make_spec(c, base);
    spec.scheme = Scheme::integral;
    const auto reference = solve_integral(spec);

    MollifyReport rep;
    rep.reference_norm = l2_norm(reference);
    rep.all_admissible = true;
    std::vector<double> kd, sd;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const auto mk = mollify(base, eps[i]);
        const auto audit = check_admissibility(mk, T, c.scenario.audit_points);
        double lo = mk(0.0);
        for (std::size_t k = 0; k < c.scenario.audit_points; ++k)
            lo = std::min(lo, mk(T * static_cast<double>(k) /
                                 static_cast<double>(c.scenario.audit_points - 1)));
        auto mspec = make_spec(c, mk);
        mspec.scheme = Scheme::integral;
        const double d = l2_distance(solve_integral(mspec), reference);
        rep.rows.push_back({eps[i], dist[i].sup_distance, lo, audit.admissible(), d});
        rep.all_admissible = rep.all_admissible && audit.admissible();
        kd.push_back(dist[i].sup_distance);
        sd.push_back(d);
    }
    auto negligible = [](const std::vector<double>& v, double scale) {
        return std::all_of(v.begin(), v.end(),
                           [&](double x) { return x <= mollify_noise_floor * std::max(1.0, scale); });
    };
    rep.K_converges = strictly_decreasing(kd) || negligible(kd, 1.0);
    rep.solution_converges = strictly_decreasing(sd) || negligible(sd, rep.reference_norm);
    return rep;
}

inline ScenarioResult run_mollify_study(const RunConfig& c) {
    const auto rep = run_mollify_study_report(c);
    CsvTable t;
    t.meta = config_meta(c, "mollify-study");
    t.meta.push_back("reference solution norm = " + csv_number(rep.reference_norm));
    t.header = {"epsilon", "sup_K_distance", "min_Geps_over_grid", "admissible_flag",
                "solution_l2_distance"};
    for (const auto& r : rep.rows)
        t.rows.push_back({csv_number(r.epsilon), csv_number(r.sup_K_distance), csv_number(r.min_Geps),
                          r.admissible ? "1" : "0", csv_number(r.solution_distance)});
    auto mark = [](bool b) { return b ? "pass" : "FAIL"; };
    ScenarioResult out{"mollify-study", {}, rep.passed(), {}};
    out.summary = {std::string("mollify-study: K distance decreasing: ") + mark(rep.K_converges),
                   std::string("mollify-study: solution distance decreasing: ") +
                       mark(rep.solution_converges),
                   std::string("mollify-study: mollified kernels admissible: ") +
                       mark(rep.all_admissible)};
    for (const auto& s : out.summary) t.footer.push_back(s);
    out.files["mollify_study.csv"] = std::move(t);
    return out;
}

// ---------------------------------------------------------------------------
// convergence

struct ConvergenceRow {
    std::size_t level;
    std::size_t n_interior;
    std::size_t n_steps;
    double h;
    double dt;
    double error;
    std::optional<double> order;  // absent on the first level or when an error is zero
};

struct ConvergenceReport {
    std::string reference;
    std::vector<ConvergenceRow> rows;
    double min_order = 0.0;
    bool passed = false;
};

inline ConvergenceReport run_convergence_report(const RunConfig& c) {
    const std::size_t L = c.scenario.levels;
    const std::size_t cells0 = c.discretization.n_interior + 1;
    auto cells = [&](std::size_t k) { return cells0 << k; };
    auto steps = [&](std::size_t k) { return c.discretization.n_steps << k; };

    ConvergenceReport rep;
    rep.reference = c.scenario.reference;
    rep.min_order = c.scenario.min_order;
    std::vector<double> errs;

    if (c.scenario.reference == "manufactured") {
        if (c.kernel.epsilon)
            throw ConfigurationError("the manufactured reference needs an unmollified Prony kernel");
        const RelaxationKernel k = build_kernel(c.kernel, c.base_dir);
        for (std::size_t lvl = 0; lvl < L; ++lvl) {
            const Grid g(c.problem.a, c.problem.b, cells(lvl) - 1);
            const auto m = manufactured_prony(k, g);
            const auto sol = solve(make_spec(c, k, m.data, cells(lvl) - 1, steps(lvl)));
            errs.push_back(l2_error(sol, m));
        }
    } else {
        with_kernel(c, [&](const auto& k) {
            const ProblemData data = build_data(c.problem);
            auto prev = solve(make_spec(c, k, data, cells(0) - 1, steps(0)));
            for (std::size_t lvl = 0; lvl < L; ++lvl) {
                auto next = solve(make_spec(c, k, data, cells(lvl + 1) - 1, steps(lvl + 1)));
                errs.push_back(restricted_distance(prev, next));
                prev = std::move(next);
            }
            return 0;
        });
    }

    rep.passed = true;
    for (std::size_t lvl = 0; lvl < L; ++lvl) {
        ConvergenceRow row{lvl, cells(lvl) - 1, steps(lvl),
                           (c.problem.b - c.problem.a) / static_cast<double>(cells(lvl)),
                           c.problem.T / static_cast<double>(steps(lvl)), errs[lvl], std::nullopt};
        if (lvl > 0 && errs[lvl] > 0.0 && errs[lvl - 1] > 0.0) {
            row.order = std::log2(errs[lvl - 1] / errs[lvl]);
            if (!(*row.order >= rep.min_order)) rep.passed = false;
        } else if (lvl > 0 && (errs[lvl] > 0.0) != (errs[lvl - 1] > 0.0)) {
            rep.passed = false;  // an error that appears from nothing is not convergence
        }
        rep.rows.push_back(row);
    }
    return rep;
}

inline ScenarioResult run_convergence(const RunConfig& c) {
    const auto rep = run_convergence_report(c);
    CsvTable t;
    t.meta = config_meta(c, "convergence");
    t.meta.push_back("reference = " + rep.reference);
    t.header = {"level", "n_interior", "n_steps", "h", "dt", "l2_error", "observed_order"};
    for (const auto& r : rep.rows)
        t.rows.push_back({std::to_string(r.level), std::to_string(r.n_interior),
                          std::to_string(r.n_steps), csv_number(r.h), csv_number(r.dt),
                          csv_number(r.error), r.order ? csv_number(*r.order) : "n/a"});
    const std::string verdict = "observed orders >= " + csv_number(rep.min_order) + ": " +
                                (rep.passed ? "pass" : "FAIL");
    t.footer.push_back(verdict);
    ScenarioResult out{"convergence", {}, rep.passed, {"convergence: " + verdict}};
    out.files["convergence.csv"] = std::move(t);
    return out;
}

// ---------------------------------------------------------------------------
// energy-audit

struct EnergyAuditReport {
    EnergyReport energy;
    EnergyVerdict verdict;
    std::string kernel;
};

inline EnergyAuditReport run_energy_audit_report(const RunConfig& c) {
    return with_kernel(c, [&](const auto& k) {
        const auto sol = solve(make_spec(c, k));
        EnergyAuditReport r;
        r.energy = energy_series(sol, k);
        r.verdict = dissipation_check(r.energy, sol.data.f.is_zero_literal());
        r.kernel = sol.meta.kernel;
        return r;
    });
}

inline ScenarioResult run_energy_audit(const RunConfig& c) {
    const auto r = run_energy_audit_report(c);
    const auto& e = r.energy;
    CsvTable t;
    t.meta = config_meta(c, "energy-audit");
    t.meta.push_back("kernel = " + r.kernel);
    t.meta.push_back("alpha = " + csv_number(e.alpha));
    t.meta.push_back("C = " + csv_number(e.C));
    t.header = {"t", "elastic", "kinetic", "history", "total", "bound"};
    for (std::size_t k = 0; k < e.samples.size(); ++k) {
        if (k % c.output.stride != 0 && k + 1 != e.samples.size()) continue;
        const auto& s = e.samples[k];
        t.rows.push_back({csv_number(s.t), csv_number(s.elastic), csv_number(s.kinetic),
                          csv_number(s.history), csv_number(s.total), csv_number(e.bound)});
    }
    const auto& v = r.verdict;
    auto mark = [](bool b) { return b ? "pass" : "FAIL"; };
    std::vector<std::string> lines;
    lines.push_back(std::string("monotone: ") +
                    (v.monotone ? mark(*v.monotone) : "not applicable (f != 0)"));
    lines.push_back(std::string("bounded by alpha e^T C: ") + mark(v.bounded && v.plain_bounded));
    lines.push_back(std::string("history term nonnegative: ") + mark(v.history_nonnegative));
    if (e.identity_residual) {
        lines.push_back("energy identity relative residual = " + csv_number(*e.identity_residual) +
                        " (reported, not gated)");
    } else {
        lines.push_back(
            "notice: energy identity check skipped; the kernel has no second derivative (G'' is a "
            "point mass at a kink)");
    }
    lines.push_back(std::string("verdict: ") + mark(v.passed()));
    t.footer = lines;

    ScenarioResult out{"energy-audit", {}, v.passed(), {}};
    for (const auto& l : lines) out.summary.push_back("energy-audit: " + l);
    out.files["energy.csv"] = std::move(t);
    return out;
}

// ---------------------------------------------------------------------------

inline ScenarioResult run_scenario(const std::string& name, const RunConfig& c) {
    if (!c.scenario.name.empty() && c.scenario.name != name)
        throw ConfigurationError("config names scenario '" + c.scenario.name + "' but '" + name +
                                 "' was requested");
    if (name == "solve") return run_solve(c);
    if (name == "wave-limit") return run_wave_limit(c);
    if (name == "mollify-study") return run_mollify_study(c);
    if (name == "convergence") return run_convergence(c);
    if (name == "energy-audit") return run_energy_audit(c);
    throw ConfigurationError("unknown scenario '" + name +
                             "'; valid options: " + detail::join(scenario_names()));
}

/// Write every CSV of `r` plus meta.txt into `dir`.
inline void write_result(const ScenarioResult& r, const RunConfig& c,
                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, table] : r.files) {
        std::ofstream out(dir / name, std::ios::binary);
        out << table.render();
        if (!out) throw Error("cannot write " + (dir / name).string());
    }
    std::ofstream meta(dir / "meta.txt", std::ios::binary);
    meta << "# scenario = " << r.scenario << '\n' << render_config(c);
    if (!meta) throw Error("cannot write " + (dir / "meta.txt").string());
}

}  // namespace viscokern
