#pragma once

// Run configuration: flat `section.key = value` lines, `#` starts a comment.
// Every key has a default, so a config only lists what it changes. Unknown
// keys, malformed values and unparseable expressions are all collected and
// reported together with their line numbers.

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "viscokern/errors.hpp"
#include "viscokern/expr.hpp"
#include "viscokern/kernels.hpp"
#include "viscokern/solver.hpp"

namespace viscokern {

struct ProblemConfig {
    double a = 0.0;
    double b = 1.0;
    double T = 1.0;
    std::string u0 = "sin(pi*x)";
    std::string u1 = "0";
    std::string f = "0";
};

struct KernelConfig {
    std::string type = "wedge";
    double G0 = 2.0;
    double Ginf = 1.0;
    double a = 1.0;
    std::vector<double> g{1.0};
    std::vector<double> tau{0.5};
    std::string table;  // CSV of t,G rows; relative paths resolve against the config file
    std::string expression = "1 + exp(-t)";
    std::optional<double> epsilon;  // mollify the kernel when set
    KinkPolicy kink_policy = KinkPolicy::left_limit;
};

struct DiscretizationConfig {
    std::size_t n_interior = 255;
    std::size_t n_steps = 2048;
    Scheme scheme = Scheme::integral;
};

struct ScenarioConfig {
    std::string name;  // optional; must agree with the scenario being run
    std::vector<double> epsilon_list{0.1, 0.05, 0.025};
    std::vector<double> a_list{0.1, 0.05, 0.025};
    std::size_t levels = 3;
    std::size_t n_modes = 5;
    std::string reference = "manufactured";  // or "self"
    double min_order = 1.8;
    std::size_t audit_points = 512;
};

struct OutputConfig {
    std::string directory = "out";
    std::size_t stride = 1;
};

struct RunConfig {
    ProblemConfig problem;
    KernelConfig kernel;
    DiscretizationConfig discretization;
    ScenarioConfig scenario;
    OutputConfig output;
    std::filesystem::path base_dir;  // directory of the config file, for kernel.table
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"solve", "wave-limit", "mollify-study",
                                                "convergence", "energy-audit"};
    return names;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ", ") + format_number(x);
    return out;
}

inline std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::size_t> to_count(std::string_view s) {
    const std::string t = trim(s);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::vector<double>> to_list(std::string_view s) {
    std::vector<double> out;
    std::string item;
    std::stringstream in{std::string(s)};
    while (std::getline(in, item, ',')) {
        const auto v = to_double(item);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

// A setter returns an error message, or an empty string on success.
using Setter = std::function<std::string(RunConfig&, const std::string&)>;

template <class Get>
Setter real(Get get) {
    return [get](RunConfig& c, const std::string& v) -> std::string {
        const auto x = to_double(v);
        if (!x) return "expected a number, got '" + v + "'";
        get(c) = *x;
        return {};
    };
}

template <class Get>
Setter count(Get get) {
    return [get](RunConfig& c, const std::string& v) -> std::string {
        const auto x = to_count(v);
        if (!x) return "expected a nonnegative integer, got '" + v + "'";
        get(c) = *x;
        return {};
    };
}

template <class Get>
Setter list(Get get) {
    return [get](RunConfig& c, const std::string& v) -> std::string {
        const auto x = to_list(v);
        if (!x) return "expected a comma-separated list of numbers, got '" + v + "'";
        get(c) = *x;
        return {};
    };
}

template <class Get>
Setter text(Get get) {
    return [get](RunConfig& c, const std::string& v) -> std::string {
        get(c) = v;
        return {};
    };
}

template <class Get>
Setter expression(Get get) {
    return [get](RunConfig& c, const std::string& v) -> std::string {
        try {
            (void)parse(v);
        } catch (const ParseError& e) {
            return std::string("bad expression: ") + e.what();
        }
        get(c) = v;
        return {};
    };
}

template <class Get>
Setter choice(std::vector<std::string> options, Get get) {
    return [options, get](RunConfig& c, const std::string& v) -> std::string {
        for (const auto& o : options)
            if (o == v) {
                get(c) = v;
                return {};
            }
        return "unknown value '" + v + "'; valid options: " + join(options);
    };
}

inline const std::map<std::string, Setter>& setters() {
    using C = RunConfig;
    static const std::map<std::string, Setter> table{
        {"problem.a", real([](C& c) -> double& { return c.problem.a; })},
        {"problem.b", real([](C& c) -> double& { return c.problem.b; })},
        {"problem.T", real([](C& c) -> double& { return c.problem.T; })},
        {"problem.u0", expression([](C& c) -> std::string& { return c.problem.u0; })},
        {"problem.u1", expression([](C& c) -> std::string& { return c.problem.u1; })},
        {"problem.f", expression([](C& c) -> std::string& { return c.problem.f; })},

        {"kernel.type", choice({"wedge", "prony", "tabulated", "expression"},
                               [](C& c) -> std::string& { return c.kernel.type; })},
        {"kernel.G0", real([](C& c) -> double& { return c.kernel.G0; })},
        {"kernel.Ginf", real([](C& c) -> double& { return c.kernel.Ginf; })},
        {"kernel.a", real([](C& c) -> double& { return c.kernel.a; })},
        {"kernel.g", list([](C& c) -> std::vector<double>& { return c.kernel.g; })},
        {"kernel.tau", list([](C& c) -> std::vector<double>& { return c.kernel.tau; })},
        {"kernel.table", text([](C& c) -> std::string& { return c.kernel.table; })},
        {"kernel.expression", expression([](C& c) -> std::string& { return c.kernel.expression; })},
        {"kernel.epsilon",
         [](C& c, const std::string& v) -> std::string {
             if (v == "none") {
                 c.kernel.epsilon.reset();
                 return {};
             }
             const auto x = to_double(v);
             if (!x) return "expected a number or 'none', got '" + v + "'";
             c.kernel.epsilon = *x;
             return {};
         }},
        {"kernel.kink_policy",
         [](C& c, const std::string& v) -> std::string {
             if (v == "strict") c.kernel.kink_policy = KinkPolicy::strict;
             else if (v == "left_limit") c.kernel.kink_policy = KinkPolicy::left_limit;
             else return "unknown value '" + v + "'; valid options: strict, left_limit";
             return {};
         }},

        {"discretization.n_interior", count([](C& c) -> std::size_t& { return c.discretization.n_interior; })},
        {"discretization.n_steps", count([](C& c) -> std::size_t& { return c.discretization.n_steps; })},
        {"discretization.scheme",
         [](C& c, const std::string& v) -> std::string {
             if (v == "integral") c.discretization.scheme = Scheme::integral;
             else if (v == "differential") c.discretization.scheme = Scheme::differential;
             else return "unknown value '" + v + "'; valid options: integral, differential";
             return {};
         }},

        {"scenario.name", choice(scenario_names(), [](C& c) -> std::string& { return c.scenario.name; })},
        {"scenario.epsilon_list", list([](C& c) -> std::vector<double>& { return c.scenario.epsilon_list; })},
        {"scenario.a_list", list([](C& c) -> std::vector<double>& { return c.scenario.a_list; })},
        {"scenario.levels", count([](C& c) -> std::size_t& { return c.scenario.levels; })},
        {"scenario.n_modes", count([](C& c) -> std::size_t& { return c.scenario.n_modes; })},
        {"scenario.reference", choice({"manufactured", "self"},
                                      [](C& c) -> std::string& { return c.scenario.reference; })},
        {"scenario.min_order", real([](C& c) -> double& { return c.scenario.min_order; })},
        {"scenario.audit_points", count([](C& c) -> std::size_t& { return c.scenario.audit_points; })},

        {"output.directory", text([](C& c) -> std::string& { return c.output.directory; })},
        {"output.stride", count([](C& c) -> std::size_t& { return c.output.stride; })},
    };
    return table;
}

inline bool strictly_decreasing_positive(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) return false;
        if (i > 0 && !(v[i] < v[i - 1])) return false;
    }
    return true;
}

}  // namespace detail

/// Range checks that involve more than one key. `lines` maps keys to the
/// line that set them, so the messages can point at the right place.
inline std::vector<ConfigIssue> validate_config(const RunConfig& c,
                                                const std::map<std::string, std::size_t>& lines = {}) {
    std::vector<ConfigIssue> out;
    auto line = [&](const char* key) -> std::size_t {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    };
    auto issue = [&](const char* key, std::string msg) {
        out.push_back({line(key), std::string(key) + ": " + std::move(msg)});
    };

    if (!(c.problem.b > c.problem.a)) issue("problem.b", "domain requires b > a");
    if (!(c.problem.T > 0.0)) issue("problem.T", "horizon T must be positive");

    const auto& k = c.kernel;
    if (k.type == "wedge") {
        if (!(k.G0 > 0.0)) issue("kernel.G0", "must be positive");
        if (!(k.Ginf > 0.0)) issue("kernel.Ginf", "must be positive");
        if (!(k.a > 0.0)) issue("kernel.a", "must be positive");
    } else if (k.type == "prony") {
        if (!(k.Ginf > 0.0)) issue("kernel.Ginf", "must be positive");
        if (k.g.size() != k.tau.size()) issue("kernel.tau", "kernel.g and kernel.tau differ in length");
        for (double g : k.g)
            if (!(g > 0.0)) issue("kernel.g", "weights must be positive");
        for (double t : k.tau)
            if (!(t > 0.0)) issue("kernel.tau", "relaxation times must be positive");
    } else if (k.type == "tabulated") {
        if (k.table.empty()) issue("kernel.table", "a tabulated kernel needs a table path");
    }
    if (k.epsilon && !(*k.epsilon > 0.0 && 2.0 * *k.epsilon <= 1.0))
        issue("kernel.epsilon", "requires 0 < epsilon <= 1/2");

    if (c.discretization.n_interior < 1) issue("discretization.n_interior", "must be at least 1");
    if (c.discretization.n_steps < 2) issue("discretization.n_steps", "must be at least 2");

    const auto& s = c.scenario;
    if (!detail::strictly_decreasing_positive(s.epsilon_list))
        issue("scenario.epsilon_list", "must be positive and strictly decreasing");
    for (double e : s.epsilon_list)
        if (2.0 * e > 1.0) {
            issue("scenario.epsilon_list", "requires 2 epsilon <= 1");
            break;
        }
    if (!detail::strictly_decreasing_positive(s.a_list))
        issue("scenario.a_list", "must be positive and strictly decreasing");
    if (s.levels < 3) issue("scenario.levels", "at least 3 refinement levels are needed");
    if (s.n_modes < 1) issue("scenario.n_modes", "must be at least 1");
    if (s.audit_points < 2) issue("scenario.audit_points", "must be at least 2");
    if (c.output.stride < 1) issue("output.stride", "must be at least 1");
    return out;
}

/// Apply `text` on top of `base`. Throws ConfigError listing every issue.
inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
    std::vector<ConfigIssue> issues;
    std::map<std::string, std::size_t> lines;
    const auto& table = detail::setters();

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({lineno, "expected 'section.key = value'"});
            continue;
        }
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end()) {
            issues.push_back({lineno, "unknown key '" + key + "'"});
            continue;
        }
        if (lines.count(key)) {
            issues.push_back({lineno, "duplicate key '" + key + "' (first set on line " +
                                          std::to_string(lines[key]) + ")"});
            continue;
        }
        lines[key] = lineno;
        if (auto err = it->second(base, value); !err.empty())
            issues.push_back({lineno, key + ": " + err});
    }

    auto more = validate_config(base, lines);
    issues.insert(issues.end(), more.begin(), more.end());
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return base;
}

/// Defaults for each scenario, chosen so that running with no config file
/// reproduces the reference studies.
inline RunConfig default_config(const std::string& scenario) {
    RunConfig c;
    c.scenario.name = scenario;
    if (scenario == "solve") {
        c.discretization = {255, 2048, Scheme::integral};
    } else if (scenario == "wave-limit") {
        c.kernel.type = "wedge";
        c.kernel.G0 = 2.0;
        c.kernel.Ginf = 1.0;
        c.discretization = {255, 2048, Scheme::integral};
    } else if (scenario == "mollify-study") {
        c.discretization = {127, 512, Scheme::integral};
    } else if (scenario == "convergence") {
        c.kernel.type = "prony";
        c.kernel.Ginf = 1.0;
        c.kernel.g = {1.0};
        c.kernel.tau = {0.5};
        c.discretization = {15, 32, Scheme::integral};
    } else if (scenario == "energy-audit") {
        c.kernel.type = "prony";
        c.kernel.Ginf = 1.0;
        c.kernel.g = {1.0};
        c.kernel.tau = {0.5};
        c.problem.T = 2.0;
        c.discretization = {63, 512, Scheme::differential};
    } else {
        throw ConfigurationError("unknown scenario '" + scenario +
                                 "'; valid options: " + detail::join(scenario_names()));
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError({{0, "cannot open config file " + path.string()}});
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c = parse_config(ss.str(), std::move(base));
    c.base_dir = path.parent_path();
    return c;
}

/// The resolved configuration in the same format it is read in.
inline std::string render_config(const RunConfig& c) {
    using detail::format_list;
    using detail::format_number;
    std::ostringstream o;
    o << "problem.a = " << format_number(c.problem.a) << '\n'
      << "problem.b = " << format_number(c.problem.b) << '\n'
      << "problem.T = " << format_number(c.problem.T) << '\n'
      << "problem.u0 = " << c.problem.u0 << '\n'
      << "problem.u1 = " << c.problem.u1 << '\n'
      << "problem.f = " << c.problem.f << '\n'
      << "kernel.type = " << c.kernel.type << '\n'
      << "kernel.G0 = " << format_number(c.kernel.G0) << '\n'
      << "kernel.Ginf = " << format_number(c.kernel.Ginf) << '\n'
      << "kernel.a = " << format_number(c.kernel.a) << '\n'
      << "kernel.g = " << format_list(c.kernel.g) << '\n'
      << "kernel.tau = " << format_list(c.kernel.tau) << '\n';
    if (!c.kernel.table.empty()) o << "kernel.table = " << c.kernel.table << '\n';
    o << "kernel.expression = " << c.kernel.expression << '\n'
      << "kernel.epsilon = " << (c.kernel.epsilon ? format_number(*c.kernel.epsilon) : "none") << '\n'
      << "kernel.kink_policy = "
      << (c.kernel.kink_policy == KinkPolicy::strict ? "strict" : "left_limit") << '\n'
      << "discretization.n_interior = " << c.discretization.n_interior << '\n'
      << "discretization.n_steps = " << c.discretization.n_steps << '\n'
      << "discretization.scheme = " << to_string(c.discretization.scheme) << '\n';
    if (!c.scenario.name.empty()) o << "scenario.name = " << c.scenario.name << '\n';
    o << "scenario.epsilon_list = " << format_list(c.scenario.epsilon_list) << '\n'
      << "scenario.a_list = " << format_list(c.scenario.a_list) << '\n'
      << "scenario.levels = " << c.scenario.levels << '\n'
      << "scenario.n_modes = " << c.scenario.n_modes << '\n'
      << "scenario.reference = " << c.scenario.reference << '\n'
      << "scenario.min_order = " << format_number(c.scenario.min_order) << '\n'
      << "scenario.audit_points = " << c.scenario.audit_points << '\n'
      << "output.directory = " << c.output.directory << '\n'
      << "output.stride = " << c.output.stride << '\n';
    return o.str();
}

/// Read a `t,G` table. A leading non-numeric line is taken as a header.
inline std::vector<Sample> read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open kernel table " + path.string());
    std::vector<Sample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (detail::trim(line).empty()) continue;
        const auto comma = line.find(',');
        const auto t = comma == std::string::npos ? std::nullopt
                                                  : detail::to_double(line.substr(0, comma));
        const auto g = comma == std::string::npos ? std::nullopt
                                                  : detail::to_double(line.substr(comma + 1));
        if (!t || !g) {
            if (out.empty() && lineno == 1) continue;  // header
            throw ConfigurationError(path.string() + " line " + std::to_string(lineno) +
                                     ": expected 't,G'");
        }
        out.push_back({*t, *g});
    }
    return out;
}

/// The unmollified relaxation function described by the kernel block.
inline RelaxationKernel build_kernel(const KernelConfig& k, const std::filesystem::path& base_dir = {}) {
    if (k.type == "wedge") return RelaxationKernel::wedge(k.G0, k.Ginf, k.a);
    if (k.type == "prony") {
        if (k.g.size() != k.tau.size())
            throw ConfigurationError("kernel.g and kernel.tau differ in length");
        std::vector<PronyTerm> terms;
        for (std::size_t i = 0; i < k.g.size(); ++i) terms.push_back({k.g[i], k.tau[i]});
        return RelaxationKernel::prony(k.Ginf, std::move(terms));
    }
    if (k.type == "tabulated") {
        std::filesystem::path p(k.table);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return RelaxationKernel::tabulated(read_table(p));
    }
    if (k.type == "expression") return RelaxationKernel::expression(parse(k.expression));
    throw ConfigurationError("unknown kernel.type '" + k.type +
                             "'; valid options: wedge, prony, tabulated, expression");
}

inline ProblemData build_data(const ProblemConfig& p) {
    return {parse(p.u0), parse(p.u1), parse(p.f)};
}

}  // namespace viscokern
