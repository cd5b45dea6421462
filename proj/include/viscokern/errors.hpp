#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace viscokern {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Query outside the interval on which a kernel is defined.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A quadrature or iteration failed to reach its tolerance.
class ToleranceError : public Error {
public:
    using Error::Error;
};

/// Derivative requested exactly at a kink without a one-sided policy.
class DerivativeUndefined : public Error {
public:
    using Error::Error;
};

/// Kernel or data cannot be used with the requested scheme.
class UnsupportedKernel : public Error {
public:
    using Error::Error;
};

/// Invalid solver or scenario configuration (CFL, sizes, mismatched grids...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared while time stepping.
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

/// Syntax or name error in an expression, carrying the byte offset.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string message)
        : Error("at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Domain error during evaluation (division by zero, sqrt of a negative).
class EvalError : public Error {
public:
    EvalError(std::size_t offset, std::string message)
        : Error("at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// One diagnostic of a configuration file.
struct ConfigIssue {
    std::size_t line = 0;  // 0 when the issue is not tied to a line
    std::string message;
};

/// All problems found in a configuration file, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : Error(render(issues)), issues_(std::move(issues)) {}

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    static std::string render(const std::vector<ConfigIssue>& issues) {
        std::string out;
        for (const auto& issue : issues) {
            if (!out.empty()) out += '\n';
            if (issue.line > 0) out += "line " + std::to_string(issue.line) + ": ";
            out += issue.message;
        }
        return out;
    }

    std::vector<ConfigIssue> issues_;
};

}  // namespace viscokern
