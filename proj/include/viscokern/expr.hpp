#pragma once

// Small arithmetic expression language for problem data and kernels.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | 'x' | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | abs
//
// '^' binds tighter than unary minus, so "-2^2" is -(2^2) = -4, and
// "2^3^2" is 2^(3^2) = 512.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "viscokern/errors.hpp"

namespace viscokern {

class Expr {
public:
    enum class Kind { number, var_x, var_t, neg, add, sub, mul, div, pow, call };
    enum class Func { sin, cos, exp, sqrt, abs };

    struct Node {
        Kind kind;
        std::size_t offset;  // byte offset of the token that produced the node
        double value = 0.0;
        Func func = Func::sin;
        std::unique_ptr<const Node> lhs;
        std::unique_ptr<const Node> rhs;
    };

    Expr() : Expr(number_node(0.0), "0") {}

    double operator()(double x, double t) const { return eval_node(*root_, x, t); }

    /// Fully parenthesized form; parsing it back yields the same tree.
    std::string canonical() const {
        std::string out;
        print_node(*root_, out);
        return out;
    }

    const std::string& source() const noexcept { return source_; }

    /// True when the expression is a literal zero (e.g. "0" or "0.0").
    bool is_zero_literal() const noexcept {
        return root_->kind == Kind::number && root_->value == 0.0;
    }

    bool depends_on_x() const noexcept { return mentions(*root_, Kind::var_x); }
    bool depends_on_t() const noexcept { return mentions(*root_, Kind::var_t); }

    friend Expr parse(std::string_view source);

private:
    Expr(std::unique_ptr<const Node> root, std::string source)
        : root_(std::move(root)), source_(std::move(source)) {}

    static std::unique_ptr<const Node> number_node(double v) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::number;
        n->offset = 0;
        n->value = v;
        return n;
    }

    static bool mentions(const Node& n, Kind k) noexcept {
        if (n.kind == k) return true;
        return (n.lhs && mentions(*n.lhs, k)) || (n.rhs && mentions(*n.rhs, k));
    }

    static double eval_node(const Node& n, double x, double t) {
        switch (n.kind) {
            case Kind::number: return n.value;
            case Kind::var_x: return x;
            case Kind::var_t: return t;
            case Kind::neg: return -eval_node(*n.lhs, x, t);
            case Kind::add: return eval_node(*n.lhs, x, t) + eval_node(*n.rhs, x, t);
            case Kind::sub: return eval_node(*n.lhs, x, t) - eval_node(*n.rhs, x, t);
            case Kind::mul: return eval_node(*n.lhs, x, t) * eval_node(*n.rhs, x, t);
            case Kind::div: {
                const double num = eval_node(*n.lhs, x, t);
                const double den = eval_node(*n.rhs, x, t);
                if (den == 0.0) throw EvalError(n.offset, "division by zero");
                return num / den;
            }
            case Kind::pow: {
                const double base = eval_node(*n.lhs, x, t);
                const double expo = eval_node(*n.rhs, x, t);
                if (base < 0.0 && std::trunc(expo) != expo)
                    throw EvalError(n.offset, "negative base raised to a non-integer power");
                return std::pow(base, expo);
            }
            case Kind::call: {
                const double arg = eval_node(*n.lhs, x, t);
                switch (n.func) {
                    case Func::sin: return std::sin(arg);
                    case Func::cos: return std::cos(arg);
                    case Func::exp: return std::exp(arg);
                    case Func::abs: return std::abs(arg);
                    case Func::sqrt:
                        if (arg < 0.0) throw EvalError(n.offset, "sqrt of a negative number");
                        return std::sqrt(arg);
                }
            }
        }
        return 0.0;  // unreachable
    }

    static const char* func_name(Func f) noexcept {
        switch (f) {
            case Func::sin: return "sin";
            case Func::cos: return "cos";
            case Func::exp: return "exp";
            case Func::sqrt: return "sqrt";
            case Func::abs: return "abs";
        }
        return "?";
    }

    static void print_node(const Node& n, std::string& out) {
        auto binary = [&](char op) {
            out += '(';
            print_node(*n.lhs, out);
            out += op;
            print_node(*n.rhs, out);
            out += ')';
        };
        switch (n.kind) {
            case Kind::number: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                out += buf;
                break;
            }
            case Kind::var_x: out += 'x'; break;
            case Kind::var_t: out += 't'; break;
            case Kind::neg:
                out += "(-";
                print_node(*n.lhs, out);
                out += ')';
                break;
            case Kind::add: binary('+'); break;
            case Kind::sub: binary('-'); break;
            case Kind::mul: binary('*'); break;
            case Kind::div: binary('/'); break;
            case Kind::pow: binary('^'); break;
            case Kind::call:
                out += func_name(n.func);
                out += '(';
                print_node(*n.lhs, out);
                out += ')';
                break;
        }
    }

    std::shared_ptr<const Node> root_;
    std::string source_;
};

namespace detail {

class ExprParser {
public:
    explicit ExprParser(std::string_view src) : src_(src) {}

    std::unique_ptr<const Expr::Node> parse_all() {
        auto root = parse_expr();
        skip_space();
        if (pos_ != src_.size()) fail("expected operator or end of input");
        return root;
    }

private:
    using NodePtr = std::unique_ptr<const Expr::Node>;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

    void skip_space() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static std::unique_ptr<Expr::Node> make(Expr::Kind kind, std::size_t offset, NodePtr lhs = nullptr,
                        NodePtr rhs = nullptr) {
        auto n = std::make_unique<Expr::Node>();
        n->kind = kind;
        n->offset = offset;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    NodePtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            skip_space();
            const std::size_t at = pos_;
            if (accept('+')) {
                lhs = make(Expr::Kind::add, at, std::move(lhs), parse_term());
            } else if (accept('-')) {
                lhs = make(Expr::Kind::sub, at, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            skip_space();
            const std::size_t at = pos_;
            if (accept('*')) {
                lhs = make(Expr::Kind::mul, at, std::move(lhs), parse_unary());
            } else if (accept('/')) {
                lhs = make(Expr::Kind::div, at, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        skip_space();
        const std::size_t at = pos_;
        if (accept('-')) return make(Expr::Kind::neg, at, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        skip_space();
        const std::size_t at = pos_;
        if (accept('^')) return make(Expr::Kind::pow, at, std::move(base), parse_unary());
        return base;
    }

    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    NodePtr parse_primary() {
        skip_space();
        const std::size_t at = pos_;
        if (pos_ >= src_.size()) fail("expected number, identifier, '(' or unary operator");
        const char c = src_[pos_];

        if ((c >= '0' && c <= '9') || c == '.') {
            double v = 0.0;
            const char* first = src_.data() + pos_;
            const char* last = src_.data() + src_.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr == first) fail("malformed number");
            pos_ += static_cast<std::size_t>(ptr - first);
            auto n = make(Expr::Kind::number, at);
            n->value = v;
            return n;
        }

        if (c == '(') {
            ++pos_;
            auto inner = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }

        if (is_ident_start(c)) {
            std::size_t end = pos_;
            while (end < src_.size() && is_ident_char(src_[end])) ++end;
            const std::string_view name = src_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "x") return make(Expr::Kind::var_x, at);
            if (name == "t") return make(Expr::Kind::var_t, at);
            if (name == "pi") {
                auto n = make(Expr::Kind::number, at);
                n->value = std::numbers::pi;
                return n;
            }
            Expr::Func f{};
            if (name == "sin") f = Expr::Func::sin;
            else if (name == "cos") f = Expr::Func::cos;
            else if (name == "exp") f = Expr::Func::exp;
            else if (name == "sqrt") f = Expr::Func::sqrt;
            else if (name == "abs") f = Expr::Func::abs;
            else throw ParseError(at, "unknown identifier '" + std::string(name) + "'");

            if (!accept('(')) fail("expected '(' after function name");
            auto arg = parse_expr();
            if (!accept(')')) fail("expected ')'");
            auto n = make(Expr::Kind::call, at, std::move(arg));
            n->func = f;
            return n;
        }

        fail("expected number, identifier, '(' or unary operator");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse `source`; throws ParseError with the byte offset of the problem.
inline Expr parse(std::string_view source) {
    detail::ExprParser p(source);
    return Expr(p.parse_all(), std::string(source));
}

inline double eval(const Expr& e, double x, double t) { return e(x, t); }

}  // namespace viscokern
