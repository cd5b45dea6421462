#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "viscokern/expr.hpp"

using namespace viscokern;

TEST(Expr, EvaluatesDocumentedExamples) {
    EXPECT_NEAR(parse("sin(pi*x)")(0.5, 0.0), 1.0, 1e-15);
    EXPECT_EQ(parse("x*t")(2.0, 3.0), 6.0);
    EXPECT_EQ(parse("exp(0)")(0.0, 0.0), 1.0);
    EXPECT_NEAR(parse("cos(t)*sin(pi*x)")(0.5, 0.0), 1.0, 1e-15);
}

TEST(Expr, PrecedenceVectors) {
    EXPECT_EQ(parse("1+2*3")(0, 0), 7.0);
    EXPECT_EQ(parse("2^3^2")(0, 0), 512.0);
    EXPECT_EQ(parse("-2^2")(0, 0), -4.0);
    EXPECT_EQ(parse("(1+2)*3")(0, 0), 9.0);
    EXPECT_EQ(parse("8/4/2")(0, 0), 1.0);
    EXPECT_EQ(parse("10-4-3")(0, 0), 3.0);
    EXPECT_EQ(parse("2^-1")(0, 0), 0.5);
    EXPECT_EQ(parse("--3")(0, 0), 3.0);
    EXPECT_EQ(parse("2*-3")(0, 0), -6.0);
    EXPECT_EQ(parse("1.5e2 + .5")(0, 0), 150.5);
    EXPECT_EQ(parse("abs(-3) + sqrt(16)")(0, 0), 7.0);
}

TEST(Expr, SyntaxErrorsCarryOffsets) {
    try {
        parse("1 + * 2");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
    auto offset_of = [](const char* src) -> std::size_t {
        try {
            parse(src);
        } catch (const ParseError& e) {
            return e.offset();
        }
        return std::string::npos;
    };
    EXPECT_EQ(offset_of("(1+2"), 4u);
    EXPECT_EQ(offset_of("1 2"), 2u);
    EXPECT_EQ(offset_of(""), 0u);
    EXPECT_EQ(offset_of("x + foo(1)"), 4u);
    EXPECT_EQ(offset_of("sin x"), 4u);
    EXPECT_EQ(offset_of("3 + y"), 4u);
}

TEST(Expr, UnknownIdentifierIsNamed) {
    try {
        parse("2*gamma(t)");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 2u);
        EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
    }
}

TEST(Expr, DomainErrorsCarryOffsets) {
    const auto div = parse("1 + 1/(x-1)");
    EXPECT_NO_THROW(div(0.0, 0.0));
    try {
        div(1.0, 0.0);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.offset(), 5u);
    }
    try {
        parse("sqrt(t - 2)")(0.0, 1.0);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.offset(), 0u);
    }
}

TEST(Expr, ZeroLiteralAndDependencies) {
    EXPECT_TRUE(parse("0").is_zero_literal());
    EXPECT_TRUE(parse(" 0.0 ").is_zero_literal());
    EXPECT_FALSE(parse("0*x").is_zero_literal());
    EXPECT_TRUE(parse("x + 1").depends_on_x());
    EXPECT_FALSE(parse("x + 1").depends_on_t());
    EXPECT_TRUE(parse("exp(-t)").depends_on_t());
}

namespace {

std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 11);
    std::uniform_real_distribution<double> lit(0.1, 3.0);
    switch (pick(rng)) {
        case 0: return "x";
        case 1: return "t";
        case 2: return "pi";
        case 3: return std::to_string(lit(rng));
        case 4: return "(" + random_expr(rng, depth - 1) + "+" + random_expr(rng, depth - 1) + ")";
        case 5: return random_expr(rng, depth - 1) + "-" + random_expr(rng, depth - 1);
        case 6: return random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1);
        case 7: return random_expr(rng, depth - 1) + "/(2+" + "abs(" + random_expr(rng, depth - 1) + "))";
        case 8: return "-" + random_expr(rng, depth - 1);
        case 9: return "sin(" + random_expr(rng, depth - 1) + ")";
        case 10: return "exp(-abs(" + random_expr(rng, depth - 1) + "))";
        default: return "abs(" + random_expr(rng, depth - 1) + ")^1.5";
    }
}

}  // namespace

TEST(ExprProperty, CanonicalFormReparsesToSameFunction) {
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::string src = random_expr(rng, 4);
        const Expr e = parse(src);
        const Expr again = parse(e.canonical());
        EXPECT_EQ(again.canonical(), e.canonical()) << src;
        for (int k = 0; k < 100; ++k) {
            const double x = coord(rng);
            const double t = coord(rng);
            const double a = e(x, t);
            const double b = again(x, t);
            if (std::isnan(a)) {
                EXPECT_TRUE(std::isnan(b));
            } else {
                EXPECT_EQ(a, b) << src << " at (" << x << ", " << t << ")";
            }
        }
    }
}
