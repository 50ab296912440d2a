#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lvnd/error.hpp"
#include "lvnd/expression.hpp"

using lvnd::Expression;

TEST_CASE("arithmetic and precedence") {
    CHECK(Expression::parse("1 + 2*3")(0, 0) == 7.0);
    CHECK(Expression::parse("(1 + 2)*3")(0, 0) == 9.0);
    CHECK(Expression::parse("2^3^2")(0, 0) == 512.0);
    CHECK(Expression::parse("-2^2")(0, 0) == -4.0);
    CHECK(Expression::parse("8/4/2")(0, 0) == 1.0);
    CHECK(Expression::parse("1e-3 + 2.5E2")(0, 0) == doctest::Approx(250.001));
}

TEST_CASE("variables, constants and functions") {
    const auto e = Expression::parse("1 + 0.2*sin(2*pi*t/T) + 0.1*cos(pi*x)", {{"T", 2.0}});
    const double t = 0.3, x = -0.4;
    CHECK(e(t, x) == doctest::Approx(1 + 0.2 * std::sin(std::numbers::pi * t) + 0.1 * std::cos(std::numbers::pi * x)));
    CHECK(e.depends_on_time());
    CHECK(e.depends_on_space());

    const auto f = Expression::parse("exp(y) + sqrt(4) + abs(-3)");
    CHECK(f(0, 0, 1.0) == doctest::Approx(std::exp(1.0) + 5.0));
    CHECK_FALSE(f.depends_on_time());
    CHECK(f.depends_on_space());

    const auto c = Expression::parse("2");
    CHECK_FALSE(c.depends_on_time());
    CHECK_FALSE(c.depends_on_space());
}

TEST_CASE("malformed expressions are rejected") {
    CHECK_THROWS_AS(Expression::parse(""), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("1 +"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("(1 + 2"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("1 2"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("z + 1"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("tan(t)"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("T"), lvnd::ValidationError);
    CHECK_THROWS_AS(Expression::parse("1 $ 2"), lvnd::ValidationError);
}
