#include "doctest.h"

#include "wgspec/errors.hpp"
#include "wgspec/expression.hpp"

#include <cmath>

using namespace wgspec;

TEST_SUITE_BEGIN("expression");

TEST_CASE("basic evaluation") {
    VarBindings v;
    v.y1 = 0.0;
    CHECK(parse_expression("2+cos(2*pi*y1)").eval(v) == doctest::Approx(3.0));
    v.s = 0.25;
    CHECK(parse_expression("1 - 0.5*sin(2*pi*s)").eval(v) == doctest::Approx(0.5));
    v.t = 2.0;
    CHECK(parse_expression("sqrt(t^2)").eval(v) == doctest::Approx(2.0));
    CHECK(parse_expression("min(1, t)").eval(v) == doctest::Approx(1.0));
    CHECK(parse_expression("max(1, t)").eval(v) == doctest::Approx(2.0));
    CHECK(parse_expression("abs(0-t)").eval(v) == doctest::Approx(2.0));
    CHECK(parse_expression("exp(0)").eval(v) == doctest::Approx(1.0));
}

TEST_CASE("precedence and associativity") {
    VarBindings v;
    CHECK(parse_expression("2+3*4").eval(v) == doctest::Approx(14.0));
    CHECK(parse_expression("2*3^2").eval(v) == doctest::Approx(18.0));
    CHECK(parse_expression("-2^2").eval(v) == doctest::Approx(-4.0));
    CHECK(parse_expression("2^3^2").eval(v) == doctest::Approx(512.0)); // right assoc
    CHECK(parse_expression("10-4-3").eval(v) == doctest::Approx(3.0)); // left assoc
    CHECK(parse_expression("12/3/2").eval(v) == doctest::Approx(2.0));
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_WITH_AS(parse_expression("1+*2"), doctest::Contains("position 3"), ConfigError);
    CHECK_THROWS_AS(parse_expression("sin(1"), ConfigError);
    CHECK_THROWS_AS(parse_expression("foo(1)"), ConfigError);
    CHECK_THROWS_AS(parse_expression("1 2"), ConfigError);
    CHECK_THROWS_AS(parse_expression(""), ConfigError);
    CHECK_THROWS_AS(parse_expression("min(1)"), ConfigError);
}

TEST_CASE("symbolic derivatives") {
    Expression e = parse_expression("sin(2*s)");
    Expression d = e.derivative("s");
    for (double s : {0.0, 0.3, 1.1}) {
        VarBindings v;
        v.s = s;
        CHECK(d.eval(v) == doctest::Approx(2.0 * std::cos(2 * s)).epsilon(1e-12));
    }
    Expression p = parse_expression("s^3 - 2*s").derivative("s");
    VarBindings v;
    v.s = 2.0;
    CHECK(p.eval(v) == doctest::Approx(10.0));

    // second derivative through composition
    Expression dd = parse_expression("cos(3*s)").derivative("s").derivative("s");
    v.s = 0.5;
    CHECK(dd.eval(v) == doctest::Approx(-9.0 * std::cos(1.5)).epsilon(1e-12));

    // branch rule for min/max, sign rule for abs
    Expression dm = parse_expression("min(s, 2*s)").derivative("s");
    v.s = 1.0; // s < 2s, min branch = s
    CHECK(dm.eval(v) == doctest::Approx(1.0));
    v.s = -1.0; // 2s < s
    CHECK(dm.eval(v) == doctest::Approx(2.0));
    Expression da = parse_expression("abs(s)").derivative("s");
    v.s = -3.0;
    CHECK(da.eval(v) == doctest::Approx(-1.0));

    // variable exponent is rejected
    CHECK_THROWS_AS(parse_expression("s^s").derivative("s"), ConfigError);
}

TEST_CASE("depends_on") {
    Expression e = parse_expression("x1 + sin(y2)");
    CHECK(e.depends_on("x1"));
    CHECK(e.depends_on("y2"));
    CHECK_FALSE(e.depends_on("s"));
}

TEST_SUITE_END();
