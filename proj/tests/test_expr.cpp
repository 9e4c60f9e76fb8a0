#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thermint/expr.hpp"

using namespace thermint;

TEST_CASE("expression parsing and evaluation") {
    auto e = expr::parse("4*x*(1-x)");
    CHECK(expr::eval(e, 0.5) == Catch::Approx(1.0));
    CHECK(expr::eval(e, 0.25) == Catch::Approx(0.75));

    auto p = expr::parse("2*x^3 - x + 0.5");
    CHECK(expr::eval(p, 2.0) == Catch::Approx(14.5));

    auto trig = expr::parse("sin(3.14159265358979*x)");
    CHECK(expr::eval(trig, 0.5) == Catch::Approx(1.0));

    auto nested = expr::parse("sqrt(abs(-4*x))");
    CHECK(expr::eval(nested, 1.0) == Catch::Approx(2.0));

    CHECK(expr::eval(expr::parse("2e-1 + 1"), 0.0) == Catch::Approx(1.2));
}

TEST_CASE("expression parse errors carry position info") {
    CHECK_THROWS_AS(expr::parse("4*x*("), std::invalid_argument);
    CHECK_THROWS_AS(expr::parse("foo(x)"), std::invalid_argument);
    CHECK_THROWS_AS(expr::parse("1 + + 2 zz"), std::invalid_argument);
}

TEST_CASE("symbolic derivative matches finite differences") {
    const char* cases[] = {
        "4*x*(1-x)",
        "x^3 - 2*x^2 + x",
        "sin(2*x) * exp(x)",
        "sqrt(x + 0.5)",
        "1 / (x + 2)",
        "(1 - 2*x)^1.5",
    };
    for (const char* src : cases) {
        auto e = expr::parse(src);
        auto de = expr::derivative(e);
        for (double x : {0.1, 0.3, 0.45}) {
            double h = 1e-6;
            double fd = (expr::eval(e, x + h) - expr::eval(e, x - h)) / (2 * h);
            CHECK_THAT(expr::eval(de, x),
                       Catch::Matchers::WithinRel(fd, 1e-5) ||
                           Catch::Matchers::WithinAbs(fd, 1e-7));
        }
    }
}

TEST_CASE("derivative of power with variable exponent") {
    auto e = expr::parse("x^x");
    auto de = expr::derivative(e);
    double x = 1.5, h = 1e-6;
    double fd = (expr::eval(e, x + h) - expr::eval(e, x - h)) / (2 * h);
    CHECK(expr::eval(de, x) == Catch::Approx(fd).epsilon(1e-5));
}
