#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thermint/interval_map.hpp"

using namespace thermint;

namespace {
const double kLog2 = std::log(2.0);
const double kLog4 = std::log(4.0);
}

TEST_CASE("built-in evaluation") {
    auto cheb = chebyshev_map();
    CHECK(cheb.eval(0.5) == Catch::Approx(1.0));
    CHECK(cheb.eval(0.75) == Catch::Approx(0.75));
    CHECK(cheb.eval(1.0) == Catch::Approx(0.0).margin(1e-15));

    auto tent = tent_map();
    CHECK(tent.eval(0.25) == Catch::Approx(0.5));
    CHECK(tent.eval(0.75) == Catch::Approx(0.5));

    CHECK_THROWS_AS(tent.eval(1.5), std::domain_error);
    CHECK_THROWS_AS(tent.eval(-0.2), std::domain_error);
}

TEST_CASE("shared branch endpoints resolve to the left branch") {
    auto dbl = doubling_map();
    // left branch: 2*0.5 = 1; right branch would give 0
    CHECK(dbl.eval(0.5) == Catch::Approx(1.0));
    CHECK(dbl.branch_index_of(0.5) == 0);
    CHECK(dbl.branch_index_of(0.5 + 1e-9) == 1);
}

TEST_CASE("log derivative values") {
    auto cheb = chebyshev_map();
    CHECK(cheb.log_deriv(0.0) == Catch::Approx(kLog4));
    CHECK(cheb.log_deriv(0.5) == -kInf);

    auto tent = tent_map();
    for (double x : {0.1, 0.3, 0.6, 0.9}) CHECK(tent.log_deriv(x) == Catch::Approx(kLog2));

    auto lor = lorenz_cusp_map(1.5);
    CHECK(lor.log_deriv(0.5) == -kInf);  // contracting cusp at the discontinuity
    CHECK(lor.log_deriv(0.0) == Catch::Approx(std::log(3.0)));
}

TEST_CASE("derivative consistency against central differences") {
    const double h = 1e-7;
    for (const auto& m : {tent_map(), doubling_map(), chebyshev_map(), quadratic_map(3.9),
                          lorenz_cusp_map(1.5)}) {
        for (int b = 0; b < m.branch_count(); ++b) {
            const auto dom = m.branches()[b].domain;
            double margin = 1e-3 * dom.length();
            int checked = 0;
            for (int i = 0; i < 1000; ++i) {
                double x = dom.lo + margin + (dom.length() - 2 * margin) * (i + 0.5) / 1000.0;
                double d = m.deriv_on_branch(b, x);
                double fd = (m.eval_on_branch(b, x + h) - m.eval_on_branch(b, x - h)) / (2 * h);
                double denom = std::max(std::abs(d), 1e-6);
                REQUIRE(std::abs(fd - d) / denom < 1e-6);
                double ld = std::log(std::abs(d));
                REQUIRE(std::abs(std::exp(ld) - std::abs(d)) <= 1e-12 * std::abs(d));
                ++checked;
            }
            CHECK(checked == 1000);
        }
    }
}

TEST_CASE("critical order scaling exponent") {
    struct Case {
        IntervalMap m;
        double order;
    };
    Case cases[] = {{chebyshev_map(), 2.0}, {quadratic_map(3.9), 2.0}, {lorenz_cusp_map(1.5), 1.5}};
    for (const auto& cs : cases) {
        const auto& c = cs.m.critical_set().front();
        double fc = cs.m.eval(c.location);  // left-branch value at the critical point
        double d1 = 1e-4, d2 = 1e-6;
        double v1 = std::abs(cs.m.eval(c.location - d1) - fc);
        double v2 = std::abs(cs.m.eval(c.location - d2) - fc);
        double est = (std::log(v1) - std::log(v2)) / (std::log(d1) - std::log(d2));
        CHECK(std::abs(est - cs.order) <= 0.01 * cs.order);
    }
}

TEST_CASE("branch partitions of the built-ins") {
    auto tent = tent_map();
    REQUIRE(tent.branch_count() == 2);
    CHECK(tent.branches()[0].domain.approx_eq({0.0, 0.5}, 0.0));
    CHECK(tent.branches()[1].domain.approx_eq({0.5, 1.0}, 0.0));

    CHECK(chebyshev_map().branches()[0].domain.hi == Catch::Approx(0.5));
    CHECK(quadratic_map(3.9).branches()[1].domain.lo == Catch::Approx(0.5));

    CHECK(tent.full_branch_markov());
    CHECK(doubling_map().full_branch_markov());
    CHECK(chebyshev_map().full_branch_markov());
    CHECK_FALSE(quadratic_map(3.9).full_branch_markov());
    CHECK(lorenz_cusp_map(1.5).full_branch_markov());
}

TEST_CASE("branch monotonicity under sampling") {
    for (const auto& m : {tent_map(), chebyshev_map(), quadratic_map(3.9), lorenz_cusp_map(1.5)}) {
        for (int b = 0; b < m.branch_count(); ++b) {
            const auto dom = m.branches()[b].domain;
            int sign = m.branches()[b].increasing ? 1 : -1;
            double prev = m.eval_on_branch(b, dom.lo);
            for (int i = 1; i <= 100; ++i) {
                double x = dom.lo + dom.length() * i / 100.0;
                double y = m.eval_on_branch(b, x);
                CHECK(sign * (y - prev) >= -1e-12);
                prev = y;
            }
        }
    }
}

TEST_CASE("admissibility report: chebyshev fails the critical-orbit condition") {
    auto rep = check_class_F(chebyshev_map(), 10);
    CHECK(rep.eligible);
    CHECK(rep.nonflat_orders.pass);
    CHECK(rep.schwarzian_convexity.pass);
    CHECK_FALSE(rep.critical_orbits.pass);  // f(1/2)=1, f^2=f^3=0: preperiodic critical orbit
    CHECK_FALSE(rep.in_class);
}

TEST_CASE("admissibility report: tent is cusp-class, not eligible") {
    auto rep = check_class_F(tent_map(), 10);
    CHECK_FALSE(rep.eligible);
    CHECK_FALSE(rep.in_class);
    CHECK(rep.summary.find("cusp") != std::string::npos);
}

TEST_CASE("admissibility report: quadratic(3.9) passes to depth 12") {
    auto rep = check_class_F(quadratic_map(3.9), 12);
    CHECK(rep.eligible);
    CHECK(rep.nonflat_orders.pass);
    CHECK(rep.schwarzian_convexity.pass);
    CHECK(rep.critical_orbits.pass);
    CHECK(rep.in_class);
    CHECK(rep.transitivity.detail.find("heuristic") != std::string::npos);
}

TEST_CASE("user-defined piecewise map") {
    std::vector<MapPiece> pieces = {{{0.0, 0.5}, "4*x*(1-x)"}, {{0.5, 1.0}, "4*x*(1-x)"}};
    auto m = map_from_pieces("custom-cheb", MapKind::smooth, pieces, {{0.5, 2.0}});
    auto cheb = chebyshev_map();
    for (double x : {0.1, 0.37, 0.5, 0.82}) {
        CHECK(m.eval(x) == Catch::Approx(cheb.eval(x)));
        CHECK(m.deriv_on_branch(m.branch_index_of(x), x) ==
              Catch::Approx(cheb.deriv_on_branch(cheb.branch_index_of(x), x)));
    }
    // inverse falls back to bisection
    CHECK(m.invert_on_branch(0, 0.5) == Catch::Approx(0.14644660940672627).margin(1e-12));
}

TEST_CASE("built-in closed-form facts") {
    auto tent = tent_map();
    REQUIRE(tent.h_top().has_value());
    CHECK(*tent.h_top() == Catch::Approx(kLog2));
    CHECK(*tent.closed_form_pressure(0.5) == Catch::Approx(0.5 * kLog2));

    auto cheb = chebyshev_map();
    CHECK(*cheb.closed_form_pressure(-2.0) == Catch::Approx(2.0 * kLog4));
    CHECK(*cheb.closed_form_pressure(1.0) == Catch::Approx(0.0).margin(1e-15));

    CHECK_FALSE(quadratic_map(3.9).h_top().has_value());
}
