#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "thermint/cylinders.hpp"

using namespace thermint;

namespace {
const double kLog2 = std::log(2.0);

double total_length(const Partition& p) {
    double s = 0.0;
    for (const auto& c : p.cylinders) s += c.interval.length();
    return s;
}
}

TEST_CASE("tent refinement to depth 2") {
    auto tent = tent_map();
    Partition p2 = refine(tent, branch_partition(tent));
    REQUIRE(p2.cylinders.size() == 4);
    for (const auto& c : p2.cylinders) CHECK(c.interval.length() == Catch::Approx(0.25));
    CHECK(p2.cylinders[1].itinerary == std::vector<int>{0, 1});
}

TEST_CASE("chebyshev depth-2 cylinder endpoints solve f(x)=1/2") {
    auto cheb = chebyshev_map();
    Partition p2 = refine_to_depth(cheb, 2);
    REQUIRE(p2.cylinders.size() == 4);
    const double split_lo = 0.5 * (1.0 - std::sqrt(0.5));
    const double split_hi = 0.5 * (1.0 + std::sqrt(0.5));
    CHECK(p2.cylinders[0].interval.hi == Catch::Approx(split_lo).margin(1e-12));
    CHECK(p2.cylinders[2].interval.hi == Catch::Approx(split_hi).margin(1e-12));
    // interior endpoints map to the branch boundary
    CHECK(cheb.eval(p2.cylinders[0].interval.hi) == Catch::Approx(0.5).margin(1e-12));
    CHECK(cheb.eval(p2.cylinders[2].interval.hi) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("doubling refinement at depth 10") {
    auto dbl = doubling_map();
    Partition p = refine_to_depth(dbl, 10);
    REQUIRE(p.cylinders.size() == 1024);
    for (const auto& c : p.cylinders)
        CHECK(c.interval.length() == Catch::Approx(std::pow(2.0, -10)).margin(1e-13));
    CHECK(total_length(p) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("cylinder counts and lengths for full-branch maps") {
    for (const auto& m : {tent_map(), chebyshev_map()}) {
        for (int n : {1, 3, 6}) {
            Partition p = refine_to_depth(m, n);
            CHECK(p.cylinders.size() == static_cast<std::size_t>(1) << n);
            CHECK(total_length(p) == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("refinement nests inside the parent") {
    auto q = quadratic_map(3.9);
    Partition parent = refine_to_depth(q, 4);
    Partition child = refine(q, parent);
    CHECK(total_length(child) == Catch::Approx(1.0).margin(1e-9));
    for (const auto& c : child.cylinders) {
        const Cylinder& par = cylinder_containing(parent, c.interval.mid());
        CHECK(par.interval.lo <= c.interval.lo + 1e-12);
        CHECK(par.interval.hi >= c.interval.hi - 1e-12);
        CHECK(std::equal(par.itinerary.begin(), par.itinerary.end(), c.itinerary.begin()));
    }
}

TEST_CASE("cylinder images track the itinerary") {
    auto q = quadratic_map(3.9);
    Partition p = refine_to_depth(q, 5);
    for (std::size_t ci = 0; ci < p.cylinders.size(); ci += 7) {
        const auto& c = p.cylinders[ci];
        for (double s : {0.25, 0.5, 0.75}) {
            double x = c.interval.lo + s * c.interval.length();
            double y = x;
            for (int k = 0; k < c.depth(); ++k) {
                const auto dom = q.branches()[c.itinerary[k]].domain;
                CHECK(dom.contains(y, 1e-9));
                y = q.eval_on_branch(c.itinerary[k], y);
            }
            CHECK(c.image.contains(y, 1e-9));
        }
    }
}

TEST_CASE("locating cylinders") {
    auto tent = tent_map();
    Partition p2 = refine_to_depth(tent, 2);
    CHECK(cylinder_containing(p2, 0.3).itinerary == std::vector<int>{0, 1});

    Partition p0 = partition_root(tent);
    CHECK(cylinder_containing(p0, 0.77).interval.approx_eq({0.0, 1.0}, 0.0));

    auto dbl = doubling_map();
    Partition p3 = refine_to_depth(dbl, 3);
    // 5/8 sits on a cylinder boundary: the left cylinder wins, matching the
    // left-branch convention of eval (f^2(5/8) = 1/2 resolves left).
    CHECK(cylinder_containing(p3, 5.0 / 8.0).itinerary == std::vector<int>{1, 0, 0});
    CHECK(cylinder_containing(p3, 5.0 / 8.0 + 1e-9).itinerary == std::vector<int>{1, 0, 1});
    CHECK(cylinder_containing(p3, 0.25).itinerary == std::vector<int>{0, 0, 1});
}

TEST_CASE("tent periodic points of period 2") {
    auto pts = periodic_points(tent_map(), 2);
    REQUIRE(pts.size() == 4);
    double expect[] = {0.0, 0.4, 2.0 / 3.0, 0.8};
    for (int i = 0; i < 4; ++i) {
        CHECK(pts[i].x == Catch::Approx(expect[i]).margin(1e-12));
        CHECK(pts[i].log_multiplier == Catch::Approx(std::log(4.0)));
    }
}

TEST_CASE("chebyshev fixed points") {
    auto pts = periodic_points(chebyshev_map(), 1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == Catch::Approx(0.0).margin(1e-12));
    CHECK(pts[0].log_multiplier == Catch::Approx(std::log(4.0)));
    CHECK(pts[1].x == Catch::Approx(0.75).margin(1e-12));
    CHECK(pts[1].log_multiplier == Catch::Approx(std::log(2.0)));
}

TEST_CASE("doubling periodic points of period 3") {
    auto pts = periodic_points(doubling_map(), 3);
    REQUIRE(pts.size() == 8);
    CHECK(pts[0].x == Catch::Approx(0.0).margin(1e-12));
    for (int k = 1; k <= 7; ++k) {
        CHECK(pts[k].x == Catch::Approx(k / 7.0).margin(1e-12));
        CHECK(pts[k].log_multiplier == Catch::Approx(std::log(8.0)));
    }
}

TEST_CASE("periodic point counts and residuals for full-branch maps") {
    for (const auto& m : {tent_map(), doubling_map(), chebyshev_map()}) {
        for (int n : {1, 2, 4, 6}) {
            auto pts = periodic_points(m, n);
            CHECK(pts.size() == static_cast<std::size_t>(1) << n);
            for (const auto& pp : pts) {
                double y = pp.x;
                for (int k = 0; k < n; ++k) y = m.eval_on_branch(pp.itinerary[k], y);
                CHECK(std::abs(y - pp.x) <= 1e-12);
            }
        }
    }
}

TEST_CASE("quadratic periodic points stay inside their cylinders") {
    auto q = quadratic_map(3.9);
    auto pts = periodic_points(q, 6);
    CHECK(pts.size() >= 2);
    for (const auto& pp : pts) {
        double y = pp.x;
        for (int k = 0; k < 6; ++k) y = q.eval_on_branch(pp.itinerary[k], y);
        CHECK(std::abs(y - pp.x) <= 1e-12);
    }
}

TEST_CASE("partition CSV dump") {
    auto tent = tent_map();
    std::ostringstream os;
    write_partition_csv(refine_to_depth(tent, 2), os);
    std::string s = os.str();
    CHECK(s.find("depth,itinerary,left,right") == 0);
    CHECK(s.find("2,0.1,0.25,0.5") != std::string::npos);
}
