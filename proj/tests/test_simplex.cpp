#include <doctest.h>

#include "aptkit/simplex.hpp"

using namespace aptkit;

namespace {

LpProblem make(std::size_t rows, std::size_t cols, std::vector<double> a, std::vector<double> b,
               std::vector<double> c) {
    LpProblem p;
    p.rows = rows;
    p.cols = cols;
    p.a = std::move(a);
    p.b = std::move(b);
    p.c = std::move(c);
    return p;
}

}  // namespace

TEST_CASE("simplex solves a 2x2 system with a unique feasible point") {
    // w1 + w2 = 1, -w1 + w2 = 0.5  ->  w = (0.25, 0.75)
    LpProblem p = make(2, 2, {1, 1, -1, 1}, {1, 0.5}, {0, 0});
    LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(0.25));
    CHECK(r.x[1] == doctest::Approx(0.75));
}

TEST_CASE("simplex minimizes over a simplex face") {
    // min -x1 - 2 x2  s.t.  x1 + x2 + s = 4, x1 + 3 x2 + t = 6
    LpProblem p = make(2, 4, {1, 1, 1, 0, 1, 3, 0, 1}, {4, 6}, {-1, -2, 0, 0});
    LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(3.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.objective == doctest::Approx(-5.0));
}

TEST_CASE("simplex flags infeasibility with a separating certificate") {
    // x1 + x2 = 1, x1 + x2 = 3: inconsistent
    LpProblem p = make(2, 2, {1, 1, 1, 1}, {1, 3}, {0, 0});
    LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::infeasible);
    REQUIRE(r.farkas.size() == 2);
    // y'A <= 0 componentwise and y'b > 0
    double ya1 = r.farkas[0] + r.farkas[1];
    double yb = r.farkas[0] * 1 + r.farkas[1] * 3;
    CHECK(ya1 <= 1e-7);
    CHECK(yb > 1e-7);
}

TEST_CASE("simplex detects unboundedness") {
    // min -x1 s.t. x1 - x2 = 0 (ray x1 = x2 -> infinity)
    LpProblem p = make(1, 2, {1, -1}, {0}, {-1, 0});
    LpResult r = solve_lp(p);
    CHECK(r.status == LpStatus::unbounded);
}

TEST_CASE("simplex handles redundant rows") {
    LpProblem p = make(3, 3, {1, 1, 1, 2, 2, 2, 1, 0, 0}, {1, 2, 0.25}, {0, -1, 0});
    LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(0.25));
    CHECK(r.x[1] == doctest::Approx(0.75));
    CHECK(r.x[2] == doctest::Approx(0.0));
}

TEST_CASE("max-min weight push spreads mass evenly when unconstrained") {
    // variables y1, y2, t: w_i = y_i + t, sum w = 1, no moment rows.
    // max t -> t = 0.5, w = (0.5, 0.5).
    LpProblem p = make(1, 3, {1, 1, 2}, {1}, {0, 0, -1});
    LpResult r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.x[2] == doctest::Approx(0.5));
}
