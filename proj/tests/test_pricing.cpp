#include <doctest.h>

#include <cmath>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"
#include "aptkit/pricing.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace aptkit;
using namespace aptkit::testing;

namespace {
const ExpectationBackend kExact = ExpectationBackend::exact();
}

TEST_CASE("constant claims price at face value") {
    MarketModel m = rademacher_model(2, {0.3, -0.2});
    Utility u = utility_b();
    StrategyBound b = StrategyBound::manual(30.0);
    for (double c : {0.0, 0.4, 1.25}) {
        for (int n : {1, 2}) {
            PriceResult r = reservation_price(m, u, kExact, n, 0.5, Claim::constant(c), b);
            CHECK(std::abs(r.p - c) <= 1e-7);
            CHECK(r.lo <= r.p);
            CHECK(r.p <= r.hi);
        }
    }
}

TEST_CASE("attainable claims price at their constant part") {
    MarketModel m = rademacher_model(2, {0.4, -0.1});
    Utility u = utility_a();
    Claim g = Claim::linear(1.5, {0.5, -0.25}, m.drift());
    require_nonnegative(m, g);
    PriceResult r = reservation_price(m, u, kExact, 2, 1.0, g, StrategyBound::manual(40.0));
    CHECK(std::abs(r.p - 1.5) <= 1e-6);
}

TEST_CASE("Rademacher call decomposes as cash plus hedge and prices at one half") {
    // (eps)^+ = 1/2 + eps/2 almost surely on {-1, +1}
    MarketModel m = rademacher_model(1);
    Utility u = utility_a();
    Claim g = Claim::call_on_factor(1, 0.0);
    PriceResult r = reservation_price(m, u, kExact, 1, 0.0, g, StrategyBound::manual(20.0));
    CHECK(std::abs(r.p - 0.5) <= 1e-6);
    CHECK(std::abs(r.residual) <= 1e-7);

    // literal (h, p) grid oracle
    auto value_at = [&](double p, double h) {
        return 0.5 * (u.value(p + h - 1.0) + u.value(p - h));
    };
    double target = grid_search_1d([&](double h) { return 0.5 * (u.value(h) + u.value(-h)); },
                                   8.0, 1e-3)
                        .value;
    double best_p = -1.0, best_gap = 1e300;
    for (double p = 0.3; p <= 0.7; p += 1e-4) {
        double v = grid_search_1d([&](double h) { return value_at(p, h); }, 8.0, 1e-3).value;
        double gap = std::abs(v - target);
        if (gap < best_gap) {
            best_gap = gap;
            best_p = p;
        }
    }
    CHECK(std::abs(best_p - r.p) <= 2e-4);
}

TEST_CASE("non-attainable call agrees with an independent bisection oracle") {
    std::vector<FactorDistribution> f{three_point(1), FactorDistribution::rademacher(2)};
    MarketModel m(std::move(f), DriftVector({0.1, -0.2}, 0.0));
    Utility u = utility_a();
    Claim g = Claim::call_on_factor(1, 0.5);
    StrategyBound b = StrategyBound::manual(6.0);
    PriceResult r = reservation_price(m, u, kExact, 2, 0.25, g, b);

    const double s1[3] = {-2.0, 0.0, 2.0};
    const double q1[3] = {0.125, 0.75, 0.125};
    auto inner = [&](double p, bool with_claim) {
        return grid_search_2d(
                   [&](double h1, double h2) {
                       double v = 0.0;
                       for (int i = 0; i < 3; ++i) {
                           for (int j = 0; j < 2; ++j) {
                               double e2 = j == 0 ? -1.0 : 1.0;
                               double gain = h1 * (s1[i] - 0.1) + h2 * (e2 + 0.2);
                               double pay =
                                   with_claim && s1[i] > 0.5 ? s1[i] - 0.5 : 0.0;
                               v += q1[i] * 0.5 * u.value(0.25 + p + gain - pay);
                           }
                       }
                       return v;
                   },
                   6.0, 2e-3, 300)
            .value;
    };
    double target = inner(0.0, false);
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 18; ++it) {
        double mid = 0.5 * (lo + hi);
        (inner(mid, true) < target ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - r.p) <= 5e-5);
    CHECK(std::abs(r.residual) <= 1e-7 * std::max(1.0, 1.0));
}

TEST_CASE("prices are monotone in the claim and nonnegative") {
    MarketModel m = rademacher_model(2, {0.25, 0.1});
    Utility u = utility_a();
    StrategyBound b = StrategyBound::manual(30.0);
    Claim small = Claim::call_on_factor(1, 0.5);
    Claim large = Claim::call_on_factor(1, -0.5);  // dominates scenario-wise
    PriceResult ps = reservation_price(m, u, kExact, 2, 0.5, small, b);
    PriceResult pl = reservation_price(m, u, kExact, 2, 0.5, large, b);
    CHECK(ps.p <= pl.p + 1e-7);
    CHECK(ps.p >= -1e-7);
    CHECK(pl.p >= -1e-7);
}

TEST_CASE("price translation: shifting the claim shifts the price") {
    MarketModel m = rademacher_model(2, {0.3, -0.15});
    Utility u = utility_b();
    StrategyBound b = StrategyBound::manual(30.0);
    Claim g = Claim::call_on_factor(2, 0.0);
    PriceResult base = reservation_price(m, u, kExact, 2, 0.75, g, b);
    for (double c : {0.5, 1.75}) {
        PriceResult moved = reservation_price(m, u, kExact, 2, 0.75, g.plus(c), b);
        CHECK(std::abs(moved.p - (base.p + c)) <= 1e-6);
    }
}

TEST_CASE("price convergence: irrelevant sources leave all segment prices equal") {
    MarketModel m = rademacher_model(3, {0.3, 0.0, 0.0});
    Utility u = utility_a();
    Claim g = Claim::call_on_factor(1, 0.3);
    PriceConvergence pc =
        price_convergence(m, u, kExact, 0.5, g, {1, 2, 3}, StrategyBound::manual(25.0));
    CHECK(pc.tail_ok);
    CHECK(pc.final_ok);
    for (const auto& r : pc.per_segment)
        CHECK(std::abs(r.p - pc.reference.p) <= 1e-7);
}

TEST_CASE("price convergence: constant claims give a flat price curve") {
    MarketModel m = rademacher_model(3, {0.2, -0.1, 0.15});
    Utility u = utility_a();
    PriceConvergence pc = price_convergence(m, u, kExact, 0.0, Claim::constant(1.0), {1, 2, 3},
                                            StrategyBound::manual(25.0));
    CHECK(pc.tail_ok);
    CHECK(pc.final_ok);
    for (const auto& r : pc.per_segment) CHECK(std::abs(r.p - 1.0) <= 1e-7);
    CHECK(pc.final_gap <= 1e-7);
}

TEST_CASE("price convergence: gaps shrink once the claim support is covered") {
    // claim on the first 2 factors of a seeded 3-factor market
    std::vector<FactorDistribution> f{FactorDistribution::rademacher(1), three_point(2),
                                      FactorDistribution::rademacher(3)};
    MarketModel m(std::move(f), DriftVector({0.2, 0.0, -0.1}, 0.0));
    Utility u = utility_a();
    Claim g = Claim::from_payoff(
        2, [](std::span<const double> sc) { return std::max(sc[0] + 0.5 * sc[1], 0.0); },
        "basket call on two factors");
    require_nonnegative(m, g);
    PriceConvergence pc =
        price_convergence(m, u, kExact, 0.5, g, {1, 2, 3}, StrategyBound::manual(25.0));
    double g1 = std::abs(pc.per_segment[0].p - pc.reference.p);
    double g2 = std::abs(pc.per_segment[1].p - pc.reference.p);
    CHECK(g1 >= g2 - 1e-6);
    CHECK(pc.final_ok);
}

TEST_CASE("pricing propagates segment-solver failures") {
    MarketModel m = rademacher_model(1);
    Utility u = utility_a();
    CHECK_THROWS_AS(reservation_price(m, u, kExact, 1, 0.0, Claim::constant(1e200),
                                      StrategyBound::manual(5.0)),
                    SolverError);
}
