#include <doctest.h>

#include <cmath>
#include <vector>

#include "aptkit/diagnostics.hpp"
#include "aptkit/errors.hpp"
#include "aptkit/expectation.hpp"
#include "aptkit/market.hpp"
#include "aptkit/numeric.hpp"
#include "helpers.hpp"

using namespace aptkit;
using namespace aptkit::testing;

namespace {
const ExpectationBackend kExact = ExpectationBackend::exact();
}

TEST_CASE("factor construction rejects structural garbage") {
    CHECK_THROWS_AS(FactorDistribution({1.0}, {1.0, 0.5}, 1), InputError);
    CHECK_THROWS_AS(FactorDistribution({-1.0, 1.0}, {0.0, 1.0}, 1), InputError);
    CHECK_THROWS_AS(FactorDistribution({-1.0, 1.0}, {0.5, 1.5}, 1), InputError);
}

TEST_CASE("renormalized factors are mean zero and unit variance") {
    auto f = FactorDistribution::renormalized({0.0, 1.0}, {0.5, 0.5}, 1);
    CHECK(f.support()[0] == doctest::Approx(-1.0));
    CHECK(f.support()[1] == doctest::Approx(1.0));
    auto g = FactorDistribution::renormalized({1.0, 2.0, 4.0}, {0.3, 0.5, 0.2}, 2);
    CHECK(g.mean() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(g.variance() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(FactorDistribution::renormalized({2.0, 2.0}, {0.5, 0.5}, 1), InputError);
}

TEST_CASE("validate_model: Rademacher market passes with third moment one") {
    MarketModel m = rademacher_model(3);
    ValidationReport rep = validate_model(m);
    CHECK(rep.pass);
    CHECK(rep.sup_third_moment == doctest::Approx(1.0));
    CHECK(rep.drift_norm == doctest::Approx(0.0));
}

TEST_CASE("validate_model: skewed two-point law has exact unit variance") {
    // {-2, 0.5} with probs {0.2, 0.8}: mean 0, variance 0.2*4 + 0.8*0.25 = 1
    MarketModel m({skewed_two_point(2.0, 1)}, DriftVector({0.0}, 0.0));
    ValidationReport rep = validate_model(m);
    CHECK(rep.pass);
    CHECK(rep.factor_moments[0].mean == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rep.factor_moments[0].variance == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("validate_model: biased coin fails the moment check") {
    MarketModel m({FactorDistribution({-1.0, 1.0}, {0.6, 0.4}, 1)}, DriftVector({0.0}, 0.0));
    ValidationReport rep = validate_model(m);
    CHECK_FALSE(rep.pass);
    CHECK(rep.factor_moments[0].mean == doctest::Approx(-0.2));
    CHECK_FALSE(rep.factor_moments[0].pass);
    CHECK(rep.two_sided_support[0].pass);  // support still straddles b = 0
}

TEST_CASE("validate_model: drift at the support edge breaks two-sided support") {
    MarketModel m = rademacher_model(1, {1.0});
    ValidationReport rep = validate_model(m);
    CHECK_FALSE(rep.pass);
    CHECK(rep.two_sided_support[0].prob_above == doctest::Approx(0.0));
    CHECK(rep.two_sided_support[0].prob_below == doctest::Approx(0.5));
}

TEST_CASE("wealth matches hand arithmetic") {
    MarketModel m1 = rademacher_model(1);
    std::vector<double> sc{1.0};
    CHECK(wealth(m1, 1.0, Strategy({0.0}), sc) == 1.0);

    MarketModel m2 = rademacher_model(2);
    std::vector<double> sc2{1.0, -1.0};
    CHECK(wealth(m2, 0.0, Strategy({1.0, 1.0}), sc2) == 0.0);

    MarketModel m3 = rademacher_model(1, {0.1});
    std::vector<double> sc3{-1.0};
    CHECK(wealth(m3, 2.0, Strategy({0.5}), sc3) == doctest::Approx(1.45));

    CHECK_THROWS_AS(wealth(m2, 0.0, Strategy({1.0, 1.0}), std::span<const double>(sc3)),
                    InputError);
}

TEST_CASE("wealth is affine in x (dyadic values, exact)") {
    MarketModel m = rademacher_model(2, {0.25, -0.5});
    Strategy h({0.5, 0.75});
    for (double e1 : {-1.0, 1.0}) {
        for (double e2 : {-1.0, 1.0}) {
            std::vector<double> sc{e1, e2};
            for (double x : {0.0, 1.5, -2.25}) {
                double delta = 0.25;
                CHECK(wealth(m, x + delta, h, sc) - wealth(m, x, h, sc) == delta);
            }
        }
    }
}

TEST_CASE("expect: constants, single factors and products") {
    MarketModel m = rademacher_model(2);
    CHECK(expect(m, kExact, 2, [](std::span<const double>) { return 3.25; }) == 3.25);
    CHECK(std::abs(expect(m, kExact, 1, [](std::span<const double> sc) { return sc[0]; })) <=
          1e-10);
    // two Rademacher factors: E eps1 eps2 = 0 by the 4-state enumeration
    CHECK(std::abs(expect(m, kExact, 2, [](std::span<const double> sc) {
              return sc[0] * sc[1];
          })) <= 1e-12);
}

TEST_CASE("expect enforces the product-state cap and points at monte carlo") {
    MarketModel m = rademacher_model(8);
    ExpectationBackend tiny = ExpectationBackend::exact(100);
    CHECK_THROWS_WITH_AS(expect(m, tiny, 8, [](std::span<const double>) { return 0.0; }),
                         doctest::Contains("monte_carlo"), InputError);
}

TEST_CASE("product states enumerate factor-major with exact probabilities") {
    MarketModel m({FactorDistribution({-1.0, 1.0}, {0.25, 0.75}, 1), three_point(2)},
                  DriftVector({0.0, 0.0}, 0.0));
    std::vector<double> first, second, probs;
    enumerate_product_states(m, 2, [&](std::uint64_t, std::span<const double> sc, double p) {
        first.push_back(sc[0]);
        second.push_back(sc[1]);
        probs.push_back(p);
    });
    REQUIRE(first.size() == 6);
    CHECK(first == std::vector<double>{-1, -1, -1, 1, 1, 1});
    CHECK(second == std::vector<double>{-2, 0, 2, -2, 0, 2});
    CHECK(probs[0] == 0.25 * 0.125);
    CHECK(probs[4] == 0.75 * 0.75);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact expectation is identical across 1, 2 and 8 threads") {
    MarketModel m = mixture6_model();
    auto f = [&](std::span<const double> sc) {
        double g = 0.0;
        for (std::size_t i = 0; i < 6; ++i) g += (0.3 + 0.1 * double(i)) * (sc[i] - m.b(i));
        return std::exp(-std::abs(g)) + g * g;
    };
    double v1 = expect(m, ExpectationBackend::exact(2'000'000, 1), 6, f);
    double v2 = expect(m, ExpectationBackend::exact(2'000'000, 2), 6, f);
    double v8 = expect(m, ExpectationBackend::exact(2'000'000, 8), 6, f);
    CHECK(v1 == v2);
    CHECK(v1 == v8);
}

TEST_CASE("monte carlo is deterministic, partition-free and agrees with exact") {
    MarketModel m = mixture6_model();
    Strategy h({0.4, -0.3, 0.2, 0.1, -0.2, 0.5});
    auto gain = [&](std::span<const double> sc) {
        double g = 0.0;
        for (std::size_t i = 0; i < 6; ++i) g += h.coords()[i] * (sc[i] - m.b(i));
        return g;
    };

    ExpectationBackend mc1 = ExpectationBackend::monte_carlo(200'000, 99, 1);
    ExpectationBackend mc8 = ExpectationBackend::monte_carlo(200'000, 99, 8);
    ExpectStats s1 = expect_with_stats(m, mc1, 6, gain);
    ExpectStats s8 = expect_with_stats(m, mc8, 6, gain);
    CHECK(s1.mean == s8.mean);

    double exact_mean = expect(m, kExact, 6, gain);
    CHECK(std::abs(s1.mean - exact_mean) <= 4.0 * s1.std_error);

    auto gain_sq = [&](std::span<const double> sc) {
        double g = gain(sc);
        return g * g;
    };
    ExpectStats sq = expect_with_stats(m, mc1, 6, gain_sq);
    double exact_sq = expect(m, kExact, 6, gain_sq);
    CHECK(std::abs(sq.mean - exact_sq) <= 4.0 * sq.std_error);
}

TEST_CASE("second moment bound: unit strategies under zero drift are isometric") {
    MarketModel m = rademacher_model(4);
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        Strategy h(rng.next_unit_vector(4));
        BoundCheck bc = second_moment_bound_check(m, h, kExact);
        CHECK(bc.lhs == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(bc.rhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(bc.ok);
    }
}

TEST_CASE("second moment bound: drifted single factor attains equality") {
    MarketModel m = rademacher_model(1, {0.5});
    BoundCheck bc = second_moment_bound_check(m, Strategy({1.0}), kExact);
    CHECK(bc.lhs == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(bc.rhs == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(bc.ok);
}

TEST_CASE("second moment bound: independence kills the cross term") {
    MarketModel m = rademacher_model(2);
    BoundCheck bc = second_moment_bound_check(m, Strategy({1.0, 1.0}), kExact);
    CHECK(bc.lhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bc.rhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(bc.ok);
}

TEST_CASE("second moment bound holds on the shipped models for seeded strategies") {
    for (const MarketModel& m : {mixture6_model(), asymmetric4_model(), mixture10_model()}) {
        Rng rng(2024);
        for (int t = 0; t < 1000; ++t) {
            std::vector<double> v = rng.next_unit_vector(static_cast<int>(m.n_max()));
            double scale = 0.1 + 5.0 * rng.next_u01();
            for (auto& c : v) c *= scale;
            BoundCheck bc = second_moment_bound_check(m, Strategy(v), kExact);
            CHECK(bc.ok);
        }
    }
}

TEST_CASE("moment ratio: normalized single coordinates and the pair case") {
    MarketModel m1 = rademacher_model(1);
    CHECK(moment_ratio_of(m1, Strategy({1.0}), 2.0, kExact) == doctest::Approx(1.0));
    CHECK(moment_ratio_of(m1, Strategy({1.0}), 3.0, kExact) == doctest::Approx(1.0));

    // (eps1+eps2)/sqrt(2) takes values {-sqrt 2, 0, sqrt 2} with probs
    // {1/4, 1/2, 1/4}; fourth moment = 8 * (1/4) / 4 = 2
    MarketModel m2 = rademacher_model(2);
    double inv = 1.0 / std::sqrt(2.0);
    CHECK(moment_ratio_of(m2, Strategy({inv, inv}), 4.0, kExact) ==
          doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(moment_ratio(m1, 1.5, 3, 1, kExact), InputError);
    CHECK(moment_ratio(m2, 2.0, 25, 7, kExact) <= 1.0 + 1e-10);  // gamma=2, b=0: isometry
}

TEST_CASE("returns_from_factors follows the two-case loading formula") {
    // m=1, single factor, bar_beta = 2
    MarketModel m1({FactorDistribution::rademacher(1)}, DriftVector({0.0}, 0.0),
                   Loadings(1, {2.0}, {}));
    std::vector<double> sc1{1.0};
    CHECK(returns_from_factors(m1, sc1)[0] == doctest::Approx(2.0));

    // m=1, second asset loads 1.0 on source 1 and 3.0 on its own source
    MarketModel m2(
        {FactorDistribution::rademacher(1), FactorDistribution::rademacher(2)},
        DriftVector({0.0, 0.0}, 0.0), Loadings(1, {1.0, 3.0}, {{1.0}}));
    std::vector<double> sc2{1.0, -1.0};
    auto r = returns_from_factors(m2, sc2);
    CHECK(r[1] == doctest::Approx(-2.0));

    // all eps at the drift: centered returns vanish
    MarketModel m3 = mixture6_model();
    std::vector<double> sc3(m3.n_max());
    for (std::size_t i = 0; i < m3.n_max(); ++i) sc3[i] = m3.b(i);
    for (double ri : returns_from_factors(m3, sc3)) CHECK(ri == doctest::Approx(0.0));

    MarketModel no_loadings = rademacher_model(2);
    std::vector<double> sc4{1.0, 1.0};
    CHECK_THROWS_AS(returns_from_factors(no_loadings, sc4), InputError);
}

TEST_CASE("asset_to_source: identity loadings, the worked 2-asset case, zero") {
    MarketModel ident(
        {FactorDistribution::rademacher(1), FactorDistribution::rademacher(2)},
        DriftVector({0.0, 0.0}, 0.0), Loadings(1, {1.0, 1.0}, {{0.0}}));
    auto h = asset_to_source(ident, {0.7, -0.4});
    CHECK(h.coords()[0] == doctest::Approx(0.7));
    CHECK(h.coords()[1] == doctest::Approx(-0.4));

    MarketModel m2(
        {FactorDistribution::rademacher(1), FactorDistribution::rademacher(2)},
        DriftVector({0.0, 0.0}, 0.0), Loadings(1, {1.0, 2.0}, {{0.5}}));
    auto h2 = asset_to_source(m2, {0.0, 1.0});
    CHECK(h2.coords()[0] == doctest::Approx(0.5));
    CHECK(h2.coords()[1] == doctest::Approx(2.0));

    auto h0 = asset_to_source(m2, {0.0, 0.0});
    CHECK(h0.norm() == 0.0);
}

TEST_CASE("asset_to_source round-trips and preserves portfolio value") {
    MarketModel m = mixture6_model();
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a(6);
        for (auto& v : a) v = 2.0 * rng.next_u01() - 1.0;
        Strategy h = asset_to_source(m, a);
        std::vector<double> back = source_to_asset(m, h);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(back[i] == doctest::Approx(a[i]).epsilon(1e-12));

        // portfolio value in assets equals <h, eps - b>, identically
        std::vector<double> sc(6);
        for (auto& v : sc) v = rng.next_u01() * 4.0 - 2.0;
        auto r = returns_from_factors(m, sc);
        double via_assets = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) via_assets += a[i] * r[i];
        double via_sources = wealth(m, 0.0, h, sc);
        CHECK(via_assets == doctest::Approx(via_sources).epsilon(1e-12));
    }
}

TEST_CASE("structural errors: drift length, empty markets, zero-sample MC") {
    std::vector<FactorDistribution> f{FactorDistribution::rademacher(1)};
    CHECK_THROWS_AS(MarketModel(f, DriftVector({0.0, 0.0}, 0.0)), InputError);
    CHECK_THROWS_AS(MarketModel({}, DriftVector({}, 0.0)), InputError);

    MarketModel m = rademacher_model(2);
    ExpectationBackend empty_mc = ExpectationBackend::monte_carlo(0, 1);
    CHECK_THROWS_AS(expect(m, empty_mc, 2, [](std::span<const double>) { return 1.0; }),
                    InputError);
    CHECK_THROWS_AS(moment_ratio_of(m, Strategy({0.0, 0.0}), 2.0, kExact), InputError);
}
