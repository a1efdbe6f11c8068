#include <doctest.h>

#include <cmath>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

using namespace aptkit;

TEST_CASE("compensated sum recovers cancelled mass") {
    CompensatedSum acc;
    acc.add(1e16);
    for (int i = 0; i < 10; ++i) acc.add(1.0);
    acc.add(-1e16);
    CHECK(acc.value() == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("decimal strings round-trip doubles exactly") {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, -0.0, 2e306}) {
        CHECK(real_from_string(real_to_string(v)) == v);
    }
    CHECK(real_from_string("1.25e-3") == 0.00125);
    CHECK(real_from_string("+0.5") == 0.5);
    CHECK_THROWS_AS(real_from_string("0.5x"), InputError);
    CHECK_THROWS_AS(real_from_string(""), InputError);
}

TEST_CASE("inverse normal CDF hits known quantiles") {
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963985).epsilon(1e-6));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963985).epsilon(1e-6));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), InputError);
}

TEST_CASE("counter-based uniforms are deterministic and partition-free") {
    double a = counter_u01(42, 7, 3);
    double b = counter_u01(42, 7, 3);
    CHECK(a == b);
    CHECK(a >= 0.0);
    CHECK(a < 1.0);
    CHECK(counter_u01(42, 7, 4) != a);
    CHECK(counter_u01(43, 7, 3) != a);
}

TEST_CASE("unit vectors have unit norm") {
    Rng rng(11);
    for (int n : {1, 2, 5, 12}) {
        auto v = rng.next_unit_vector(n);
        CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
}
