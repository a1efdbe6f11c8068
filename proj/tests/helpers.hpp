#pragma once

#include <vector>

#include "aptkit/claim.hpp"
#include "aptkit/market.hpp"
#include "aptkit/utility.hpp"

namespace aptkit::testing {

// Mean-zero unit-variance two-point law {-a, 1/a} with probs
// {1/(1+a^2), a^2/(1+a^2)}.
inline FactorDistribution skewed_two_point(double a, int index) {
    double p = 1.0 / (1.0 + a * a);
    return FactorDistribution({-a, 1.0 / a}, {p, 1.0 - p}, index);
}

// {-2, 0, 2} with probs {1/8, 3/4, 1/8}: mean 0, variance 1.
inline FactorDistribution three_point(int index) {
    return FactorDistribution({-2.0, 0.0, 2.0}, {0.125, 0.75, 0.125}, index);
}

inline MarketModel rademacher_model(int n, std::vector<double> drift_head = {},
                                    double tail_norm_sq = 0.0) {
    std::vector<FactorDistribution> factors;
    for (int i = 1; i <= n; ++i) factors.push_back(FactorDistribution::rademacher(i));
    if (drift_head.empty()) drift_head.assign(static_cast<std::size_t>(n), 0.0);
    return MarketModel(std::move(factors), DriftVector(std::move(drift_head), tail_norm_sq));
}

// The shipped 6-factor mixture: Rademacher and skewed two-point laws plus
// one three-point law, drift in every coordinate, loadings with m = 2.
inline MarketModel mixture6_model() {
    std::vector<FactorDistribution> factors;
    factors.push_back(FactorDistribution::rademacher(1));
    factors.push_back(FactorDistribution::rademacher(2));
    factors.push_back(skewed_two_point(2.0, 3));
    factors.push_back(skewed_two_point(0.5, 4));
    factors.push_back(three_point(5));
    factors.push_back(FactorDistribution::rademacher(6));
    DriftVector drift({0.2, -0.1, 0.15, 0.0, 0.05, -0.05}, 0.0);
    Loadings loadings(2, {1.0, 1.0, 2.0, 1.5, 1.0, 0.5},
                      {{0.5, 0.0}, {0.1, 0.2}, {0.0, 0.3}, {0.25, -0.1}});
    return MarketModel(std::move(factors), std::move(drift), std::move(loadings));
}

// The shipped 10-factor study model: drift concentrated in the first five
// coordinates, one three-point law among the first three.
inline MarketModel mixture10_model() {
    std::vector<FactorDistribution> factors;
    factors.push_back(FactorDistribution::rademacher(1));
    factors.push_back(FactorDistribution::rademacher(2));
    factors.push_back(three_point(3));
    for (int i = 4; i <= 10; ++i) factors.push_back(FactorDistribution::rademacher(i));
    DriftVector drift({0.15, 0.12, 0.1, 0.08, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0}, 0.0);
    return MarketModel(std::move(factors), std::move(drift));
}

// The shipped 4-factor asymmetric model with a declared drift tail.
inline MarketModel asymmetric4_model() {
    std::vector<FactorDistribution> factors;
    factors.push_back(skewed_two_point(2.0, 1));
    factors.push_back(skewed_two_point(0.5, 2));
    factors.push_back(three_point(3));
    factors.push_back(FactorDistribution::rademacher(4));
    DriftVector drift({0.1, -0.08, 0.12, 0.06}, 0.0004);
    return MarketModel(std::move(factors), std::move(drift));
}

inline Utility utility_a() { return Utility::two_sided_power(0.5, 2.0); }
inline Utility utility_b() { return Utility::two_sided_power(0.3, 3.0); }

}  // namespace aptkit::testing
