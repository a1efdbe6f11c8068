#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aptkit/expectation.hpp"
#include "aptkit/market.hpp"

namespace aptkit {

// Per-factor normalization diagnostics (mean 0, variance 1, probs sum 1,
// at least two distinct points).
struct FactorCheck {
    int index = 0;
    double prob_sum = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    bool distinct_ok = false;
    bool pass = false;
};

// Two-sided support around the drift: P(eps_i > b_i) > 0 and
// P(eps_i < b_i) > 0.
struct SupportCheck {
    int index = 0;
    double prob_above = 0.0;
    double prob_below = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<FactorCheck> factor_moments;
    std::vector<SupportCheck> two_sided_support;
    double drift_norm = 0.0;      // full l2 norm including the declared tail
    bool drift_summable = false;  // finite norm
    double sup_third_moment = 0.0;
    bool third_moments_ok = false;
    bool pass = false;

    std::string summary() const;
};

// Checks the model assumptions at the discrete level. Diagnostic: failures
// are reported, never thrown.
ValidationReport validate_model(const MarketModel& model);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

// Second-moment bound: E<h,eps-b>^2 <= (1 + |b|^2) |h|^2, with the full
// drift norm including the declared tail on the right-hand side.
BoundCheck second_moment_bound_check(const MarketModel& model, const Strategy& h,
                                     const ExpectationBackend& backend);

// E|<h,eps-b>|^gamma / (|h|^gamma (1 + |b|^gamma)) for one strategy.
double moment_ratio_of(const MarketModel& model, const Strategy& h, double gamma,
                       const ExpectationBackend& backend);

// Empirical lower estimate of the best moment constant: max over seeded
// unit strategies of the ratio above. Diagnostic, not a verdict; a finite
// constant exists but no sharp value is known.
double moment_ratio(const MarketModel& model, double gamma, int trials, std::uint64_t seed,
                    const ExpectationBackend& backend);

}  // namespace aptkit
