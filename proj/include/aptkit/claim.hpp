#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aptkit/market.hpp"

namespace aptkit {

// Nonnegative payoff depending on the first `depends_on` factors.
class Claim {
public:
    static Claim zero();
    static Claim constant(double c);
    // max(eps_index - strike, 0); factor_index is 1-based.
    static Claim call_on_factor(int factor_index, double strike);
    // c + sum_i g_i (eps_i - b_i); caller must ensure nonnegativity.
    static Claim linear(double c, std::vector<double> g, const DriftVector& drift);
    // Payoff per product state of the first k factors of `model`, in
    // canonical enumeration order.
    static Claim table(const MarketModel& model, int depends_on, std::vector<double> values);
    static Claim from_payoff(int depends_on,
                             std::function<double(std::span<const double>)> payoff,
                             std::string description);

    int depends_on() const { return depends_on_; }
    double payoff(std::span<const double> scenario) const;
    const std::string& description() const { return description_; }

    // G + c (c >= 0 keeps nonnegativity).
    Claim plus(double c) const;

private:
    Claim(int k, std::function<double(std::span<const double>)> f, std::string desc);

    int depends_on_ = 0;
    std::function<double(std::span<const double>)> payoff_;
    std::string description_;
};

// Enumerates the claim's factor slice and reports the payoff range;
// min_payoff < 0 marks a contract violation.
struct ClaimRange {
    double min_payoff = 0.0;
    double max_payoff = 0.0;
};
ClaimRange claim_range(const MarketModel& model, const Claim& claim);

// Throws InputError if the claim takes a negative value on some scenario.
void require_nonnegative(const MarketModel& model, const Claim& claim);

}  // namespace aptkit
