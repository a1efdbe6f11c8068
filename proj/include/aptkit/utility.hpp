#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aptkit/expectation.hpp"
#include "aptkit/market.hpp"

namespace aptkit {

class Claim;

// Certified growth constants: |U(x)| >= c1 |x|^beta - c2 left of x0, and
// U^-(x) <= c3 |x|^gamma + c4 everywhere, gamma >= min(beta, 2).
struct GrowthConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double beta = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double gamma = 0.0;
};

// Concave strictly increasing utility, normalized so U(x0) = 0 and
// U'(x0) = 1. Value type, immutable, shareable.
class Utility {
public:
    // Power-type branch on each side of x0: U(x0+y) = ((1+y)^{1-a} - 1)/(1-a)
    // for y >= 0 and -((1-y)^beta - 1)/beta for y < 0. Normalized at x0 by
    // construction; growth constants fitted automatically.
    static Utility two_sided_power(double a, double beta, double x0 = 0.0);

    // Piecewise-linear concave utility for adversarial tests. Derivative is
    // the right-hand slope. Carries no growth constants: it lacks the
    // superlinear left tail the strategy bound needs.
    static Utility piecewise_linear(std::vector<double> xs, std::vector<double> ys);

    double value(double x) const;
    double deriv(double x) const;
    double x0() const { return x0_; }

    bool has_constants() const { return constants_.has_value(); }
    const GrowthConstants& constants() const;
    void set_constants(GrowthConstants c) { constants_ = c; }

    bool strictly_concave() const;

    // a * U + b with a > 0; denormalizes (raw input for normalize()).
    Utility affine(double a, double b) const;

    std::string describe() const;

private:
    struct TwoSidedPower {
        double a;
        double beta;
        double anchor;  // kink location; fixed once constructed
    };
    struct PiecewiseLinear {
        std::vector<double> xs;
        std::vector<double> ys;
        std::vector<double> slopes;
    };

    Utility() = default;
    double base_value(double x) const;
    double base_deriv(double x) const;

    std::variant<TwoSidedPower, PiecewiseLinear> base_;
    double x0_ = 0.0;
    double out_scale_ = 1.0;  // value = out_scale * base(x) + out_shift
    double out_shift_ = 0.0;
    std::optional<GrowthConstants> constants_;

    friend Utility normalize(const Utility& raw, double x0);
};

// V(x) = (U(x) - U(x0)) / U'(x0), with constants rescaled accordingly.
// Idempotent on already-normalized utilities.
Utility normalize(const Utility& raw, double x0);

// Grid diagnostics for the utility contract: concavity, strict increase,
// normalization at x0, and both growth inequalities on log-spaced grids.
struct UtilityCheck {
    bool concave_ok = false;
    bool increasing_ok = false;
    bool normalized_ok = false;
    bool lower_growth_ok = false;  // |U| >= c1 |x|^beta - c2 on [x0 - 1e6, x0]
    bool upper_growth_ok = false;  // U^- <= c3 |x|^gamma + c4 on [-1e6, 1e6]
    double max_lower_violation = 0.0;
    double max_upper_violation = 0.0;
    bool pass = false;
};
UtilityCheck check_utility(const Utility& u, std::uint64_t seed = 7);

// Fits additive constants on the assumption grids: c2 and c4 become the
// max observed violation plus a margin, keeping c1, c3, beta, gamma.
GrowthConstants fit_growth_constants(const Utility& u, double c1, double beta, double c3,
                                     double gamma);

// Scenario-wise check of the positive-part bound
// U^+(x + <h,eps-b> - G) <= |x0| + |x + <h,eps-b>| under the exact law.
struct UPlusBoundCheck {
    double lhs = 0.0;  // E U^+(x + <h,eps-b> - G)
    double rhs = 0.0;  // E (|x0| + |x + <h,eps-b>|)
    bool ok = false;   // inequality held in every scenario
};
UPlusBoundCheck uplus_bound_check(const Utility& u, const MarketModel& model, double x,
                                  const Strategy& h, const Claim& claim);

}  // namespace aptkit
