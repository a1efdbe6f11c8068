#include "aptkit/claim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aptkit/errors.hpp"
#include "aptkit/expectation.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

Claim::Claim(int k, std::function<double(std::span<const double>)> f, std::string desc)
    : depends_on_(k), payoff_(std::move(f)), description_(std::move(desc)) {
    if (k < 0) throw InputError("claim: depends_on must be >= 0");
    if (!payoff_) throw InputError("claim: payoff function must be callable");
}

double Claim::payoff(std::span<const double> scenario) const {
    if (scenario.size() < static_cast<std::size_t>(depends_on_))
        throw InputError("claim: scenario shorter than the claim's factor dependence");
    return payoff_(scenario);
}

Claim Claim::zero() {
    return Claim(0, [](std::span<const double>) { return 0.0; }, "G = 0");
}

Claim Claim::constant(double c) {
    if (c < 0.0) throw InputError("claim: constant payoff must be >= 0");
    return Claim(0, [c](std::span<const double>) { return c; },
                 "G = " + real_to_string(c));
}

Claim Claim::call_on_factor(int factor_index, double strike) {
    if (factor_index < 1) throw InputError("claim: factor_index must be >= 1");
    std::size_t slot = static_cast<std::size_t>(factor_index - 1);
    return Claim(factor_index,
                 [slot, strike](std::span<const double> sc) {
                     return std::max(sc[slot] - strike, 0.0);
                 },
                 "G = max(eps_" + std::to_string(factor_index) + " - " + real_to_string(strike) +
                     ", 0)");
}

Claim Claim::linear(double c, std::vector<double> g, const DriftVector& drift) {
    int k = static_cast<int>(g.size());
    std::vector<double> b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) b[i] = drift.at(i);
    return Claim(k,
                 [c, g = std::move(g), b = std::move(b)](std::span<const double> sc) {
                     double v = c;
                     for (std::size_t i = 0; i < g.size(); ++i) v += g[i] * (sc[i] - b[i]);
                     return v;
                 },
                 "G = " + real_to_string(c) + " + <g, eps-b>");
}

Claim Claim::table(const MarketModel& model, int depends_on, std::vector<double> values) {
    if (depends_on < 1 || static_cast<std::size_t>(depends_on) > model.n_max())
        throw InputError("claim: table depends_on out of range");
    std::uint64_t states = model.product_state_count(static_cast<std::size_t>(depends_on),
                                                     std::numeric_limits<std::uint64_t>::max() / 2);
    if (values.size() != states)
        throw InputError("claim: table needs exactly " + std::to_string(states) +
                         " values (product states of the first " + std::to_string(depends_on) +
                         " factors)");
    // Support arrays are captured so a scenario can be mapped back to its
    // state index; scenario values come from these arrays bit-exactly.
    auto supports = std::make_shared<std::vector<std::vector<double>>>();
    supports->reserve(static_cast<std::size_t>(depends_on));
    for (int i = 0; i < depends_on; ++i) supports->push_back(model.factor(i).support());
    return Claim(depends_on,
                 [supports, values = std::move(values)](std::span<const double> sc) {
                     std::uint64_t state = 0;
                     for (std::size_t i = 0; i < supports->size(); ++i) {
                         const auto& sup = (*supports)[i];
                         std::size_t pos = sup.size();
                         for (std::size_t k = 0; k < sup.size(); ++k)
                             if (sup[k] == sc[i]) {
                                 pos = k;
                                 break;
                             }
                         if (pos == sup.size())
                             throw InputError(
                                 "claim: scenario value not found in the factor support "
                                 "(table claims require the originating model)");
                         state = state * sup.size() + pos;
                     }
                     return values[state];
                 },
                 "G = table over " + std::to_string(depends_on) + " factor(s)");
}

Claim Claim::from_payoff(int depends_on, std::function<double(std::span<const double>)> payoff,
                         std::string description) {
    return Claim(depends_on, std::move(payoff), std::move(description));
}

Claim Claim::plus(double c) const {
    if (c < 0.0) throw InputError("claim: shift must be >= 0 to keep the payoff nonnegative");
    auto f = payoff_;
    return Claim(depends_on_, [f, c](std::span<const double> sc) { return f(sc) + c; },
                 description_ + " + " + real_to_string(c));
}

ClaimRange claim_range(const MarketModel& model, const Claim& claim) {
    ClaimRange r;
    r.min_payoff = std::numeric_limits<double>::infinity();
    r.max_payoff = -std::numeric_limits<double>::infinity();
    enumerate_product_states(model, static_cast<std::size_t>(claim.depends_on()),
                             [&](std::uint64_t, std::span<const double> sc, double) {
                                 double v = claim.payoff(sc);
                                 r.min_payoff = std::min(r.min_payoff, v);
                                 r.max_payoff = std::max(r.max_payoff, v);
                             });
    return r;
}

void require_nonnegative(const MarketModel& model, const Claim& claim) {
    ClaimRange r = claim_range(model, claim);
    if (!(r.min_payoff >= -1e-12))
        throw InputError("claim: payoff takes the negative value " +
                         real_to_string(r.min_payoff) + " (" + claim.description() + ")");
}

}  // namespace aptkit
