#include "aptkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

namespace {
constexpr double kProbSumTol = 1e-12;
constexpr double kMomentTol = 1e-10;
}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "factor moments: ";
    int fails = 0;
    for (const auto& f : factor_moments)
        if (!f.pass) ++fails;
    os << (fails == 0 ? "ok" : std::to_string(fails) + " factor(s) failed");
    os << "; two-sided support: ";
    fails = 0;
    for (const auto& s : two_sided_support)
        if (!s.pass) ++fails;
    os << (fails == 0 ? "ok" : std::to_string(fails) + " factor(s) one-sided");
    os << "; drift norm = " << drift_norm;
    os << "; sup E|eps|^3 = " << sup_third_moment;
    os << "; overall: " << (pass ? "pass" : "FAIL");
    return os.str();
}

ValidationReport validate_model(const MarketModel& model) {
    ValidationReport rep;
    rep.factor_moments.reserve(model.n_max());
    rep.two_sided_support.reserve(model.n_max());

    double sup3 = 0.0;
    bool all = true;
    for (std::size_t i = 0; i < model.n_max(); ++i) {
        const FactorDistribution& f = model.factor(i);
        FactorCheck fc;
        fc.index = f.index();
        fc.prob_sum = 0.0;
        for (double p : f.probs()) fc.prob_sum += p;
        fc.mean = f.mean();
        fc.variance = f.variance();
        auto sorted = f.support();
        std::sort(sorted.begin(), sorted.end());
        fc.distinct_ok = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() &&
                         sorted.size() >= 2;
        fc.pass = std::abs(fc.prob_sum - 1.0) <= kProbSumTol && std::abs(fc.mean) <= kMomentTol &&
                  std::abs(fc.variance - 1.0) <= kMomentTol && fc.distinct_ok;
        all = all && fc.pass;
        rep.factor_moments.push_back(fc);

        SupportCheck sc;
        sc.index = f.index();
        sc.prob_above = f.prob_above(model.b(i));
        sc.prob_below = f.prob_below(model.b(i));
        sc.pass = sc.prob_above > 0.0 && sc.prob_below > 0.0;
        all = all && sc.pass;
        rep.two_sided_support.push_back(sc);

        sup3 = std::max(sup3, f.abs_moment(3.0));
    }

    rep.drift_norm = model.drift().norm_total();
    rep.drift_summable = std::isfinite(rep.drift_norm);
    rep.sup_third_moment = sup3;
    rep.third_moments_ok = std::isfinite(sup3);
    rep.pass = all && rep.drift_summable && rep.third_moments_ok;
    return rep;
}

BoundCheck second_moment_bound_check(const MarketModel& model, const Strategy& h,
                                     const ExpectationBackend& backend) {
    BoundCheck out;
    std::size_t k = h.support_size();
    out.lhs = expect(model, backend, k, [&](std::span<const double> sc) {
        double g = 0.0;
        for (std::size_t i = 0; i < k; ++i) g += h.coords()[i] * (sc[i] - model.b(i));
        return g * g;
    });
    out.rhs = (1.0 + model.drift().norm_sq_total()) * h.norm_sq();
    out.ok = out.lhs <= out.rhs + 1e-9;
    return out;
}

double moment_ratio_of(const MarketModel& model, const Strategy& h, double gamma,
                       const ExpectationBackend& backend) {
    if (gamma < 2.0) throw InputError("market.moment_ratio: gamma must be >= 2");
    if (!(h.norm() > 0.0)) throw InputError("market.moment_ratio: strategy must be nonzero");
    std::size_t k = h.support_size();
    double num = expect(model, backend, k, [&](std::span<const double> sc) {
        double g = 0.0;
        for (std::size_t i = 0; i < k; ++i) g += h.coords()[i] * (sc[i] - model.b(i));
        return std::pow(std::abs(g), gamma);
    });
    double denom =
        std::pow(h.norm(), gamma) * (1.0 + std::pow(model.drift().norm_total(), gamma));
    return num / denom;
}

double moment_ratio(const MarketModel& model, double gamma, int trials, std::uint64_t seed,
                    const ExpectationBackend& backend) {
    if (gamma < 2.0) throw InputError("market.moment_ratio: gamma must be >= 2");
    if (trials < 1) throw InputError("market.moment_ratio: trials must be >= 1");
    for (std::size_t i = 0; i < model.n_max(); ++i) {
        if (!std::isfinite(model.factor(i).abs_moment(gamma)))
            throw InputError("market.moment_ratio: factor " + std::to_string(i + 1) +
                             " has a non-finite moment of order gamma");
    }
    Rng rng(seed);
    std::size_t n = model.n_max();
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        Strategy h(rng.next_unit_vector(static_cast<int>(n)));
        best = std::max(best, moment_ratio_of(model, h, gamma, backend));
    }
    return best;
}

}  // namespace aptkit
