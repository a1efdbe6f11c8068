#include "aptkit/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "aptkit/errors.hpp"

namespace aptkit {

namespace {

// Evaluates p -> u_n(G, x + p), warm-starting each solve from the optimizer
// of the nearest previously evaluated p, and checks that evaluations are
// increasing in p, which monotonicity of the utility guarantees.
class ValueCurve {
public:
    ValueCurve(const MarketModel& model, const Utility& u, const ExpectationBackend& backend,
               int n, double x, const Claim& claim, const StrategyBound& bound,
               const OptimizeOptions& opt)
        : model_(model), u_(u), backend_(backend), n_(n), x_(x), claim_(claim), bound_(bound),
          opt_(opt) {}

    double at(double p) {
        auto hit = cache_.find(p);
        if (hit != cache_.end()) return hit->second.value;

        OptimizeOptions opt = opt_;
        if (!cache_.empty()) {
            auto up = cache_.upper_bound(p);
            if (up == cache_.end()) {
                opt.warm_start = std::prev(up)->second.h;
            } else if (up == cache_.begin()) {
                opt.warm_start = up->second.h;
            } else {
                auto lo = std::prev(up);
                opt.warm_start = (p - lo->first <= up->first - p) ? lo->second.h : up->second.h;
            }
        }
        OptimizationResult r =
            maximize_segment(model_, u_, backend_, n_, x_ + p, claim_, bound_, opt);
        ++solves_;
        cache_[p] = {r.value, r.h_star};

        // strict increase along the bracket, up to solver noise
        auto it = cache_.find(p);
        double scale = std::max(1.0, std::abs(r.value));
        if (it != cache_.begin() && std::prev(it)->second.value > r.value + 1e-10 * scale)
            throw SolverError("pricing.reservation_price: segment value decreased in wealth "
                              "along the bracket");
        auto nx = std::next(it);
        if (nx != cache_.end() && r.value > nx->second.value + 1e-10 * scale)
            throw SolverError("pricing.reservation_price: segment value decreased in wealth "
                              "along the bracket");
        return r.value;
    }

    int solves() const { return solves_; }

private:
    struct Entry {
        double value;
        Strategy h;
    };
    const MarketModel& model_;
    const Utility& u_;
    const ExpectationBackend& backend_;
    int n_;
    double x_;
    const Claim& claim_;
    const StrategyBound& bound_;
    OptimizeOptions opt_;
    std::map<double, Entry> cache_;
    int solves_ = 0;
};

}  // namespace

PriceResult reservation_price(const MarketModel& model, const Utility& u,
                              const ExpectationBackend& backend, int n, double x,
                              const Claim& claim, const StrategyBound& bound,
                              const PriceOptions& options) {
    // target: value of the no-claim problem at the same wealth
    OptimizationResult base =
        maximize_segment(model, u, backend, n, x, Claim::zero(), bound, options.opt);
    double target = base.value;
    double target_scale = std::max(1.0, std::abs(target));

    ValueCurve curve(model, u, backend, n, x, claim, bound, options.opt);

    PriceResult out;
    out.n = n;
    out.is_reference = (static_cast<std::size_t>(n) == model.n_max());

    double lo = 0.0;
    double f_lo = curve.at(lo) - target;
    if (std::abs(f_lo) <= options.price_tol * target_scale) {
        out.p = lo;
        out.lo = out.hi = lo;
        out.residual = f_lo;
        out.iterations = curve.solves() + 1;
        return out;
    }
    if (f_lo > 0.0)
        throw SolverError("pricing.reservation_price: u_n(G, x) exceeds u_n(0, x) for a "
                          "nonnegative claim; model and claim are inconsistent");

    double hi = std::max(1.0, claim_range(model, claim).max_payoff);
    double f_hi = curve.at(hi) - target;
    int doublings = 0;
    while (f_hi < 0.0) {
        if (++doublings > 60)
            throw SolverError("pricing.reservation_price: bracket expansion exceeded 2^60; "
                              "claim incompatible with the model");
        hi *= 2.0;
        f_hi = curve.at(hi) - target;
    }

    for (int iter = 0; iter < 200; ++iter) {
        bool interval_ok = hi - lo <= options.wealth_tol;
        bool residual_ok =
            std::min(std::abs(f_lo), std::abs(f_hi)) <= options.price_tol * target_scale;
        if (interval_ok && residual_ok) break;
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval at floating-point resolution
        double f_mid = curve.at(mid) - target;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    double p = (std::abs(f_lo) <= std::abs(f_hi)) ? lo : hi;
    out.p = p;
    out.lo = lo;
    out.hi = hi;
    out.residual = (p == lo) ? f_lo : f_hi;
    out.iterations = curve.solves() + 1;
    if (std::abs(out.residual) > options.price_tol * target_scale)
        throw SolverError("pricing.reservation_price: residual " +
                          std::to_string(out.residual) + " above tolerance after bisection");
    return out;
}

PriceConvergence price_convergence(const MarketModel& model, const Utility& u,
                                   const ExpectationBackend& backend, double x, const Claim& claim,
                                   const std::vector<int>& n_grid, const StrategyBound& bound,
                                   const PriceConvergenceOptions& options) {
    if (n_grid.empty()) throw InputError("pricing.price_convergence: empty segment grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw InputError("pricing.price_convergence: segment grid must be increasing");
    int n_max = static_cast<int>(model.n_max());
    if (n_grid.back() > n_max)
        throw InputError("pricing.price_convergence: grid exceeds the model truncation");

    PriceConvergence out;
    for (int n : n_grid)
        out.per_segment.push_back(
            reservation_price(model, u, backend, n, x, claim, bound, options.price));

    if (n_grid.back() == n_max) {
        out.reference = out.per_segment.back();
        out.reference.is_reference = true;
    } else {
        out.reference =
            reservation_price(model, u, backend, n_max, x, claim, bound, options.price);
    }

    // gaps to the reference; tail = second half of the grid
    std::vector<double> gaps;
    gaps.reserve(out.per_segment.size());
    for (const auto& r : out.per_segment) gaps.push_back(std::abs(r.p - out.reference.p));
    out.tail_ok = true;
    for (std::size_t i = gaps.size() / 2; i + 1 < gaps.size(); ++i)
        if (gaps[i + 1] > gaps[i] + options.tail_slack) out.tail_ok = false;
    out.final_gap = gaps.back();
    out.final_ok = out.final_gap <= options.final_gap_tol;
    return out;
}

}  // namespace aptkit
