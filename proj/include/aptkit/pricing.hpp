#pragma once

#include <vector>

#include "aptkit/optimizer.hpp"

namespace aptkit {

struct PriceResult {
    int n = 0;
    bool is_reference = false;  // solved at the model truncation
    double p = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double residual = 0.0;  // u_n(G, x+p) - u_n(0, x)
    int iterations = 0;     // segment solves spent
};

struct PriceOptions {
    double wealth_tol = 1e-8;  // bisection interval target on p
    double price_tol = 1e-7;   // residual target relative to max(1, |u_n(0,x)|)
    OptimizeOptions opt;
};

// Reservation price of the claim in segment n: the root of
// u_n(G, x + p) = u_n(0, x), found by bracketing bisection. Evaluations
// along the bracket are checked to be increasing in p and the solver
// fails loudly otherwise.
PriceResult reservation_price(const MarketModel& model, const Utility& u,
                              const ExpectationBackend& backend, int n, double x,
                              const Claim& claim, const StrategyBound& bound,
                              const PriceOptions& options = {});

struct PriceConvergence {
    std::vector<PriceResult> per_segment;
    PriceResult reference;
    bool tail_ok = false;   // |p_n - p_ref| non-increasing on the grid tail
    bool final_ok = false;  // final gap below tolerance
    double final_gap = 0.0;
};

struct PriceConvergenceOptions {
    PriceOptions price;
    double tail_slack = 1e-6;
    double final_gap_tol = 1e-5;
};

PriceConvergence price_convergence(const MarketModel& model, const Utility& u,
                                   const ExpectationBackend& backend, double x, const Claim& claim,
                                   const std::vector<int>& n_grid, const StrategyBound& bound,
                                   const PriceConvergenceOptions& options = {});

}  // namespace aptkit
