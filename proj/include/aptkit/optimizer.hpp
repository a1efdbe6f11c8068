#pragma once

#include <optional>
#include <vector>

#include "aptkit/arbitrage.hpp"
#include "aptkit/claim.hpp"
#include "aptkit/expectation.hpp"
#include "aptkit/market.hpp"
#include "aptkit/utility.hpp"

namespace aptkit {

// Radius beyond which not trading beats any strategy, with its three
// components and the constants that produced it.
struct StrategyBound {
    double M = 0.0;
    double term_growth = 0.0;  // ^(1/beta) term
    double term_slope = 0.0;   // ^(1/(beta-1)) term
    double kinematic = 0.0;    // max((x - x0)/alpha_bar, |x|/alpha_bar)

    struct Echo {
        double alpha_large = 0.0;
        int n_alpha = 0;
        double alpha_bar = 0.0;
        double alpha_n_alpha = 0.0;
        double eu_x_minus_g = 0.0;  // E U(x - G)
    } echo;

    static StrategyBound manual(double M);
};

StrategyBound strategy_bound(const MarketModel& model, const Utility& u, const NAConstants& na,
                             double x, const Claim& claim, const ExpectationBackend& backend);

struct OptimizeOptions {
    double tol = 1e-8;  // projected-gradient norm target
    int max_iterations = 100000;
    double armijo = 1e-4;
    double shrink = 0.5;
    std::optional<Strategy> warm_start;
};

struct OptimizationResult {
    Strategy h_star;
    double value = 0.0;
    double grad_norm = 0.0;  // projected gradient norm at exit
    int iterations = 0;
    bool active_bound = false;  // |h*| within 1e-6 of M
    bool converged = false;
};

// Maximizes E U(x + <h,eps-b> - G) over |h| <= M in the first n
// coordinates by projected gradient ascent with Armijo backtracking.
OptimizationResult maximize_segment(const MarketModel& model, const Utility& u,
                                    const ExpectationBackend& backend, int n, double x,
                                    const Claim& claim, const StrategyBound& bound,
                                    const OptimizeOptions& options = {});

// Running averages: result k is (1/k) * sum of the first k optimizers,
// zero-padded to the longest support.
std::vector<Strategy> cesaro(const std::vector<OptimizationResult>& results);

struct ConvergenceOptions {
    OptimizeOptions opt;
    double strategy_tol = 1e-4;    // final Cesaro distance target
    double monotone_slack = 1e-9;  // slack for the non-decreasing check
    // solve segments concurrently from cold starts instead of chaining
    // warm starts; for strictly concave utilities the optima agree
    bool parallel_cold_start = false;
};

struct ConvergenceReport {
    std::vector<int> n_grid;
    std::vector<double> u_seq;
    std::vector<double> grad_norms;
    std::vector<double> h_norms;
    std::vector<double> cesaro_dist;  // |ĥ_k - h*_ref|
    double u_ref = 0.0;               // value at n_max
    Strategy h_ref;
    bool monotone_ok = false;
    bool converged_ok = false;
    std::vector<OptimizationResult> results;
};

// Solves the segment problems along n_grid (warm-starting each from the
// previous optimizer), the reference problem at n_max, and the Cesaro
// averages taken along the grid sequence.
ConvergenceReport convergence_run(const MarketModel& model, const Utility& u,
                                  const ExpectationBackend& backend, double x, const Claim& claim,
                                  const std::vector<int>& n_grid, const StrategyBound& bound,
                                  const ConvergenceOptions& options = {});

// Objective/gradient of one segment problem; exposed for gradient checks
// and oracle comparisons.
double segment_objective(const MarketModel& model, const Utility& u,
                         const ExpectationBackend& backend, double x, const Claim& claim,
                         const Strategy& h);
std::vector<double> segment_gradient(const MarketModel& model, const Utility& u,
                                     const ExpectationBackend& backend, int n, double x,
                                     const Claim& claim, const Strategy& h);

}  // namespace aptkit
