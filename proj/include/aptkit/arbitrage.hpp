#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "aptkit/market.hpp"

namespace aptkit {

// One atom of the loss distribution <h, eps-b> restricted to a segment.
struct LossAtom {
    double value = 0.0;
    double prob = 0.0;
};

// Atoms sorted ascending, equal values merged. drift_free drops b.
std::vector<LossAtom> loss_distribution(const MarketModel& model, const Strategy& h, int n,
                                        bool drift_free = false);

// q(h) = sup{ alpha in (0,1) : P(<h,eps-b> < -alpha) > alpha }, computed
// exactly by scanning the sorted atom list. Zero when no loss is possible
// (an arbitrage direction).
double loss_quantile_alpha(const MarketModel& model, const Strategy& h, int n,
                           bool drift_free = false);

// Search budget for the unit-sphere infimum of q.
struct NaBudget {
    int starts = 64;         // projected-descent multistarts
    int grid_points = 4096;  // deterministic low-discrepancy sphere grid
    int max_grid_dim = 6;    // grid only for n <= this
    std::uint64_t seed = 20240601;
    double safety = 1e-3;  // certified alpha = (1 - safety) * inf q
};

struct SegmentNa {
    int n = 0;
    double alpha = 0.0;  // certified constant in (0,1)
    double q_min = 0.0;  // smallest q found on the sphere
    Strategy minimizer;
};

// Certifies alpha_n for the first n sources: every unit-norm strategy
// loses more than alpha_n with probability above alpha_n. Throws
// ArbitrageError with a witness when the segment admits arbitrage.
// `warm` seeds the search with a previous segment's minimizer, which also
// makes certified constants non-increasing across nested segments.
SegmentNa na_constant_segment(const MarketModel& model, int n, const NaBudget& budget = {},
                              const Strategy* warm = nullptr, bool drift_free = false);

// Large-market quantities:
//   alpha_large = alpha_{n_max} with the drift dropped,
//   n_alpha     = first n >= 1 with drift tail norm <= alpha_large / 2,
//   alpha_bar   = min(alpha_{n_alpha}, alpha_large / 2).
struct LargeMarketNa {
    double alpha_large = 0.0;
    int n_alpha = 0;
    double alpha_bar = 0.0;
};

// Computes the large-market constants given segment constants computed so
// far; adds alpha_{n_alpha} to the map when missing (keeping the map
// non-increasing). Throws InputError when the declared drift tail exceeds
// (alpha_large/2)^2 even at the truncation.
LargeMarketNa na_constant_large(const MarketModel& model, std::map<int, double>& per_segment,
                                std::map<int, Strategy>& minimizers,
                                const NaBudget& budget = {});

// Certified constants for a family of segments plus the large-market trio.
struct NAConstants {
    std::map<int, double> per_segment;
    std::map<int, Strategy> minimizers;
    double alpha_large = 0.0;
    int n_alpha = 0;
    double alpha_bar = 0.0;

    double alpha_at(int n) const;
};

NAConstants compute_na_constants(const MarketModel& model, const std::vector<int>& segments,
                                 const NaBudget& budget = {});

// Strictly positive reweighting of the product states of the first n
// factors under which every source has mean b_i.
struct MartingaleCertificate {
    int n = 0;
    std::vector<double> weights;  // by product-state index
    double min_weight = 0.0;
    double max_density_ratio = 0.0;  // max weight / physical probability
};

// Solves the martingale feasibility program: maximize the minimum weight
// subject to the moment equalities; requires the optimum to clear a strict
// interior threshold (1e-9). Infeasibility throws ArbitrageError.
MartingaleCertificate emm_segment(const MarketModel& model, int n,
                                  std::uint64_t state_cap = 262144);

}  // namespace aptkit
