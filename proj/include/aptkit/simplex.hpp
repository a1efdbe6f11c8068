#pragma once

#include <vector>

namespace aptkit {

// Dense two-phase tableau simplex for min c'x s.t. Ax = b, x >= 0.
// Bland's rule, so it terminates deterministically. Built for the small
// equality systems in this toolkit (a dozen rows, a few thousand columns).
struct LpProblem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major rows x cols
    std::vector<double> b;
    std::vector<double> c;

    double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
    double at(std::size_t r, std::size_t col) const { return a[r * cols + col]; }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    // On infeasibility: y with y'A <= ~0 and y'b > 0 (Farkas direction),
    // taken from the phase-1 dual. Empty when feasible.
    std::vector<double> farkas;
};

LpResult solve_lp(const LpProblem& p);

}  // namespace aptkit
