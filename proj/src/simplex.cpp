#include "aptkit/simplex.hpp"

#include <cmath>
#include <limits>

#include "aptkit/errors.hpp"

namespace aptkit {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

// Tableau with an appended objective row; column layout: structural
// columns, then artificials, then the rhs.
struct Tableau {
    std::size_t rows, cols;          // constraint rows, total columns incl. rhs
    std::vector<double> t;           // (rows + 1) x cols, last row = reduced costs
    std::vector<std::size_t> basis;  // basic column per row

    double& at(std::size_t r, std::size_t c) { return t[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return t[r * cols + c]; }

    void pivot(std::size_t pr, std::size_t pc) {
        double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c < cols; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis[pr] = pc;
    }

    // Bland: entering = lowest-index column with negative reduced cost;
    // leaving = min ratio, ties broken by lowest basis column index.
    // Returns false when optimal; throws on unboundedness.
    bool step(std::size_t n_usable) {
        std::size_t enter = n_usable;
        for (std::size_t c = 0; c < n_usable; ++c) {
            if (at(rows, c) < -kCostTol) {
                enter = c;
                break;
            }
        }
        if (enter == n_usable) return false;
        std::size_t leave = rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r) {
            double a = at(r, enter);
            if (a > kPivotTol) {
                double ratio = at(r, cols - 1) / a;
                if (ratio < best_ratio - 1e-15 ||
                    (ratio <= best_ratio + 1e-15 &&
                     (leave == rows || basis[r] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
        }
        if (leave == rows) throw SolverError("simplex: problem is unbounded");
        pivot(leave, enter);
        return true;
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& p) {
    const std::size_t m = p.rows, n = p.cols;
    LpResult out;

    Tableau tab;
    tab.rows = m;
    tab.cols = n + m + 1;  // structural + artificial + rhs
    tab.t.assign((m + 1) * tab.cols, 0.0);
    tab.basis.resize(m);

    for (std::size_t r = 0; r < m; ++r) {
        double sign = p.b[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign * p.at(r, c);
        tab.at(r, n + r) = 1.0;
        tab.at(r, tab.cols - 1) = sign * p.b[r];
        tab.basis[r] = n + r;
    }
    // Phase-1 objective: minimize the artificial sum. Reduced costs start
    // as minus the column sums over constraint rows.
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += tab.at(r, c);
        tab.at(m, c) = -s;
    }
    double rhs_sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) rhs_sum += tab.at(r, tab.cols - 1);
    tab.at(m, tab.cols - 1) = -rhs_sum;

    while (tab.step(n + m)) {
    }

    double phase1 = -tab.at(m, tab.cols - 1);
    if (phase1 > 1e-7) {
        out.status = LpStatus::infeasible;
        // Phase-1 duals live in the artificial columns of the cost row.
        out.farkas.resize(m);
        for (std::size_t r = 0; r < m; ++r) {
            // artificial reduced cost at optimality is 1 - y_r
            double y = 1.0 - tab.at(m, n + r);
            double sign = p.b[r] < 0.0 ? -1.0 : 1.0;
            out.farkas[r] = sign * y;
        }
        return out;
    }

    // Drive any artificial still basic out of the basis (degenerate rows).
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis[r] < n) continue;
        std::size_t c = 0;
        for (; c < n; ++c)
            if (std::abs(tab.at(r, c)) > kPivotTol) break;
        if (c < n) {
            tab.pivot(r, c);
        } else {
            // redundant row; pin the artificial at zero by zeroing the row
            for (std::size_t cc = 0; cc < tab.cols; ++cc) tab.at(r, cc) = 0.0;
            tab.at(r, tab.basis[r]) = 1.0;
        }
    }

    // Phase 2: rebuild the cost row for c over the current basis.
    for (std::size_t c = 0; c < tab.cols; ++c) tab.at(m, c) = 0.0;
    for (std::size_t c = 0; c < n; ++c) tab.at(m, c) = p.c[c];
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis[r] >= n) continue;
        double cb = p.c[tab.basis[r]];
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c < tab.cols; ++c) tab.at(m, c) -= cb * tab.at(r, c);
    }
    // Artificials are out of play in phase 2.
    while (true) {
        std::size_t enter = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (tab.at(m, c) < -kCostTol) {
                enter = c;
                break;
            }
        }
        if (enter == n) break;
        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < m; ++r) {
            double a = tab.at(r, enter);
            if (a > kPivotTol) {
                double ratio = tab.at(r, tab.cols - 1) / a;
                if (ratio < best_ratio - 1e-15 ||
                    (ratio <= best_ratio + 1e-15 && (leave == m || tab.basis[r] < tab.basis[leave]))) {
                    best_ratio = ratio;
                    leave = r;
                }
            }
        }
        if (leave == m) {
            out.status = LpStatus::unbounded;
            return out;
        }
        tab.pivot(leave, enter);
    }

    out.status = LpStatus::optimal;
    out.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.basis[r] < n) out.x[tab.basis[r]] = tab.at(r, tab.cols - 1);
    double obj = 0.0;
    for (std::size_t c = 0; c < n; ++c) obj += p.c[c] * out.x[c];
    out.objective = obj;
    return out;
}

}  // namespace aptkit
