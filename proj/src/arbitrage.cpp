#include "aptkit/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aptkit/errors.hpp"
#include "aptkit/expectation.hpp"
#include "aptkit/numeric.hpp"
#include "aptkit/simplex.hpp"

namespace aptkit {

namespace {

// Centered state table for one segment: diffs[s][i] = eps_i(s) - b_i and
// the state probabilities. Built once, reused across many q evaluations.
struct SegmentTable {
    int n = 0;
    std::uint64_t states = 0;
    std::vector<double> diffs;  // states x n, row-major
    std::vector<double> probs;

    const double* row(std::uint64_t s) const { return diffs.data() + s * n; }
};

SegmentTable build_table(const MarketModel& model, int n, bool drift_free) {
    if (n < 1 || static_cast<std::size_t>(n) > model.n_max())
        throw InputError("arbitrage: segment index n out of range");
    SegmentTable tab;
    tab.n = n;
    std::uint64_t count = model.product_state_count(static_cast<std::size_t>(n), 2'000'000);
    if (count > 2'000'000)
        throw InputError("arbitrage: segment product-state count exceeds the exact cap");
    tab.states = count;
    tab.diffs.resize(count * static_cast<std::uint64_t>(n));
    tab.probs.resize(count);
    enumerate_product_states(model, static_cast<std::size_t>(n),
                             [&](std::uint64_t s, std::span<const double> sc, double p) {
                                 tab.probs[s] = p;
                                 double* row = tab.diffs.data() + s * static_cast<std::uint64_t>(n);
                                 for (int i = 0; i < n; ++i)
                                     row[i] = sc[i] - (drift_free ? 0.0 : model.b(i));
                             });
    return tab;
}

std::vector<LossAtom> atoms_for(const SegmentTable& tab, std::span<const double> h) {
    std::vector<LossAtom> atoms(tab.states);
    for (std::uint64_t s = 0; s < tab.states; ++s) {
        const double* row = tab.row(s);
        double loss = 0.0;
        for (int i = 0; i < tab.n; ++i) loss += h[i] * row[i];
        atoms[s] = {loss, tab.probs[s]};
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const LossAtom& a, const LossAtom& b) { return a.value < b.value; });
    // merge near-identical values
    std::vector<LossAtom> merged;
    merged.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (!merged.empty() &&
            std::abs(a.value - merged.back().value) <= 1e-12 * std::max(1.0, std::abs(a.value))) {
            merged.back().prob += a.prob;
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

// Atom-exact sup{alpha : P(L < -alpha) > alpha}. For negative atoms
// -mu_1 < -mu_2 < ... with cumulative mass C_j = P(L <= -mu_j), the
// supremum over alpha in [mu_{j+1}, mu_j) is min(mu_j, C_j) whenever
// C_j > mu_{j+1}; both inequalities in the condition are strict.
double q_from_atoms(const std::vector<LossAtom>& atoms) {
    std::vector<double> mu;
    std::vector<double> cum;
    double acc = 0.0;
    for (const auto& a : atoms) {
        if (a.value < 0.0) {
            acc += a.prob;
            mu.push_back(-a.value);  // descending as atoms ascend
            cum.push_back(acc);
        } else {
            break;
        }
    }
    if (mu.empty()) return 0.0;
    double best = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double lower = (j + 1 < mu.size()) ? mu[j + 1] : 0.0;
        if (cum[j] > lower) best = std::max(best, std::min({mu[j], cum[j], 1.0}));
    }
    return best;
}

double q_eval(const SegmentTable& tab, std::span<const double> h) {
    return q_from_atoms(atoms_for(tab, h));
}

// min over states of <h, eps-b>; concave piecewise-linear in h. Also
// reports a minimizing state for the subgradient.
double worst_loss(const SegmentTable& tab, std::span<const double> h, std::uint64_t* argmin) {
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t arg = 0;
    for (std::uint64_t s = 0; s < tab.states; ++s) {
        const double* row = tab.row(s);
        double loss = 0.0;
        for (int i = 0; i < tab.n; ++i) loss += h[i] * row[i];
        if (loss < best) {
            best = loss;
            arg = s;
        }
    }
    if (argmin) *argmin = arg;
    return best;
}

void project_to_unit_ball(std::vector<double>& h) {
    double nrm = l2_norm(h);
    if (nrm > 1.0)
        for (auto& v : h) v /= nrm;
}

void normalize_to_sphere(std::vector<double>& h) {
    double nrm = l2_norm(h);
    if (nrm < 1e-14) {
        h.assign(h.size(), 0.0);
        h[0] = 1.0;
        return;
    }
    for (auto& v : h) v /= nrm;
}

// Detects arbitrage directions. Coordinate drifts outside (or at the edge
// of) the support hull are caught exactly; the general case runs projected
// subgradient ascent on the concave worst-loss function over the unit
// ball, which has no spurious local maxima.
bool find_arbitrage(const MarketModel& model, const SegmentTable& tab, bool drift_free,
                    std::vector<double>& witness) {
    int n = tab.n;
    for (int i = 0; i < n; ++i) {
        const auto& f = model.factor(static_cast<std::size_t>(i));
        double b = drift_free ? 0.0 : model.b(static_cast<std::size_t>(i));
        double lo = *std::min_element(f.support().begin(), f.support().end());
        double hi = *std::max_element(f.support().begin(), f.support().end());
        if (b >= hi || b <= lo) {
            witness.assign(static_cast<std::size_t>(n), 0.0);
            witness[static_cast<std::size_t>(i)] = (b >= hi) ? -1.0 : 1.0;
            return true;
        }
    }

    Rng rng(977);
    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int r = 0; r < 6; ++r) starts.push_back(rng.next_unit_vector(n));
    double best_phi = -std::numeric_limits<double>::infinity();
    std::vector<double> best_h;
    for (auto& h : starts) {
        for (int it = 1; it <= 400; ++it) {
            std::uint64_t arg = 0;
            worst_loss(tab, h, &arg);
            const double* g = tab.row(arg);
            double step = 0.5 / std::sqrt(static_cast<double>(it));
            for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] += step * g[i];
            project_to_unit_ball(h);
        }
        std::uint64_t arg = 0;
        double phi = worst_loss(tab, h, &arg);
        if (phi > best_phi) {
            best_phi = phi;
            best_h = h;
        }
    }
    if (best_phi >= -1e-12 && l2_norm(best_h) > 1e-6) {
        // worst state never loses; confirm some state strictly gains
        double gain = 0.0;
        for (std::uint64_t s = 0; s < tab.states; ++s) {
            const double* row = tab.row(s);
            double v = 0.0;
            for (int i = 0; i < tab.n; ++i) v += best_h[static_cast<std::size_t>(i)] * row[i];
            gain = std::max(gain, v);
        }
        if (gain > 1e-10) {
            witness = best_h;
            normalize_to_sphere(witness);
            return true;
        }
    }
    return false;
}

// Halton low-discrepancy point, mapped through the inverse normal CDF and
// radially projected onto the sphere.
std::vector<double> halton_sphere_point(int index, int dim) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        int base = primes[d];
        double f = 1.0, r = 0.0;
        int i = index;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        double u = std::min(std::max(r, 1e-12), 1.0 - 1e-12);
        v[static_cast<std::size_t>(d)] = inverse_normal_cdf(u);
    }
    return v;
}

// Pattern search on the sphere: propose normalize(h + sigma * d) over
// coordinate and seeded random directions, keep the best improvement,
// shrink sigma when stuck.
double compass_descent(const SegmentTable& tab, std::vector<double>& h, double q_start, Rng& rng) {
    int n = tab.n;
    double q_cur = q_start;
    double sigma = 0.5;
    int evals = 0;
    const int max_evals = 140 * std::max(4, n);
    while (sigma > 1e-4 && evals < max_evals) {
        double best_q = q_cur;
        std::vector<double> best_h;
        auto consider = [&](std::vector<double> cand) {
            normalize_to_sphere(cand);
            double q = q_eval(tab, cand);
            ++evals;
            if (q < best_q) {
                best_q = q;
                best_h = std::move(cand);
            }
        };
        for (int i = 0; i < n; ++i) {
            for (double sign : {1.0, -1.0}) {
                auto cand = h;
                cand[static_cast<std::size_t>(i)] += sign * sigma;
                consider(std::move(cand));
            }
        }
        for (int r = 0; r < 6; ++r) {
            auto dir = rng.next_unit_vector(n);
            auto cand = h;
            for (int i = 0; i < n; ++i) cand[static_cast<std::size_t>(i)] += sigma * dir[static_cast<std::size_t>(i)];
            consider(std::move(cand));
        }
        if (best_q < q_cur - 1e-15) {
            h = best_h;
            q_cur = best_q;
        } else {
            sigma *= 0.5;
        }
    }
    return q_cur;
}

}  // namespace

std::vector<LossAtom> loss_distribution(const MarketModel& model, const Strategy& h, int n,
                                        bool drift_free) {
    SegmentTable tab = build_table(model, n, drift_free);
    std::vector<double> hv(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < h.support_size() && i < hv.size(); ++i) hv[i] = h.coords()[i];
    if (h.support_size() > static_cast<std::size_t>(n))
        for (std::size_t i = static_cast<std::size_t>(n); i < h.support_size(); ++i)
            if (h.coords()[i] != 0.0)
                throw InputError("arbitrage: strategy touches sources beyond the segment");
    return atoms_for(tab, hv);
}

double loss_quantile_alpha(const MarketModel& model, const Strategy& h, int n, bool drift_free) {
    return q_from_atoms(loss_distribution(model, h, n, drift_free));
}

SegmentNa na_constant_segment(const MarketModel& model, int n, const NaBudget& budget,
                              const Strategy* warm, bool drift_free) {
    SegmentTable tab = build_table(model, n, drift_free);

    std::vector<double> witness;
    if (find_arbitrage(model, tab, drift_free, witness))
        throw ArbitrageError("arbitrage.na_constant_segment: segment " + std::to_string(n) +
                                 " admits an arbitrage direction",
                             witness);

    struct Candidate {
        double q;
        std::vector<double> h;
    };
    std::vector<Candidate> pool;
    auto add_candidate = [&](std::vector<double> h) {
        normalize_to_sphere(h);
        pool.push_back({q_eval(tab, h), std::move(h)});
    };

    if (warm && warm->support_size() > 0) {
        std::vector<double> h(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < warm->support_size() && i < h.size(); ++i)
            h[i] = warm->coords()[i];
        if (l2_norm(h) > 1e-14) add_candidate(std::move(h));
    }
    for (int i = 0; i < n; ++i) {
        for (double sign : {1.0, -1.0}) {
            std::vector<double> h(static_cast<std::size_t>(n), 0.0);
            h[static_cast<std::size_t>(i)] = sign;
            add_candidate(std::move(h));
        }
    }
    if (n <= budget.max_grid_dim) {
        for (int g = 1; g <= budget.grid_points; ++g) {
            auto h = halton_sphere_point(g, n);
            if (l2_norm(h) > 1e-12) add_candidate(std::move(h));
        }
    }
    Rng rng(budget.seed + static_cast<std::uint64_t>(n) * 0x9E37ULL);
    for (int s = 0; s < budget.starts; ++s) add_candidate(rng.next_unit_vector(n));

    std::stable_sort(pool.begin(), pool.end(),
                     [](const Candidate& a, const Candidate& b) { return a.q < b.q; });

    double best_q = pool.front().q;
    std::vector<double> best_h = pool.front().h;
    int n_polish = std::min<int>(budget.starts, static_cast<int>(pool.size()));
    for (int s = 0; s < n_polish; ++s) {
        std::vector<double> h = pool[static_cast<std::size_t>(s)].h;
        double q = compass_descent(tab, h, pool[static_cast<std::size_t>(s)].q, rng);
        if (q < best_q) {
            best_q = q;
            best_h = h;
        }
    }

    SegmentNa out;
    out.n = n;
    out.q_min = best_q;
    out.minimizer = Strategy(best_h);
    out.alpha = (1.0 - budget.safety) * best_q;
    if (!(out.alpha > 0.0))
        throw ArbitrageError("arbitrage.na_constant_segment: certified constant for segment " +
                                 std::to_string(n) + " is not positive (arbitrage suspected)",
                             best_h);
    return out;
}

double NAConstants::alpha_at(int n) const {
    auto it = per_segment.find(n);
    if (it == per_segment.end())
        throw InputError("arbitrage: no certified constant for segment " + std::to_string(n));
    return it->second;
}

LargeMarketNa na_constant_large(const MarketModel& model, std::map<int, double>& per_segment,
                                std::map<int, Strategy>& minimizers, const NaBudget& budget) {
    int n_max = static_cast<int>(model.n_max());
    const Strategy* warm = nullptr;
    if (!minimizers.empty()) warm = &minimizers.rbegin()->second;

    LargeMarketNa large;
    SegmentNa drift_free = na_constant_segment(model, n_max, budget, warm, true);
    large.alpha_large = drift_free.alpha;

    double half = large.alpha_large / 2.0;
    if (model.drift().tail_norm_from(static_cast<std::size_t>(n_max)) > half)
        throw InputError(
            "arbitrage.na_constant_large: declared tail_norm_sq exceeds (alpha_large/2)^2 even "
            "at the truncation; the model truncation is too short for the declared tail");
    for (int n = 1; n <= n_max; ++n) {
        if (model.drift().tail_norm_from(static_cast<std::size_t>(n)) <= half) {
            large.n_alpha = n;
            break;
        }
    }

    if (per_segment.find(large.n_alpha) == per_segment.end()) {
        SegmentNa seg = na_constant_segment(model, large.n_alpha, budget, nullptr, false);
        double alpha = seg.alpha;
        // keep monotonicity against any already-certified smaller segment
        for (const auto& [m, a] : per_segment)
            if (m < large.n_alpha) alpha = std::min(alpha, a);
        per_segment[large.n_alpha] = alpha;
        minimizers[large.n_alpha] = seg.minimizer;
        // and clamp larger segments below it
        for (auto& [m, a] : per_segment)
            if (m > large.n_alpha) a = std::min(a, alpha);
    }
    large.alpha_bar = std::min(per_segment.at(large.n_alpha), half);
    return large;
}

NAConstants compute_na_constants(const MarketModel& model, const std::vector<int>& segments,
                                 const NaBudget& budget) {
    if (segments.empty()) throw InputError("arbitrage: need at least one segment");
    for (std::size_t i = 1; i < segments.size(); ++i)
        if (segments[i] <= segments[i - 1])
            throw InputError("arbitrage: segment list must be strictly increasing");

    NAConstants na;
    const Strategy* warm = nullptr;
    double prev_alpha = std::numeric_limits<double>::infinity();
    for (int n : segments) {
        SegmentNa seg = na_constant_segment(model, n, budget, warm, false);
        // nested spheres: a certificate valid at a larger alpha stays valid
        // at any smaller one, so clamping keeps the sequence non-increasing
        double alpha = std::min(seg.alpha, prev_alpha);
        na.per_segment[n] = alpha;
        na.minimizers[n] = seg.minimizer;
        warm = &na.minimizers[n];
        prev_alpha = alpha;
    }

    LargeMarketNa large = na_constant_large(model, na.per_segment, na.minimizers, budget);
    na.alpha_large = large.alpha_large;
    na.n_alpha = large.n_alpha;
    na.alpha_bar = large.alpha_bar;
    return na;
}

MartingaleCertificate emm_segment(const MarketModel& model, int n, std::uint64_t state_cap) {
    if (n < 1 || static_cast<std::size_t>(n) > model.n_max())
        throw InputError("arbitrage.emm_segment: segment index out of range");
    std::uint64_t states = model.product_state_count(static_cast<std::size_t>(n), state_cap);
    if (states > state_cap)
        throw InputError("arbitrage.emm_segment: product-state count exceeds " +
                         std::to_string(state_cap));

    // Variables (y_1..y_S, t), weights w_s = y_s + t, all >= 0.
    // max t  s.t.  sum_s w_s = 1,  sum_s w_s eps_i(s) = b_i  (i <= n).
    std::uint64_t S = states;
    std::size_t rows = static_cast<std::size_t>(n) + 1;
    LpProblem lp;
    lp.rows = rows;
    lp.cols = static_cast<std::size_t>(S) + 1;
    lp.a.assign(lp.rows * lp.cols, 0.0);
    lp.b.assign(rows, 0.0);
    lp.c.assign(lp.cols, 0.0);
    lp.c[lp.cols - 1] = -1.0;  // maximize t

    std::vector<double> eps_col_sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> phys(static_cast<std::size_t>(S), 0.0);
    enumerate_product_states(model, static_cast<std::size_t>(n),
                             [&](std::uint64_t s, std::span<const double> sc, double p) {
                                 phys[s] = p;
                                 lp.at(0, static_cast<std::size_t>(s)) = 1.0;
                                 for (int i = 0; i < n; ++i) {
                                     lp.at(static_cast<std::size_t>(i + 1),
                                           static_cast<std::size_t>(s)) = sc[static_cast<std::size_t>(i)];
                                     eps_col_sum[static_cast<std::size_t>(i)] += sc[static_cast<std::size_t>(i)];
                                 }
                             });
    lp.at(0, lp.cols - 1) = static_cast<double>(S);
    lp.b[0] = 1.0;
    for (int i = 0; i < n; ++i) {
        lp.at(static_cast<std::size_t>(i + 1), lp.cols - 1) = eps_col_sum[static_cast<std::size_t>(i)];
        lp.b[static_cast<std::size_t>(i + 1)] = model.b(static_cast<std::size_t>(i));
    }

    LpResult res = solve_lp(lp);
    if (res.status == LpStatus::unbounded)
        throw SolverError("arbitrage.emm_segment: feasibility program unbounded (bad input)");
    if (res.status == LpStatus::infeasible) {
        std::vector<double> witness(static_cast<std::size_t>(n), 0.0);
        if (res.farkas.size() == rows) {
            for (int i = 0; i < n; ++i)
                witness[static_cast<std::size_t>(i)] = -res.farkas[static_cast<std::size_t>(i + 1)];
            normalize_to_sphere(witness);
        }
        throw ArbitrageError("arbitrage.emm_segment: no martingale measure for segment " +
                                 std::to_string(n) + " (arbitrage in segment)",
                             witness);
    }

    double t = res.x[lp.cols - 1];
    MartingaleCertificate cert;
    cert.n = n;
    cert.weights.resize(static_cast<std::size_t>(S));
    double min_w = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (std::uint64_t s = 0; s < S; ++s) {
        double w = res.x[static_cast<std::size_t>(s)] + t;
        cert.weights[static_cast<std::size_t>(s)] = w;
        min_w = std::min(min_w, w);
        max_ratio = std::max(max_ratio, w / phys[static_cast<std::size_t>(s)]);
    }
    cert.min_weight = min_w;
    cert.max_density_ratio = max_ratio;
    if (!(min_w >= 1e-9)) {
        std::vector<double> witness;
        throw ArbitrageError(
            "arbitrage.emm_segment: only boundary martingale measures exist for segment " +
                std::to_string(n) + " (no equivalent measure; arbitrage in segment)",
            witness);
    }

    // sanity on the solved certificate
    double wsum = 0.0;
    for (double w : cert.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-10)
        throw SolverError("arbitrage.emm_segment: weights do not sum to one (LP accuracy)");
    for (int i = 0; i < n; ++i) {
        double m = 0.0;
        enumerate_product_states(model, static_cast<std::size_t>(n),
                                 [&](std::uint64_t s, std::span<const double> sc, double) {
                                     m += cert.weights[static_cast<std::size_t>(s)] *
                                          sc[static_cast<std::size_t>(i)];
                                 });
        if (std::abs(m - model.b(static_cast<std::size_t>(i))) > 1e-8)
            throw SolverError("arbitrage.emm_segment: moment constraint violated (LP accuracy)");
    }
    return cert;
}

}  // namespace aptkit
