#include "aptkit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

namespace {

// F(h) and its gradient in one enumeration/sampling pass.
struct Objective {
    const MarketModel& model;
    const Utility& u;
    const ExpectationBackend& backend;
    int n;  // tradable coordinates
    double x;
    const Claim& claim;
    std::size_t k;  // factors entering the expectation

    Objective(const MarketModel& m, const Utility& uu, const ExpectationBackend& be, int n_,
              double x_, const Claim& c)
        : model(m), u(uu), backend(be), n(n_), x(x_), claim(c) {
        k = std::max<std::size_t>(static_cast<std::size_t>(n),
                                  static_cast<std::size_t>(claim.depends_on()));
    }

    double value(std::span<const double> h) const {
        double out = 0.0;
        expect_multi(model, backend, k, 1,
                     [&](std::span<const double> sc, double* o) {
                         double gain = 0.0;
                         for (int i = 0; i < n; ++i)
                             gain += h[static_cast<std::size_t>(i)] *
                                     (sc[static_cast<std::size_t>(i)] - model.b(static_cast<std::size_t>(i)));
                         o[0] = u.value(x + gain - claim.payoff(sc));
                     },
                     &out);
        if (!std::isfinite(out))
            throw SolverError("optimizer.maximize_segment: objective is not finite "
                              "(utility constants or model inconsistent)");
        return out;
    }

    // out[0] = F, out[1..n] = dF/dh_i
    void value_and_grad(std::span<const double> h, std::vector<double>& out) const {
        out.assign(static_cast<std::size_t>(n) + 1, 0.0);
        expect_multi(model, backend, k, static_cast<std::size_t>(n) + 1,
                     [&](std::span<const double> sc, double* o) {
                         double gain = 0.0;
                         for (int i = 0; i < n; ++i)
                             gain += h[static_cast<std::size_t>(i)] *
                                     (sc[static_cast<std::size_t>(i)] - model.b(static_cast<std::size_t>(i)));
                         double w = x + gain - claim.payoff(sc);
                         o[0] = u.value(w);
                         double du = u.deriv(w);
                         for (int i = 0; i < n; ++i)
                             o[static_cast<std::size_t>(i) + 1] =
                                 du * (sc[static_cast<std::size_t>(i)] - model.b(static_cast<std::size_t>(i)));
                     },
                     out.data());
        if (!std::isfinite(out[0]))
            throw SolverError("optimizer.maximize_segment: objective is not finite "
                              "(utility constants or model inconsistent)");
    }
};

void project_ball(std::vector<double>& h, double radius) {
    double nrm = l2_norm(h);
    if (nrm > radius && nrm > 0.0) {
        double f = radius / nrm;
        for (auto& v : h) v *= f;
    }
}

}  // namespace

StrategyBound StrategyBound::manual(double M) {
    StrategyBound b;
    b.M = M;
    b.term_slope = M;
    return b;
}

StrategyBound strategy_bound(const MarketModel& model, const Utility& u, const NAConstants& na,
                             double x, const Claim& claim, const ExpectationBackend& backend) {
    const GrowthConstants& c = u.constants();
    if (!(na.alpha_bar > 0.0))
        throw InputError("optimizer.strategy_bound: alpha_bar must be positive");

    double alpha = na.alpha_large;
    double alpha_na = na.alpha_at(na.n_alpha);
    double abar = na.alpha_bar;

    double eu = expect(model, backend, static_cast<std::size_t>(claim.depends_on()),
                       [&](std::span<const double> sc) { return u.value(x - claim.payoff(sc)); });
    if (!std::isfinite(eu))
        throw SolverError("optimizer.strategy_bound: E U(x - G) is not finite");

    double denom = c.c1 * alpha_na * alpha * std::pow(abar, c.beta);
    StrategyBound b;
    b.term_growth = std::pow(
        2.0 * (std::abs(u.x0()) + std::abs(x) + c.c2 * alpha_na * alpha + std::abs(eu)) / denom,
        1.0 / c.beta);
    b.term_slope =
        std::pow(2.0 * std::sqrt(1.0 + model.drift().norm_sq_total()) / denom,
                 1.0 / (c.beta - 1.0));
    b.kinematic = std::max((x - u.x0()) / abar, std::abs(x) / abar);
    b.M = std::max({b.term_growth, b.term_slope, b.kinematic});
    b.echo = {alpha, na.n_alpha, abar, alpha_na, eu};
    return b;
}

OptimizationResult maximize_segment(const MarketModel& model, const Utility& u,
                                    const ExpectationBackend& backend, int n, double x,
                                    const Claim& claim, const StrategyBound& bound,
                                    const OptimizeOptions& options) {
    if (n < 1 || static_cast<std::size_t>(n) > model.n_max())
        throw InputError("optimizer.maximize_segment: segment index out of range");
    if (static_cast<std::size_t>(claim.depends_on()) > model.n_max())
        throw InputError("optimizer.maximize_segment: claim depends on sources beyond the model");
    if (!(bound.M > 0.0)) throw InputError("optimizer.maximize_segment: bound must be positive");

    Objective obj(model, u, backend, n, x, claim);

    std::vector<double> h(static_cast<std::size_t>(n), 0.0);
    double f_zero = obj.value(h);
    if (options.warm_start) {
        std::vector<double> w(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < options.warm_start->support_size() && i < w.size(); ++i)
            w[i] = options.warm_start->coords()[i];
        project_ball(w, bound.M);
        if (obj.value(w) >= f_zero) h = std::move(w);
    }

    std::vector<double> fg;
    obj.value_and_grad(h, fg);
    double f_cur = fg[0];

    double step = 1.0;
    int it = 0;
    double pg_norm = 0.0;
    bool converged = false;
    std::vector<double> trial(static_cast<std::size_t>(n));
    for (; it < options.max_iterations; ++it) {
        // projected-gradient stationarity measure at unit step
        for (int i = 0; i < n; ++i)
            trial[static_cast<std::size_t>(i)] =
                h[static_cast<std::size_t>(i)] + fg[static_cast<std::size_t>(i) + 1];
        project_ball(trial, bound.M);
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = trial[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)];
            s += d * d;
        }
        pg_norm = std::sqrt(s);
        if (pg_norm <= options.tol) {
            converged = true;
            break;
        }

        // backtracking line search along the projected step
        double t = step;
        bool accepted = false;
        for (int bt = 0; bt < 70; ++bt) {
            for (int i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] =
                    h[static_cast<std::size_t>(i)] + t * fg[static_cast<std::size_t>(i) + 1];
            project_ball(trial, bound.M);
            double inc = 0.0;
            for (int i = 0; i < n; ++i)
                inc += fg[static_cast<std::size_t>(i) + 1] *
                       (trial[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)]);
            double f_trial = obj.value(trial);
            if (f_trial >= f_cur + options.armijo * inc && f_trial >= f_cur) {
                h = trial;
                f_cur = f_trial;
                step = std::min(t * 2.0, 1e12);
                accepted = true;
                break;
            }
            t *= options.shrink;
        }
        if (!accepted) break;  // step underflow: accept current point

        obj.value_and_grad(h, fg);
        f_cur = fg[0];
    }

    OptimizationResult res;
    res.h_star = Strategy(h);
    res.value = f_cur;
    res.grad_norm = pg_norm;
    res.iterations = it;
    res.active_bound = std::abs(res.h_star.norm() - bound.M) <= 1e-6;
    res.converged = converged || pg_norm <= options.tol;
    return res;
}

std::vector<Strategy> cesaro(const std::vector<OptimizationResult>& results) {
    if (results.empty()) throw InputError("optimizer.cesaro: empty result list");
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.h_star.support_size());
    std::vector<Strategy> out;
    out.reserve(results.size());
    std::vector<double> acc(width, 0.0);
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& c = results[k].h_star.coords();
        for (std::size_t i = 0; i < c.size(); ++i) acc[i] += c[i];
        std::vector<double> avg(width);
        for (std::size_t i = 0; i < width; ++i) avg[i] = acc[i] / static_cast<double>(k + 1);
        out.emplace_back(std::move(avg));
    }
    return out;
}

ConvergenceReport convergence_run(const MarketModel& model, const Utility& u,
                                  const ExpectationBackend& backend, double x, const Claim& claim,
                                  const std::vector<int>& n_grid, const StrategyBound& bound,
                                  const ConvergenceOptions& options) {
    if (n_grid.empty()) throw InputError("optimizer.convergence_run: empty segment grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw InputError("optimizer.convergence_run: segment grid must be increasing");
    int n_max = static_cast<int>(model.n_max());
    if (n_grid.back() > n_max)
        throw InputError("optimizer.convergence_run: grid exceeds the model truncation");

    ConvergenceReport rep;
    rep.n_grid = n_grid;

    if (options.parallel_cold_start) {
        std::vector<std::future<OptimizationResult>> jobs;
        jobs.reserve(n_grid.size());
        for (int n : n_grid)
            jobs.push_back(std::async(std::launch::async, [&, n] {
                return maximize_segment(model, u, backend, n, x, claim, bound, options.opt);
            }));
        for (auto& job : jobs) rep.results.push_back(job.get());
        for (const auto& r : rep.results) {
            rep.u_seq.push_back(r.value);
            rep.grad_norms.push_back(r.grad_norm);
            rep.h_norms.push_back(r.h_star.norm());
        }
    } else {
        OptimizeOptions opt = options.opt;
        for (int n : n_grid) {
            OptimizationResult r = maximize_segment(model, u, backend, n, x, claim, bound, opt);
            rep.u_seq.push_back(r.value);
            rep.grad_norms.push_back(r.grad_norm);
            rep.h_norms.push_back(r.h_star.norm());
            opt.warm_start = r.h_star;
            rep.results.push_back(std::move(r));
        }
    }

    if (n_grid.back() == n_max) {
        rep.u_ref = rep.u_seq.back();
        rep.h_ref = rep.results.back().h_star;
    } else {
        OptimizeOptions ref_opt = options.opt;
        if (!options.parallel_cold_start) ref_opt.warm_start = rep.results.back().h_star;
        OptimizationResult ref =
            maximize_segment(model, u, backend, n_max, x, claim, bound, ref_opt);
        rep.u_ref = ref.value;
        rep.h_ref = ref.h_star;
    }

    std::vector<Strategy> averages = cesaro(rep.results);
    for (const auto& avg : averages) {
        std::size_t width = std::max(avg.support_size(), rep.h_ref.support_size());
        double s = 0.0;
        for (std::size_t i = 0; i < width; ++i) {
            double d = avg.at(i) - rep.h_ref.at(i);
            s += d * d;
        }
        rep.cesaro_dist.push_back(std::sqrt(s));
    }

    rep.monotone_ok = true;
    for (std::size_t i = 1; i < rep.u_seq.size(); ++i)
        if (rep.u_seq[i] < rep.u_seq[i - 1] - options.monotone_slack) rep.monotone_ok = false;

    bool value_close = rep.u_ref - rep.u_seq.back() <= 10.0 * options.opt.tol;
    bool strategy_close = !u.strictly_concave() || rep.cesaro_dist.back() <= options.strategy_tol;
    rep.converged_ok = value_close && strategy_close;
    return rep;
}

double segment_objective(const MarketModel& model, const Utility& u,
                         const ExpectationBackend& backend, double x, const Claim& claim,
                         const Strategy& h) {
    int n = static_cast<int>(h.support_size());
    if (n == 0) n = 1;
    Objective obj(model, u, backend, n, x, claim);
    std::vector<double> hv(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < h.support_size(); ++i) hv[i] = h.coords()[i];
    return obj.value(hv);
}

std::vector<double> segment_gradient(const MarketModel& model, const Utility& u,
                                     const ExpectationBackend& backend, int n, double x,
                                     const Claim& claim, const Strategy& h) {
    Objective obj(model, u, backend, n, x, claim);
    std::vector<double> hv(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < h.support_size() && i < hv.size(); ++i) hv[i] = h.coords()[i];
    std::vector<double> fg;
    obj.value_and_grad(hv, fg);
    return std::vector<double>(fg.begin() + 1, fg.end());
}

}  // namespace aptkit
