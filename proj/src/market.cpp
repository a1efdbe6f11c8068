#include "aptkit/market.hpp"

#include <cmath>
#include <string>

#include "aptkit/errors.hpp"

namespace aptkit {

DriftVector::DriftVector(std::vector<double> head, double tail_norm_sq)
    : head_(std::move(head)), tail_norm_sq_(tail_norm_sq) {
    for (double b : head_)
        if (!std::isfinite(b)) throw InputError("drift head contains a non-finite entry");
    if (!(tail_norm_sq_ >= 0.0) || !std::isfinite(tail_norm_sq_))
        throw InputError("drift tail_norm_sq must be finite and >= 0");
}

double DriftVector::tail_norm_from(std::size_t n) const {
    double s = tail_norm_sq_;
    for (std::size_t i = n; i < head_.size(); ++i) s += head_[i] * head_[i];
    return std::sqrt(s);
}

Loadings::Loadings(int m_, std::vector<double> bar_beta_, std::vector<std::vector<double>> beta_)
    : m(m_), bar_beta(std::move(bar_beta_)), beta(std::move(beta_)) {
    if (m < 1) throw InputError("loadings: m must be >= 1");
    for (std::size_t i = 0; i < bar_beta.size(); ++i)
        if (bar_beta[i] == 0.0 || !std::isfinite(bar_beta[i]))
            throw InputError("loadings: bar_beta[" + std::to_string(i + 1) +
                             "] must be nonzero and finite");
    for (const auto& row : beta)
        if (row.size() != static_cast<std::size_t>(m))
            throw InputError("loadings: each beta row must have m entries");
}

double Strategy::norm_sq() const {
    double s = 0.0;
    for (double v : coords_) s += v * v;
    return s;
}

double Strategy::norm() const { return std::sqrt(norm_sq()); }

MarketModel::MarketModel(std::vector<FactorDistribution> factors, DriftVector drift,
                         std::optional<Loadings> loadings)
    : factors_(std::move(factors)), drift_(std::move(drift)), loadings_(std::move(loadings)) {
    if (factors_.empty()) throw InputError("market model needs at least one factor");
    if (drift_.head().size() != factors_.size())
        throw InputError("drift head length must equal the number of factors");
    if (loadings_) {
        if (loadings_->bar_beta.size() != factors_.size())
            throw InputError("loadings: bar_beta length must equal the number of factors");
        if (static_cast<std::size_t>(loadings_->m) > factors_.size())
            throw InputError("loadings: m exceeds the number of factors");
        if (loadings_->beta.size() != factors_.size() - static_cast<std::size_t>(loadings_->m))
            throw InputError("loadings: beta must have one row per asset beyond the first m");
    }
}

const Loadings& MarketModel::loadings() const {
    if (!loadings_) throw InputError("market model has no loadings");
    return *loadings_;
}

std::uint64_t MarketModel::product_state_count(std::size_t k, std::uint64_t saturate_at) const {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < k && i < factors_.size(); ++i) {
        count *= factors_[i].size();
        if (count > saturate_at) return saturate_at + 1;
    }
    return count;
}

double wealth(const MarketModel& model, double x, const Strategy& h,
              std::span<const double> scenario) {
    if (scenario.size() < h.support_size())
        throw InputError("market.wealth: scenario provides " + std::to_string(scenario.size()) +
                         " factor values but the strategy touches " +
                         std::to_string(h.support_size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < h.support_size(); ++i)
        acc += h.coords()[i] * (scenario[i] - model.b(i));
    return x + acc;
}

std::vector<double> returns_from_factors(const MarketModel& model,
                                         std::span<const double> scenario) {
    const Loadings& L = model.loadings();
    if (scenario.size() < model.n_max())
        throw InputError("market.returns_from_factors: scenario must cover all factors");
    std::size_t m = static_cast<std::size_t>(L.m);
    std::vector<double> r(model.n_max());
    for (std::size_t i = 0; i < model.n_max(); ++i) {
        double own = L.bar_beta[i] * (scenario[i] - model.b(i));
        if (i < m) {
            r[i] = own;
        } else {
            double sys = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                sys += L.beta[i - m][j] * (scenario[j] - model.b(j));
            r[i] = sys + own;
        }
    }
    return r;
}

Strategy asset_to_source(const MarketModel& model, const std::vector<double>& asset_portfolio) {
    const Loadings& L = model.loadings();
    if (asset_portfolio.size() > model.n_max())
        throw InputError("market.asset_to_source: portfolio longer than the truncation");
    std::size_t m = static_cast<std::size_t>(L.m);
    std::size_t n = asset_portfolio.size();
    std::vector<double> h(n, 0.0);
    for (std::size_t j = 0; j < n && j < m; ++j) h[j] = asset_portfolio[j] * L.bar_beta[j];
    for (std::size_t i = m; i < n; ++i) {
        h[i] = asset_portfolio[i] * L.bar_beta[i];
        for (std::size_t j = 0; j < m; ++j) h[j] += asset_portfolio[i] * L.beta[i - m][j];
    }
    return Strategy(std::move(h));
}

std::vector<double> source_to_asset(const MarketModel& model, const Strategy& h) {
    const Loadings& L = model.loadings();
    std::size_t m = static_cast<std::size_t>(L.m);
    std::size_t n = h.support_size();
    if (n > model.n_max())
        throw InputError("market.source_to_asset: strategy longer than the truncation");
    std::vector<double> a(n, 0.0);
    for (std::size_t i = m; i < n; ++i) a[i] = h.coords()[i] / L.bar_beta[i];
    for (std::size_t j = 0; j < n && j < m; ++j) {
        double cross = 0.0;
        for (std::size_t i = m; i < n; ++i) cross += a[i] * L.beta[i - m][j];
        a[j] = (h.coords()[j] - cross) / L.bar_beta[j];
    }
    return a;
}

}  // namespace aptkit
