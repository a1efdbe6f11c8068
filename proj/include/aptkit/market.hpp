#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aptkit/distribution.hpp"

namespace aptkit {

// Risk premia b_1..b_{n_max} plus the declared squared l2 mass beyond the
// truncation. The tail enters norm bounds only, never payoffs.
class DriftVector {
public:
    DriftVector() = default;
    DriftVector(std::vector<double> head, double tail_norm_sq);

    const std::vector<double>& head() const { return head_; }
    double tail_norm_sq() const { return tail_norm_sq_; }

    double at(std::size_t i) const { return i < head_.size() ? head_[i] : 0.0; }
    // sqrt( sum_{i>n} b_i^2 + tail_norm_sq ), indices 1-based, n >= 0.
    double tail_norm_from(std::size_t n) const;
    double norm_sq_total() const { return tail_norm_from(0) * tail_norm_from(0); }
    double norm_total() const { return tail_norm_from(0); }

private:
    std::vector<double> head_;
    double tail_norm_sq_ = 0.0;
};

// Factor loadings: m systematic sources, own-source weights bar_beta_i != 0,
// and cross weights beta[i][j] for assets i > m onto sources j <= m.
struct Loadings {
    int m = 0;
    std::vector<double> bar_beta;
    std::vector<std::vector<double>> beta;  // row i-m-1 holds beta_i^1..beta_i^m for asset i > m

    Loadings() = default;
    Loadings(int m_, std::vector<double> bar_beta_, std::vector<std::vector<double>> beta_);
};

// Exposure to the first k sources; implicitly zero beyond coords size.
class Strategy {
public:
    Strategy() = default;
    explicit Strategy(std::vector<double> coords) : coords_(std::move(coords)) {}
    static Strategy zeros(std::size_t n) { return Strategy(std::vector<double>(n, 0.0)); }

    const std::vector<double>& coords() const { return coords_; }
    std::vector<double>& coords() { return coords_; }
    std::size_t support_size() const { return coords_.size(); }
    double at(std::size_t i) const { return i < coords_.size() ? coords_[i] : 0.0; }
    double norm() const;
    double norm_sq() const;

private:
    std::vector<double> coords_;
};

// Truncated large market: independent discrete sources, drift, optional
// loadings. Immutable after construction and shareable across threads.
class MarketModel {
public:
    MarketModel(std::vector<FactorDistribution> factors, DriftVector drift,
                std::optional<Loadings> loadings = std::nullopt);

    std::size_t n_max() const { return factors_.size(); }
    const FactorDistribution& factor(std::size_t i) const { return factors_[i]; }  // 0-based
    const std::vector<FactorDistribution>& factors() const { return factors_; }
    const DriftVector& drift() const { return drift_; }
    double b(std::size_t i) const { return drift_.at(i); }  // 0-based
    bool has_loadings() const { return loadings_.has_value(); }
    const Loadings& loadings() const;

    // Product-state count of the first k factors, saturating at cap_hint.
    std::uint64_t product_state_count(std::size_t k, std::uint64_t saturate_at) const;

private:
    std::vector<FactorDistribution> factors_;
    DriftVector drift_;
    std::optional<Loadings> loadings_;
};

// V^{x,h} = x + sum_i h_i (eps_i - b_i). The scenario must carry a value
// for every coordinate the strategy touches.
double wealth(const MarketModel& model, double x, const Strategy& h,
              std::span<const double> scenario);

// R_i for every asset i <= n_max given realized source values.
std::vector<double> returns_from_factors(const MarketModel& model,
                                         std::span<const double> scenario);

// Change of coordinates: source exposure h with <h, eps-b> equal to the
// asset portfolio's return sum_i a_i R_i, identically in the scenario.
Strategy asset_to_source(const MarketModel& model, const std::vector<double>& asset_portfolio);

// Inverse of asset_to_source (divide by bar_beta, back-substitute).
std::vector<double> source_to_asset(const MarketModel& model, const Strategy& h);

}  // namespace aptkit
