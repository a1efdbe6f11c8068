#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aptkit/market.hpp"

namespace aptkit {

// How expectations are evaluated. Exact mode enumerates the product law of
// the first k factors (the oracle); monte_carlo uses one seeded stream per
// experiment so all segments share scenarios (common random numbers).
struct ExpectationBackend {
    enum class Mode { exact, monte_carlo };

    Mode mode = Mode::exact;
    std::uint64_t exact_cap = 2'000'000;  // max product-state count
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    int threads = 1;

    static ExpectationBackend exact(std::uint64_t cap = 2'000'000, int threads = 1) {
        return {Mode::exact, cap, 0, 0, threads};
    }
    static ExpectationBackend monte_carlo(std::uint64_t samples, std::uint64_t seed,
                                          int threads = 1) {
        return {Mode::monte_carlo, 2'000'000, samples, seed, threads};
    }
    bool is_exact() const { return mode == Mode::exact; }
};

// f sees the realized values of the first k factors and writes `dim`
// contributions. Contributions are probability-weighted and accumulated
// blockwise with compensated sums; blocks combine in index order, so the
// result is bit-identical for any worker count.
using MultiFn = std::function<void(std::span<const double> scenario, double* out)>;

void expect_multi(const MarketModel& model, const ExpectationBackend& backend, std::size_t k,
                  std::size_t dim, const MultiFn& f, double* out);

double expect(const MarketModel& model, const ExpectationBackend& backend, std::size_t k,
              const std::function<double(std::span<const double>)>& f);

// Mean together with the Monte Carlo standard error (zero in exact mode).
struct ExpectStats {
    double mean = 0.0;
    double std_error = 0.0;
};
ExpectStats expect_with_stats(const MarketModel& model, const ExpectationBackend& backend,
                              std::size_t k,
                              const std::function<double(std::span<const double>)>& f);

// Exact enumeration of the product states of the first k factors, in the
// canonical order: factor index major (factor 1 varies slowest), support
// index minor, probabilities multiplied left to right. Serial.
void enumerate_product_states(
    const MarketModel& model, std::size_t k,
    const std::function<void(std::uint64_t state, std::span<const double> scenario, double prob)>&
        visit);

// Scenario value of factor `slot` (0-based) in sample `sample` of the
// seeded stream. Counter-based, so independent of any partitioning.
double mc_factor_value(const MarketModel& model, std::uint64_t seed, std::uint64_t sample,
                       std::size_t slot);

}  // namespace aptkit
