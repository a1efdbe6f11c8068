#include "aptkit/expectation.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

namespace {

constexpr std::uint64_t kBlockSize = 16384;

// Decode state -> per-factor support indices (factor 0 most significant).
void decode_state(std::uint64_t state, std::span<const std::size_t> sizes,
                  std::span<std::size_t> idx) {
    for (std::size_t i = sizes.size(); i-- > 0;) {
        idx[i] = static_cast<std::size_t>(state % sizes[i]);
        state /= sizes[i];
    }
}

struct ExactLayout {
    std::vector<std::size_t> sizes;
    std::uint64_t count = 1;
};

ExactLayout exact_layout(const MarketModel& model, std::size_t k,
                         const ExpectationBackend& backend) {
    if (k > model.n_max())
        throw InputError("market.expect: requested " + std::to_string(k) +
                         " factors but the model truncates at " + std::to_string(model.n_max()));
    ExactLayout lay;
    lay.sizes.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        lay.sizes.push_back(model.factor(i).size());
        lay.count *= model.factor(i).size();
        if (lay.count > backend.exact_cap)
            throw InputError(
                "market.expect: product-state count exceeds the exact enumeration cap (" +
                std::to_string(backend.exact_cap) + "); use the monte_carlo backend");
    }
    return lay;
}

// Visits states [begin, end) in canonical order, accumulating dim
// compensated sums of prob * f.
void run_exact_range(const MarketModel& model, const ExactLayout& lay, std::uint64_t begin,
                     std::uint64_t end, std::size_t dim, const MultiFn& f,
                     std::vector<CompensatedSum>& acc) {
    std::size_t k = lay.sizes.size();
    std::vector<std::size_t> idx(k);
    std::vector<double> scenario(k);
    std::vector<double> contrib(dim);
    if (k == 0) {
        // trivial model slice: a single empty state of probability 1
        if (begin == 0 && end > 0) {
            f(std::span<const double>(scenario.data(), 0), contrib.data());
            for (std::size_t d = 0; d < dim; ++d) acc[d].add(contrib[d]);
        }
        return;
    }
    decode_state(begin, lay.sizes, idx);
    for (std::size_t i = 0; i < k; ++i) scenario[i] = model.factor(i).support()[idx[i]];
    for (std::uint64_t s = begin; s < end; ++s) {
        double prob = 1.0;
        for (std::size_t i = 0; i < k; ++i) prob *= model.factor(i).probs()[idx[i]];
        f(std::span<const double>(scenario.data(), k), contrib.data());
        for (std::size_t d = 0; d < dim; ++d) acc[d].add(prob * contrib[d]);
        // odometer increment, last factor fastest
        for (std::size_t i = k; i-- > 0;) {
            if (++idx[i] < lay.sizes[i]) {
                scenario[i] = model.factor(i).support()[idx[i]];
                break;
            }
            idx[i] = 0;
            scenario[i] = model.factor(i).support()[0];
        }
    }
}

void run_mc_range(const MarketModel& model, std::uint64_t seed, std::size_t k, std::uint64_t begin,
                  std::uint64_t end, std::size_t dim, const MultiFn& f,
                  std::vector<CompensatedSum>& acc) {
    std::vector<double> scenario(k);
    std::vector<double> contrib(dim);
    for (std::uint64_t s = begin; s < end; ++s) {
        for (std::size_t i = 0; i < k; ++i) scenario[i] = mc_factor_value(model, seed, s, i);
        f(std::span<const double>(scenario.data(), k), contrib.data());
        for (std::size_t d = 0; d < dim; ++d) acc[d].add(contrib[d]);
    }
}

// Fixed-size blocks are the reduction unit: each block's compensated sum
// depends only on its contents, and blocks combine in index order, so the
// total is independent of how blocks are assigned to workers.
void blockwise_reduce(std::uint64_t total, std::size_t dim, int threads,
                      const std::function<void(std::uint64_t, std::uint64_t,
                                               std::vector<CompensatedSum>&)>& run_range,
                      double* out) {
    std::uint64_t n_blocks = (total + kBlockSize - 1) / kBlockSize;
    if (n_blocks == 0) n_blocks = 1;
    std::vector<std::vector<CompensatedSum>> partials(n_blocks);

    auto run_block = [&](std::uint64_t blk) {
        std::uint64_t begin = blk * kBlockSize;
        std::uint64_t end = std::min(total, begin + kBlockSize);
        partials[blk].assign(dim, CompensatedSum{});
        run_range(begin, end, partials[blk]);
    };

    int workers = std::max(1, threads);
    if (workers == 1 || n_blocks == 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t b = next.fetch_add(1);
                    if (b >= n_blocks) return;
                    run_block(b);
                }
            });
        for (auto& t : pool) t.join();
    }

    std::vector<CompensatedSum> final_acc(dim);
    for (std::uint64_t b = 0; b < n_blocks; ++b)
        for (std::size_t d = 0; d < dim; ++d) final_acc[d].add(partials[b][d].value());
    for (std::size_t d = 0; d < dim; ++d) out[d] = final_acc[d].value();
}

}  // namespace

double mc_factor_value(const MarketModel& model, std::uint64_t seed, std::uint64_t sample,
                       std::size_t slot) {
    return model.factor(slot).sample(counter_u01(seed, sample, slot));
}

void expect_multi(const MarketModel& model, const ExpectationBackend& backend, std::size_t k,
                  std::size_t dim, const MultiFn& f, double* out) {
    if (backend.is_exact()) {
        ExactLayout lay = exact_layout(model, k, backend);
        blockwise_reduce(
            lay.count, dim, backend.threads,
            [&](std::uint64_t b, std::uint64_t e, std::vector<CompensatedSum>& acc) {
                run_exact_range(model, lay, b, e, dim, f, acc);
            },
            out);
        return;
    }
    if (backend.samples == 0) throw InputError("market.expect: monte_carlo needs samples > 0");
    if (k > model.n_max())
        throw InputError("market.expect: requested more factors than the model truncation");
    blockwise_reduce(
        backend.samples, dim, backend.threads,
        [&](std::uint64_t b, std::uint64_t e, std::vector<CompensatedSum>& acc) {
            run_mc_range(model, backend.seed, k, b, e, dim, f, acc);
        },
        out);
    double inv_n = 1.0 / static_cast<double>(backend.samples);
    for (std::size_t d = 0; d < dim; ++d) out[d] *= inv_n;
}

double expect(const MarketModel& model, const ExpectationBackend& backend, std::size_t k,
              const std::function<double(std::span<const double>)>& f) {
    double out = 0.0;
    expect_multi(
        model, backend, k, 1,
        [&](std::span<const double> sc, double* o) { o[0] = f(sc); }, &out);
    return out;
}

ExpectStats expect_with_stats(const MarketModel& model, const ExpectationBackend& backend,
                              std::size_t k,
                              const std::function<double(std::span<const double>)>& f) {
    double moments[2] = {0.0, 0.0};
    expect_multi(
        model, backend, k, 2,
        [&](std::span<const double> sc, double* o) {
            double v = f(sc);
            o[0] = v;
            o[1] = v * v;
        },
        moments);
    ExpectStats st;
    st.mean = moments[0];
    if (!backend.is_exact() && backend.samples > 1) {
        double var = moments[1] - moments[0] * moments[0];
        if (var < 0.0) var = 0.0;
        st.std_error = std::sqrt(var / static_cast<double>(backend.samples - 1));
    }
    return st;
}

void enumerate_product_states(
    const MarketModel& model, std::size_t k,
    const std::function<void(std::uint64_t, std::span<const double>, double)>& visit) {
    ExpectationBackend b = ExpectationBackend::exact();
    ExactLayout lay = exact_layout(model, k, b);
    std::vector<std::size_t> idx(k, 0);
    std::vector<double> scenario(k);
    for (std::size_t i = 0; i < k; ++i) scenario[i] = model.factor(i).support()[0];
    for (std::uint64_t s = 0; s < lay.count; ++s) {
        double prob = 1.0;
        for (std::size_t i = 0; i < k; ++i) prob *= model.factor(i).probs()[idx[i]];
        visit(s, std::span<const double>(scenario.data(), k), prob);
        for (std::size_t i = k; i-- > 0;) {
            if (++idx[i] < lay.sizes[i]) {
                scenario[i] = model.factor(i).support()[idx[i]];
                break;
            }
            idx[i] = 0;
            scenario[i] = model.factor(i).support()[0];
        }
    }
}

}  // namespace aptkit
