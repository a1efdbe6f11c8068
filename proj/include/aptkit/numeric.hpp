#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace aptkit {

// Neumaier-compensated accumulator. Reductions that must be reproducible
// across thread counts accumulate per fixed-size block and combine blocks
// in index order.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// SplitMix64. Used both as a sequential generator and as a stateless
// counter-based mixer, so streams are independent of worker partitioning.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_normal();

    // Uniform on the unit sphere in R^n (n >= 1).
    std::vector<double> next_unit_vector(int n);

private:
    std::uint64_t state_;
};

// Stateless draw: uniform in [0,1) determined by (seed, sample, slot).
inline double counter_u01(std::uint64_t seed, std::uint64_t sample, std::uint64_t slot) {
    std::uint64_t z = splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (sample + 1)));
    z = splitmix64(z ^ (0xD1B54A32D192ED03ULL * (slot + 1)));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9
// absolute). Pure arithmetic, so reproducible across platforms.
double inverse_normal_cdf(double p);

// Locale-free decimal <-> double. Shortest round-trip representation on
// output; both functions reject locale drift by construction.
std::string real_to_string(double v);
double real_from_string(const std::string& s);

double l2_norm(const std::vector<double>& v);

}  // namespace aptkit
