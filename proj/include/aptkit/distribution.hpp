#pragma once

#include <cstddef>
#include <vector>

namespace aptkit {

// Discrete law of one random source. A well-formed source is normalized
// (mean 0, variance 1); construction only enforces structural sanity so
// that diagnostics can report normalization failures instead of throwing.
class FactorDistribution {
public:
    FactorDistribution(std::vector<double> support, std::vector<double> probs, int index);

    // Shifts and scales raw support points so the law has mean 0 and
    // variance 1.
    static FactorDistribution renormalized(std::vector<double> raw_support,
                                           std::vector<double> probs, int index);

    // +1/-1 with probability 1/2 each.
    static FactorDistribution rademacher(int index);

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    int index() const { return index_; }
    std::size_t size() const { return support_.size(); }

    double mean() const;
    double variance() const;
    // E |X|^gamma
    double abs_moment(double gamma) const;

    double prob_above(double threshold) const;
    double prob_below(double threshold) const;

    // Inverse-CDF draw from u in [0,1). Returns one of the stored support
    // values bit-exactly.
    double sample(double u) const;

private:
    std::vector<double> support_;
    std::vector<double> probs_;
    std::vector<double> cum_;
    int index_;
};

}  // namespace aptkit
