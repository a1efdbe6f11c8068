#include "aptkit/distribution.hpp"

#include <cmath>
#include <string>

#include "aptkit/errors.hpp"

namespace aptkit {

FactorDistribution::FactorDistribution(std::vector<double> support, std::vector<double> probs,
                                       int index)
    : support_(std::move(support)), probs_(std::move(probs)), index_(index) {
    if (support_.empty() || support_.size() != probs_.size())
        throw InputError("factor " + std::to_string(index) +
                         ": support and probs must be nonempty and of equal length");
    if (index_ < 1) throw InputError("factor index must be >= 1");
    for (double s : support_)
        if (!std::isfinite(s))
            throw InputError("factor " + std::to_string(index) + ": non-finite support point");
    for (double p : probs_)
        if (!(p > 0.0 && p <= 1.0))
            throw InputError("factor " + std::to_string(index) +
                             ": probabilities must lie in (0,1]");
    cum_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        acc += probs_[k];
        cum_[k] = acc;
    }
    cum_.back() = 1.0;  // guard the last bucket against rounding
}

FactorDistribution FactorDistribution::renormalized(std::vector<double> raw_support,
                                                    std::vector<double> probs, int index) {
    FactorDistribution raw(std::move(raw_support), std::move(probs), index);
    double m = raw.mean();
    double centered_var = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        double d = raw.support_[k] - m;
        centered_var += raw.probs_[k] * d * d;
    }
    if (!(centered_var > 1e-24))
        throw InputError("factor " + std::to_string(index) +
                         ": cannot renormalize a (nearly) degenerate law");
    double inv_sd = 1.0 / std::sqrt(centered_var);
    std::vector<double> scaled(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) scaled[k] = (raw.support_[k] - m) * inv_sd;
    return FactorDistribution(std::move(scaled), raw.probs_, index);
}

FactorDistribution FactorDistribution::rademacher(int index) {
    return FactorDistribution({-1.0, 1.0}, {0.5, 0.5}, index);
}

double FactorDistribution::mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += probs_[k] * support_[k];
    return s;
}

double FactorDistribution::variance() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += probs_[k] * support_[k] * support_[k];
    return s;  // second moment; sources are meant to be centered
}

double FactorDistribution::abs_moment(double gamma) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        s += probs_[k] * std::pow(std::abs(support_[k]), gamma);
    return s;
}

double FactorDistribution::prob_above(double threshold) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        if (support_[k] > threshold) s += probs_[k];
    return s;
}

double FactorDistribution::prob_below(double threshold) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        if (support_[k] < threshold) s += probs_[k];
    return s;
}

double FactorDistribution::sample(double u) const {
    for (std::size_t k = 0; k + 1 < cum_.size(); ++k)
        if (u < cum_[k]) return support_[k];
    return support_.back();
}

}  // namespace aptkit
