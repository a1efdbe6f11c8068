#include "aptkit/utility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aptkit/claim.hpp"
#include "aptkit/errors.hpp"
#include "aptkit/numeric.hpp"

namespace aptkit {

namespace {

// Log-spaced offsets 10^-8 .. 10^6, both grids reuse them.
std::vector<double> log_offsets() {
    std::vector<double> out;
    const int points = 281;
    for (int k = 0; k < points; ++k) {
        double e = -8.0 + 14.0 * k / (points - 1);
        out.push_back(std::pow(10.0, e));
    }
    return out;
}

}  // namespace

double Utility::base_value(double x) const {
    if (const auto* p = std::get_if<TwoSidedPower>(&base_)) {
        double y = x - p->anchor;
        if (y >= 0.0) return (std::pow(1.0 + y, 1.0 - p->a) - 1.0) / (1.0 - p->a);
        return -(std::pow(1.0 - y, p->beta) - 1.0) / p->beta;
    }
    const auto& t = std::get<PiecewiseLinear>(base_);
    const auto& xs = t.xs;
    const auto& ys = t.ys;
    if (x <= xs.front()) return ys.front() + t.slopes.front() * (x - xs.front());
    if (x >= xs.back()) return ys.back() + t.slopes.back() * (x - xs.back());
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    return ys[j - 1] + t.slopes[j - 1] * (x - xs[j - 1]);
}

double Utility::base_deriv(double x) const {
    if (const auto* p = std::get_if<TwoSidedPower>(&base_)) {
        double y = x - p->anchor;
        if (y >= 0.0) return std::pow(1.0 + y, -p->a);
        return std::pow(1.0 - y, p->beta - 1.0);
    }
    // right-hand slope
    const auto& t = std::get<PiecewiseLinear>(base_);
    const auto& xs = t.xs;
    if (x < xs.front()) return t.slopes.front();
    if (x >= xs.back()) return t.slopes.back();
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    return t.slopes[j - 1];
}

double Utility::value(double x) const { return out_scale_ * base_value(x) + out_shift_; }

double Utility::deriv(double x) const { return out_scale_ * base_deriv(x); }

const GrowthConstants& Utility::constants() const {
    if (!constants_)
        throw InputError(
            "utility: no growth constants available (piecewise-linear utilities lack the "
            "superlinear left tail the strategy bound requires)");
    return *constants_;
}

bool Utility::strictly_concave() const {
    return std::holds_alternative<TwoSidedPower>(base_);
}

Utility Utility::affine(double a, double b) const {
    if (!(a > 0.0)) throw InputError("utility: affine scale must be > 0");
    Utility u = *this;
    u.out_scale_ *= a;
    u.out_shift_ = a * out_shift_ + b;
    u.constants_.reset();  // raw object; normalize() refits the constants
    return u;
}

std::string Utility::describe() const {
    std::ostringstream os;
    if (const auto* p = std::get_if<TwoSidedPower>(&base_)) {
        os << "two_sided_power(a=" << p->a << ", beta=" << p->beta << ", x0=" << x0_ << ")";
    } else {
        os << "piecewise_linear(" << std::get<PiecewiseLinear>(base_).xs.size() << " knots)";
    }
    if (out_scale_ != 1.0 || out_shift_ != 0.0)
        os << " [scaled " << out_scale_ << ", shifted " << out_shift_ << "]";
    return os.str();
}

Utility Utility::two_sided_power(double a, double beta, double x0) {
    if (!(a > 0.0 && a < 1.0)) throw InputError("utility: two_sided_power needs a in (0,1)");
    if (!(beta > 1.0)) throw InputError("utility: two_sided_power needs beta > 1");
    Utility u;
    u.base_ = TwoSidedPower{a, beta, x0};
    u.x0_ = x0;
    double gamma = std::max(beta, 2.0);
    u.constants_ = fit_growth_constants(u, 1.0 / (2.0 * beta), beta,
                                        std::max(1.0, std::pow(2.0, beta - 1.0) / beta), gamma);
    return u;
}

Utility Utility::piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw InputError("utility: piecewise_linear needs >= 2 knots with matching values");
    PiecewiseLinear t;
    t.slopes.resize(xs.size() - 1);
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
        double dx = xs[j + 1] - xs[j];
        if (!(dx > 0.0)) throw InputError("utility: knot abscissae must be strictly increasing");
        t.slopes[j] = (ys[j + 1] - ys[j]) / dx;
        if (!(t.slopes[j] > 0.0))
            throw InputError("utility: piecewise_linear must be strictly increasing");
        if (j > 0 && t.slopes[j] > t.slopes[j - 1] + 1e-12)
            throw InputError("utility: piecewise_linear slopes must be non-increasing (concavity)");
    }
    t.xs = std::move(xs);
    t.ys = std::move(ys);
    Utility u;
    u.x0_ = t.xs.front();
    u.base_ = std::move(t);
    return u;
}

Utility normalize(const Utility& raw, double x0) {
    double d = raw.deriv(x0);
    if (!(d > 0.0))
        throw InputError("utility.normalize: U'(x0) must be > 0 at the chosen x0");
    double v = raw.value(x0);
    Utility u = raw;
    u.x0_ = x0;
    u.out_scale_ = raw.out_scale_ / d;
    u.out_shift_ = (raw.out_shift_ - v) / d;
    if (raw.constants_) {
        GrowthConstants c = *raw.constants_;
        c.c1 /= d;
        c.c2 = c.c2 / d + std::abs(v) / d;
        c.c3 /= d;
        c.c4 = c.c4 / d + std::max(v, 0.0) / d;
        u.constants_ = c;
    } else if (std::holds_alternative<Utility::TwoSidedPower>(u.base_)) {
        const auto& p = std::get<Utility::TwoSidedPower>(u.base_);
        double gamma = std::max(p.beta, 2.0);
        u.constants_ = fit_growth_constants(u, 1.0 / (2.0 * p.beta), p.beta,
                                            std::max(1.0, std::pow(2.0, p.beta - 1.0) / p.beta),
                                            gamma);
    }
    return u;
}

GrowthConstants fit_growth_constants(const Utility& u, double c1, double beta, double c3,
                                     double gamma) {
    GrowthConstants c;
    c.c1 = c1;
    c.beta = beta;
    c.c3 = c3;
    c.gamma = gamma;

    double worst2 = 0.0;
    for (double off : log_offsets()) {
        double x = u.x0() - off;
        double need = c1 * std::pow(std::abs(x), beta) - std::abs(u.value(x));
        worst2 = std::max(worst2, need);
    }
    c.c2 = worst2 > 0.0 ? worst2 * (1.0 + 1e-9) + 1e-12 : 0.0;

    double worst4 = 0.0;
    for (double off : log_offsets()) {
        for (double x : {off, -off}) {
            double uminus = std::max(-u.value(x), 0.0);
            double need = uminus - c3 * std::pow(std::abs(x), gamma);
            worst4 = std::max(worst4, need);
        }
    }
    c.c4 = worst4 > 0.0 ? worst4 * (1.0 + 1e-9) + 1e-12 : 0.0;
    return c;
}

UtilityCheck check_utility(const Utility& u, std::uint64_t seed) {
    UtilityCheck out;
    Rng rng(seed);

    out.concave_ok = true;
    out.increasing_ok = true;
    for (int t = 0; t < 200; ++t) {
        double span = std::pow(10.0, rng.next_u01() * 6.0 - 2.0);
        double x = u.x0() + (rng.next_u01() * 2.0 - 1.0) * span;
        double z = x + rng.next_u01() * span + 1e-6;
        double lam = rng.next_u01();
        double y = lam * x + (1.0 - lam) * z;
        double chord = ((z - y) * u.value(x) + (y - x) * u.value(z)) / (z - x);
        if (u.value(y) < chord - 1e-12 * std::max(1.0, std::abs(chord)))
            out.concave_ok = false;
        for (double delta : {1e-3, 1.0, 10.0})
            if (!(u.value(x + delta) > u.value(x))) out.increasing_ok = false;
    }

    out.normalized_ok =
        std::abs(u.value(u.x0())) <= 1e-10 && std::abs(u.deriv(u.x0()) - 1.0) <= 1e-10;

    if (u.has_constants()) {
        const GrowthConstants& c = u.constants();
        out.lower_growth_ok = true;
        for (double off : log_offsets()) {
            double x = u.x0() - off;
            double viol = c.c1 * std::pow(std::abs(x), c.beta) - c.c2 - std::abs(u.value(x));
            out.max_lower_violation = std::max(out.max_lower_violation, viol);
            if (viol > 1e-9 * std::max(1.0, std::abs(u.value(x)))) out.lower_growth_ok = false;
        }
        out.upper_growth_ok = true;
        for (double off : log_offsets()) {
            for (double x : {off, -off}) {
                double uminus = std::max(-u.value(x), 0.0);
                double viol = uminus - (c.c3 * std::pow(std::abs(x), c.gamma) + c.c4);
                out.max_upper_violation = std::max(out.max_upper_violation, viol);
                if (viol > 1e-9 * std::max(1.0, uminus)) out.upper_growth_ok = false;
            }
        }
    } else {
        out.lower_growth_ok = out.upper_growth_ok = true;  // nothing declared, nothing to check
    }

    out.pass = out.concave_ok && out.increasing_ok && out.normalized_ok && out.lower_growth_ok &&
               out.upper_growth_ok;
    return out;
}

UPlusBoundCheck uplus_bound_check(const Utility& u, const MarketModel& model, double x,
                                  const Strategy& h, const Claim& claim) {
    UPlusBoundCheck out;
    out.ok = true;
    std::size_t k = std::max<std::size_t>(h.support_size(),
                                          static_cast<std::size_t>(claim.depends_on()));
    double acc[2] = {0.0, 0.0};
    ExpectationBackend exact = ExpectationBackend::exact();
    bool all_ok = true;
    expect_multi(model, exact, k, 2,
                 [&](std::span<const double> sc, double* o) {
                     double gain = 0.0;
                     for (std::size_t i = 0; i < h.support_size(); ++i)
                         gain += h.coords()[i] * (sc[i] - model.b(i));
                     double lhs = std::max(u.value(x + gain - claim.payoff(sc)), 0.0);
                     double rhs = std::abs(u.x0()) + std::abs(x + gain);
                     if (lhs > rhs + 1e-12) all_ok = false;
                     o[0] = lhs;
                     o[1] = rhs;
                 },
                 acc);
    out.lhs = acc[0];
    out.rhs = acc[1];
    out.ok = all_ok;
    return out;
}

}  // namespace aptkit
