#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phidro/error.hpp"
#include "phidro/extended_real.hpp"

namespace phidro {

/// Largest density value the numeric routines will represent. Anything that
/// keeps increasing past this point is reported as +inf.
inline constexpr double kDomainCap = 1e12;

enum class DivergenceKind { KL, CVaR, CressieRead, Variation, Burg, NeymanChiSq, Hellinger, EssSup };

enum class GrowthClass { Sublinear, Superlinear, Indicator };

inline const char* to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::Sublinear: return "sublinear";
        case GrowthClass::Superlinear: return "superlinear";
        case GrowthClass::Indicator: return "indicator";
    }
    return "unknown";
}

/**
 * @brief One entry of the closed divergence catalog.
 *
 * Construct through the named factories; they validate parameters.
 */
class DivergenceSpec {
public:
    static DivergenceSpec kl() { return {DivergenceKind::KL, 0.0}; }
    static DivergenceSpec cvar(double alpha) {
        require(alpha > 0.0 && alpha < 1.0, "cvar: alpha must lie in (0, 1)");
        return {DivergenceKind::CVaR, alpha};
    }
    static DivergenceSpec cressie_read(double k) {
        require(std::isfinite(k), "cressie_read: k must be finite");
        require(k != 1.0 && k != -1.0 && k != 0.0, "cressie_read: k must not be -1, 0 or 1");
        return {DivergenceKind::CressieRead, k};
    }
    static DivergenceSpec variation() { return {DivergenceKind::Variation, 0.0}; }
    static DivergenceSpec burg() { return {DivergenceKind::Burg, 0.0}; }
    static DivergenceSpec neyman_chi2() { return {DivergenceKind::NeymanChiSq, 0.0}; }
    static DivergenceSpec hellinger() { return {DivergenceKind::Hellinger, 0.0}; }
    static DivergenceSpec ess_sup() { return {DivergenceKind::EssSup, 0.0}; }

    DivergenceKind kind() const { return kind_; }

    /// CVaR level; only meaningful for DivergenceKind::CVaR.
    double alpha() const { return param_; }
    /// Cressie-Read exponent; only meaningful for DivergenceKind::CressieRead.
    double k() const { return param_; }

    double domain_upper() const {
        return kind_ == DivergenceKind::CVaR ? 1.0 / param_ : std::numeric_limits<double>::infinity();
    }
    bool bounded_domain() const { return kind_ == DivergenceKind::CVaR; }

    GrowthClass growth_class() const {
        switch (kind_) {
            case DivergenceKind::KL: return GrowthClass::Superlinear;
            case DivergenceKind::CVaR: return GrowthClass::Indicator;
            case DivergenceKind::CressieRead:
                return param_ > 1.0 ? GrowthClass::Superlinear : GrowthClass::Sublinear;
            case DivergenceKind::EssSup:
            case DivergenceKind::Variation:
            case DivergenceKind::Burg:
            case DivergenceKind::NeymanChiSq:
            case DivergenceKind::Hellinger: return GrowthClass::Sublinear;
        }
        return GrowthClass::Sublinear;
    }

    /// phi takes only the values 0 and +inf.
    bool is_indicator() const {
        return kind_ == DivergenceKind::CVaR || kind_ == DivergenceKind::EssSup;
    }

    std::string name() const {
        switch (kind_) {
            case DivergenceKind::KL: return "kl";
            case DivergenceKind::CVaR: return "cvar";
            case DivergenceKind::CressieRead: return "cressie_read";
            case DivergenceKind::Variation: return "variation";
            case DivergenceKind::Burg: return "burg";
            case DivergenceKind::NeymanChiSq: return "neyman_chi2";
            case DivergenceKind::Hellinger: return "hellinger";
            case DivergenceKind::EssSup: return "ess_sup";
        }
        return "unknown";
    }

    friend bool operator==(const DivergenceSpec&, const DivergenceSpec&) = default;

private:
    DivergenceSpec(DivergenceKind kind, double param) : kind_(kind), param_(param) {}

    DivergenceKind kind_;
    double param_;
};

inline GrowthClass classify_growth(const DivergenceSpec& spec) { return spec.growth_class(); }

namespace detail {

inline double inf() { return std::numeric_limits<double>::infinity(); }

/// phi as a raw double, +inf outside the domain.
inline double phi(const DivergenceSpec& s, double x) {
    if (!(x >= 0.0)) return inf();
    if (x == 1.0) return 0.0;
    if (std::isinf(x)) return s.kind() == DivergenceKind::EssSup ? 0.0 : inf();
    const double t = x - 1.0;
    // log1p(t) loses x itself once x - 1 rounds to -1
    const double logx = x < 0.5 ? std::log(x) : std::log1p(t);
    switch (s.kind()) {
        case DivergenceKind::KL:
            return x == 0.0 ? 1.0 : x * logx - t;
        case DivergenceKind::CVaR:
            return x <= s.domain_upper() ? 0.0 : inf();
        case DivergenceKind::CressieRead: {
            const double k = s.k();
            if (x == 0.0) return k > 0.0 ? 1.0 / k : inf();
            return (std::expm1(k * logx) - k * t) / (k * (k - 1.0));
        }
        case DivergenceKind::Variation:
            return std::abs(t);
        case DivergenceKind::Burg:
            return x == 0.0 ? inf() : t - logx;
        case DivergenceKind::NeymanChiSq:
            return x == 0.0 ? inf() : t * t / x;
        case DivergenceKind::Hellinger: {
            const double r = std::sqrt(x) - 1.0;
            return r * r;
        }
        case DivergenceKind::EssSup:
            return 0.0;
    }
    return inf();
}

/// The maximand x*y - lambda*phi(x), -inf outside the domain.
inline double maximand(const DivergenceSpec& s, double lambda, double y, double x) {
    const double p = phi(s, x);
    if (std::isinf(p)) return -inf();
    if (lambda == 0.0) return x * y;
    return x * y - lambda * p;
}

/**
 * Smallest maximizer of x*y - lambda*phi(x) over the closed domain.
 * Returns +inf when the maximand keeps increasing (sup not attained).
 */
inline double smallest_maximizer(const DivergenceSpec& s, double lambda, double y) {
    const double U = s.domain_upper();
    if (lambda == 0.0 || s.is_indicator()) {
        return y > 0.0 ? U : 0.0;
    }
    const double r = y / lambda;
    switch (s.kind()) {
        case DivergenceKind::KL:
            return std::exp(r);
        case DivergenceKind::CressieRead: {
            const double k = s.k();
            if (k > 1.0) {
                const double base = 1.0 + (k - 1.0) * r;
                return base <= 0.0 ? 0.0 : std::pow(base, 1.0 / (k - 1.0));
            }
            const double base = 1.0 - (1.0 - k) * r;
            return base <= 0.0 ? inf() : std::pow(base, -1.0 / (1.0 - k));
        }
        case DivergenceKind::Variation:
            if (r <= -1.0) return 0.0;
            if (r <= 1.0) return 1.0;
            return inf();
        case DivergenceKind::Burg:
            return r < 1.0 ? 1.0 / (1.0 - r) : inf();
        case DivergenceKind::NeymanChiSq:
            return r < 1.0 ? 1.0 / std::sqrt(1.0 - r) : inf();
        case DivergenceKind::Hellinger: {
            if (!(r < 1.0)) return inf();
            const double s1 = 1.0 - r;
            return 1.0 / (s1 * s1);
        }
        default:
            return inf();
    }
}

/// Conjugate value at an interior maximizer, using cancellation-free forms.
inline double interior_conjugate(const DivergenceSpec& s, double lambda, double y, double xstar) {
    const double r = y / lambda;
    switch (s.kind()) {
        case DivergenceKind::KL:
            return lambda * std::expm1(r);
        case DivergenceKind::Burg:
            return -lambda * std::log1p(-r);
        case DivergenceKind::NeymanChiSq:
            return 2.0 * y / (1.0 + std::sqrt(1.0 - r));
        case DivergenceKind::Hellinger:
            return lambda * y / (lambda - y);
        case DivergenceKind::CressieRead:
            if (s.k() == 2.0) return xstar == 0.0 ? -0.5 * lambda : y + y * y / (2.0 * lambda);
            return maximand(s, lambda, y, xstar);
        default:
            return maximand(s, lambda, y, xstar);
    }
}

inline void check_lambda(double lambda) {
    require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and nonnegative");
}

}  // namespace detail

/// phi(x); +inf for x < 0 or outside the domain.
inline ExtendedReal phi_value(const DivergenceSpec& spec, double x) {
    if (std::isnan(x)) return ExtendedReal::infinity();
    return ExtendedReal(detail::phi(spec, x));
}

/**
 * @brief (lambda*phi)^*(y) = sup_x x*y - lambda*phi(x).
 *
 * At lambda = 0 this is the support function of the closed domain. A
 * maximizer beyond kDomainCap on an unbounded domain gives +inf.
 */
inline ExtendedReal conjugate(const DivergenceSpec& spec, double lambda, double y) {
    detail::check_lambda(lambda);
    require(std::isfinite(y), "conjugate: y must be finite");
    const double x = detail::smallest_maximizer(spec, lambda, y);
    if (!spec.bounded_domain() && !(x <= kDomainCap)) return ExtendedReal::infinity();
    if (lambda == 0.0 || spec.is_indicator()) return ExtendedReal(x * std::max(y, 0.0));
    return ExtendedReal(detail::interior_conjugate(spec, lambda, y, x));
}

/// sup over x in [0, L] of x*y - lambda*phi(x). Always finite.
inline double truncated_conjugate(const DivergenceSpec& spec, double lambda, double y, double L) {
    detail::check_lambda(lambda);
    require(L >= 1.0, "truncated_conjugate: L must be >= 1");
    require(std::isfinite(y), "truncated_conjugate: y must be finite");
    const double upper = std::min(L, spec.domain_upper());
    const double x = detail::smallest_maximizer(spec, lambda, y);
    if (lambda == 0.0 || spec.is_indicator()) return std::clamp(x, 0.0, upper) * y;
    if (x <= upper) return detail::interior_conjugate(spec, lambda, y, x);
    return detail::maximand(spec, lambda, y, std::clamp(x, 0.0, upper));
}

/// Result of a numeric conjugate evaluation.
struct NumericConjugate {
    ExtendedReal value;
    double argmax;  ///< +inf when value is +inf
};

/**
 * @brief Numeric sup of x*y - lambda*phi(x): doubling bracket up to
 * kDomainCap, then golden section until the bracket is below tol.
 *
 * Independent of the closed forms used by conjugate(). Throws
 * NonConvergence if the bracket does not shrink within 500 steps.
 */
inline NumericConjugate conjugate_numeric_detail(const DivergenceSpec& spec, double lambda, double y,
                                                 double tol) {
    require(lambda > 0.0 && std::isfinite(lambda), "conjugate_numeric: lambda must be positive");
    require(tol > 0.0, "conjugate_numeric: tol must be positive");
    require(std::isfinite(y), "conjugate_numeric: y must be finite");
    auto h = [&](double x) { return detail::maximand(spec, lambda, y, x); };

    const double upper = std::min(spec.domain_upper(), kDomainCap);
    double lo = 0.0, mid = std::min(1.0, upper), hi = std::min(2.0, upper);
    if (hi > mid && h(hi) > h(mid)) {
        for (;;) {
            lo = mid;
            mid = hi;
            hi = std::min(2.0 * hi, upper);
            if (hi == mid) {
                if (!spec.bounded_domain() && h(upper) > h(upper * (1.0 - 1e-6)))
                    return {ExtendedReal::infinity(), detail::inf()};
                break;
            }
            if (h(hi) <= h(mid)) break;
        }
    }

    constexpr double kInvPhi = 0.6180339887498949;
    constexpr int kBudget = 500;
    double a = lo, b = hi;
    double best_x = mid, best = h(mid);
    for (double e : {a, b}) {
        const double v = h(e);
        if (v > best) best = v, best_x = e;
    }
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double hc = h(c), hd = h(d);
    int it = 0;
    for (; it < kBudget && (b - a) > tol * std::max(1.0, std::abs(c)); ++it) {
        if (hc >= hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - kInvPhi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + kInvPhi * (b - a);
            hd = h(d);
        }
    }
    if (it == kBudget) throw Error(ErrorKind::NonConvergence, "conjugate_numeric: golden section did not converge");
    for (auto [x, v] : {std::pair{c, hc}, std::pair{d, hd}}) {
        if (v > best) best = v, best_x = x;
    }
    return {ExtendedReal(best), best_x};
}

inline ExtendedReal conjugate_numeric(const DivergenceSpec& spec, double lambda, double y, double tol) {
    return conjugate_numeric_detail(spec, lambda, y, tol).value;
}

/// inf over x' >= x of phi(x')/x'. phi(x)/x is nondecreasing on [1, inf) for
/// every catalog entry, so the infimum sits at x' = x.
inline ExtendedReal growth_value(const DivergenceSpec& spec, double x) {
    require(x >= 1.0, "growth_value: x must be >= 1");
    if (std::isinf(x)) return ExtendedReal::infinity();
    if (spec.kind() == DivergenceKind::KL) return ExtendedReal(std::log(x) - 1.0 + 1.0 / x);
    return ExtendedReal(detail::phi(spec, x) / x);
}

/**
 * @brief Least x >= 1 with growth_value(x) >= y, to relative 1e-12.
 *
 * Returns the upper end of the final bisection bracket so that the
 * returned point always satisfies g(x) >= y.
 */
inline double growth_inverse(const DivergenceSpec& spec, double y) {
    require(y > 0.0 && !std::isnan(y), "growth_inverse: y must be positive");
    if (spec.kind() == DivergenceKind::CVaR) return spec.domain_upper();
    auto g = [&](double x) { return growth_value(spec, x).value(); };
    double lo = 1.0, hi = 2.0;
    while (g(hi) < y) {
        if (hi >= kDomainCap)
            throw Error(ErrorKind::GrowthUnbounded,
                        "growth_inverse: no x <= 1e12 reaches growth level " + std::to_string(y) +
                            " for " + spec.name());
        lo = hi;
        hi = std::min(2.0 * hi, kDomainCap);
    }
    while (hi - lo > 1e-12 * hi) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        (g(m) >= y ? hi : lo) = m;
    }
    return hi;
}

/**
 * Half-width delta of an interval [1-delta, 1+delta] inside the interior of
 * dom(phi), capped at 1/2. Zero means the nontriviality assumption fails.
 */
inline double nontrivial_radius(const DivergenceSpec& spec) {
    const double upper = spec.domain_upper();
    return 0.5 * std::min(1.0, upper - 1.0);
}

}  // namespace phidro
