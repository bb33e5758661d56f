#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "phidro/divergence.hpp"
#include "phidro/risk_oracle.hpp"

namespace phidro {

/// Constants of the sublinear two-point construction.
struct SublinearConstants {
    double G;      ///< bound on phi(x)/x for x >= Lthr
    double Lthr;   ///< threshold
    double r;      ///< certified risk level
    double p_max;  ///< largest admissible P(omega_1)
    double k;      ///< tau / (G r), at least 2
};

struct HardInstance {
    FiniteInstance instance;
    double guarantee;        ///< R(X) >= guarantee
    std::uint64_t le_cam_n;  ///< sample sizes up to this keep the failure bound
};

namespace detail {

/// floor that ignores representation error just below an integer.
inline std::uint64_t safe_floor(double v) {
    return static_cast<std::uint64_t>(std::floor(v * (1.0 + 1e-12)));
}

inline void require_positive_tau(double tau) {
    require(tau > 0.0 && std::isfinite(tau), "tau must be positive and finite");
}

inline void require_growing(const DivergenceSpec& spec, const char* what) {
    if (spec.growth_class() == GrowthClass::Sublinear)
        throw Error(ErrorKind::Validation, std::string(what) + ": " + spec.name() +
                                               " has sublinear growth; sample complexity can be made arbitrarily large");
}

inline void require_nontrivial(const DivergenceSpec& spec) {
    if (!(nontrivial_radius(spec) > 0.0))
        throw Error(ErrorKind::AssumptionViolated, spec.name() + ": 1 is not interior to the domain");
}

/// (G, Lthr) with phi(x)/x <= G on [Lthr, inf), per catalog entry.
inline std::pair<double, double> slope_bound(const DivergenceSpec& spec) {
    switch (spec.kind()) {
        case DivergenceKind::NeymanChiSq: return {2.0, 2.0};
        case DivergenceKind::CressieRead: return {std::max(1.0, 1.0 / (1.0 - spec.k())), 1.0};
        default: return {1.0, 1.0};
    }
}

}  // namespace detail

/**
 * @brief Constants (G, Lthr, r, p_max, k) for a sublinear divergence.
 *
 * (G, Lthr) come from the catalog and are re-checked on a log grid up to
 * 1e9; r is the largest r <= min(tau/(2G), 1) with phi(1 +- r) <= tau/2.
 */
inline SublinearConstants sublinear_constants(const DivergenceSpec& spec, double tau) {
    detail::require_positive_tau(tau);
    require(spec.growth_class() == GrowthClass::Sublinear, "sublinear_constants: " + spec.name() + " is not sublinear");
    detail::require_nontrivial(spec);
    const auto [G, Lthr] = detail::slope_bound(spec);
    for (int i = 0; i <= 400; ++i) {
        const double x = Lthr * std::pow(1e9 / Lthr, i / 400.0);
        if (detail::phi(spec, x) / x > G * (1.0 + 1e-12))
            throw Error(ErrorKind::AssumptionViolated, "sublinear_constants: slope bound fails for " + spec.name());
    }
    auto worst = [&](double r) { return std::max(detail::phi(spec, 1.0 - r), detail::phi(spec, 1.0 + r)); };
    const double half = 0.5 * tau;
    double r = std::min(tau / (2.0 * G), 1.0);
    if (worst(r) > half) {
        double lo = 0.0, hi = r;
        while (hi - lo > 1e-15 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (worst(mid) <= half ? lo : hi) = mid;
        }
        r = lo;
    }
    return {G, Lthr, r, r / Lthr, tau / (G * r)};
}

/// Witness density (zeta_1, zeta_2) for P(omega_1) = p.
inline std::pair<double, double> sublinear_witness(const SublinearConstants& c, double tau, double p) {
    const double z1 = tau / (c.k * c.G * p);
    if (p == 1.0) return {z1, 1.0};
    return {z1, (1.0 - p * z1) / (1.0 - p)};
}

/// Two-point instance with payoffs (1, 0) on which any estimator fails for n <= 1/(2p).
inline HardInstance sublinear_hard_instance(const DivergenceSpec& spec, double tau, double p) {
    const auto c = sublinear_constants(spec, tau);
    if (!(p > 0.0 && p <= c.p_max))
        throw Error(ErrorKind::POutOfRange, "sublinear_hard_instance: p must lie in (0, " + std::to_string(c.p_max) + "]");
    FiniteInstance inst({{1.0, p}, {0.0, 1.0 - p}}, 1.0, tau, spec);
    return {std::move(inst), c.r, detail::safe_floor(1.0 / (2.0 * p))};
}

/**
 * @brief Two-point instance with payoffs (B, 0) and P(omega_1) =
 * (eps/B) / g^{-1}(tau B / (2 eps)), certified to have R(X) >= eps.
 *
 * Throws EpsTooLarge when the feasibility conditions of q = eps/B fail.
 */
inline HardInstance superlinear_hard_instance(const DivergenceSpec& spec, double tau, double B, double eps) {
    detail::require_positive_tau(tau);
    detail::require_growing(spec, "superlinear_hard_instance");
    detail::require_nontrivial(spec);
    require(B >= 1.0 && std::isfinite(B), "superlinear_hard_instance: B must be >= 1");
    require(eps > 0.0, "superlinear_hard_instance: eps must be positive");
    if (eps >= B) throw Error(ErrorKind::EpsTooLarge, "superlinear_hard_instance: eps must be below B");

    const double L = growth_inverse(spec, tau * B / (2.0 * eps));
    const double q = eps / B;
    const double p = q / L;
    const double half = 0.5 * tau;
    // g^{-1} returns the upper end of its bracket, so p*phi(L) may exceed tau/2 by rounding.
    const bool ok = p > 0.0 && p <= 0.5 && p * detail::phi(spec, L) <= half * (1.0 + 1e-9) &&
                    detail::phi(spec, (1.0 - q) / (1.0 - p)) <= half;
    if (!ok)
        throw Error(ErrorKind::EpsTooLarge,
                    "superlinear_hard_instance: eps = " + std::to_string(eps) + " fails the feasibility check");
    FiniteInstance inst({{B, p}, {0.0, 1.0 - p}}, B, tau, spec);
    return {std::move(inst), eps, detail::safe_floor(L * B / (2.0 * eps))};
}

/// (1 - p)^n / 2.
inline double le_cam_bound(double p, std::uint64_t n) {
    require(p >= 0.0 && p <= 1.0, "le_cam_bound: p must lie in [0, 1]");
    return 0.5 * std::pow(1.0 - p, static_cast<double>(n));
}

/// max(g^{-1}(tau B/(2 eps)) B/(2 eps), B^2/eps^2).
inline double sample_lower_bound(const DivergenceSpec& spec, double tau, double B, double eps) {
    detail::require_growing(spec, "sample_lower_bound");
    require(eps > 0.0 && B > 0.0, "sample_lower_bound: eps and B must be positive");
    detail::require_positive_tau(tau);
    const double L = growth_inverse(spec, tau * B / (2.0 * eps));
    return std::max(L * B / (2.0 * eps), B * B / (eps * eps));
}

/// lambda_(eps), L(eps), M(eps) and Lbar(eps) shared by the upper bounds.
struct BoundConstants {
    double lambda_lo;
    double L;
    double M;
    double Lbar;
};

inline BoundConstants bound_constants(const DivergenceSpec& spec, double tau, double B, double eps) {
    const double lambda_lo = eps / (8.0 * tau);
    const double L = growth_inverse(spec, 32.0 * B * tau / eps);
    return {lambda_lo, L, (3.0 + 2.0 * L) * B, L + 1.0 + 2.0 * (1.0 + L) * B / lambda_lo + tau};
}

enum class BoundMode { Hoeffding, Bernstein, Increment };

namespace detail {

inline double increment_bound(const DivergenceSpec& spec, double tau, double B, double eps, double delta) {
    const BoundConstants c = bound_constants(spec, tau, B, eps);
    // At eps = B the dyadic count log2(B/eps) is zero; one level is the smallest meaningful count.
    const double levels = std::max(1.0, std::log2(B / eps));
    const double ceil_levels = std::max(1.0, std::ceil(std::log2(B / eps)));
    const double log_term =
        std::log(1024.0 * B * B * levels * levels * c.Lbar * c.Lbar / (tau * eps * eps * delta));

    auto sup_on_grid = [&](int points) {
        double best = 0.0;
        for (int i = 0; i < points; ++i) {
            const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            const double e = i == points - 1 ? B : eps * std::pow(B / eps, t);
            best = std::max(best, bound_constants(spec, tau, B, e).M * e);
        }
        return best;
    };
    double sup = sup_on_grid(200);
    for (int points = 400; points <= 204800; points *= 2) {
        const double next = sup_on_grid(points);
        const bool settled = std::abs(next - sup) < 1e-3 * sup;
        sup = next;
        if (settled) break;
    }
    return 4096.0 * sup * log_term * ceil_levels * ceil_levels / (eps * eps) +
           32.0 * c.M * log_term * ceil_levels / eps;
}

}  // namespace detail

/**
 * @brief Explicit sample size guaranteeing |R_n - R| <= eps with
 * probability 1 - delta, per concentration route. Natural logarithms.
 */
inline double sample_upper_bound(const DivergenceSpec& spec, double tau, double B, double eps, double delta,
                                 BoundMode mode) {
    detail::require_growing(spec, "sample_upper_bound");
    detail::require_positive_tau(tau);
    require(B > 0.0 && std::isfinite(B), "sample_upper_bound: B must be positive");
    require(eps > 0.0 && eps <= B, "sample_upper_bound: eps must lie in (0, B]");
    require(delta > 0.0 && delta < 1.0, "sample_upper_bound: delta must lie in (0, 1)");
    const BoundConstants c = bound_constants(spec, tau, B, eps);
    switch (mode) {
        case BoundMode::Hoeffding:
            return 128.0 * c.M * c.M * std::log(256.0 * B * B * c.Lbar * c.Lbar / (tau * eps * eps * delta)) /
                   (eps * eps);
        case BoundMode::Bernstein: {
            const double lg = std::log(256.0 * B * B * c.Lbar / (eps * eps * tau * delta));
            return 2048.0 * c.M * B * lg / (eps * eps) + 32.0 * c.M * lg / eps;
        }
        case BoundMode::Increment:
            return detail::increment_bound(spec, tau, B, eps, delta);
    }
    return 0.0;
}

/// Sample size for E|R_{n,L} - R| <= eps (in-expectation variant).
inline double sample_upper_bound_expectation(const DivergenceSpec& spec, double tau, double B, double eps) {
    detail::require_growing(spec, "sample_upper_bound_expectation");
    detail::require_positive_tau(tau);
    require(eps > 0.0 && B > 0.0, "sample_upper_bound_expectation: eps and B must be positive");
    const BoundConstants c = bound_constants(spec, tau, B, eps);
    return 512.0 * c.M * c.M * std::log(8192.0 * B * B * B * c.Lbar * c.Lbar / (tau * eps * eps * eps)) /
           (eps * eps);
}

/// 4 (sqrt(M mean log(2/delta) / n) + M log(2/delta) / n).
inline double bernstein_width(double M, double mean_bound, std::uint64_t n, double delta) {
    require(M > 0.0 && mean_bound >= 0.0 && n >= 1, "bernstein_width: M > 0, mean_bound >= 0, n >= 1 required");
    require(delta > 0.0 && delta < 1.0, "bernstein_width: delta must lie in (0, 1)");
    const double lg = std::log(2.0 / delta);
    const double nn = static_cast<double>(n);
    return 4.0 * (std::sqrt(M * mean_bound * lg / nn) + M * lg / nn);
}

/// Lipschitz moduli of f_L in mu and lambda (for lambda >= lambda_lo) and its sup-norm bound.
struct LipschitzConstants {
    double mu_modulus;
    double lambda_modulus;
    double value_bound;
};

inline LipschitzConstants lipschitz_constants(double L, double B, double tau, double lambda_lo) {
    require(L >= 1.0 && B > 0.0 && tau > 0.0 && lambda_lo > 0.0, "lipschitz_constants: invalid arguments");
    return {L + 1.0, 2.0 * (1.0 + L) * B / lambda_lo + tau, (3.0 + 2.0 * L) * B};
}

/// Truncation level g^{-1}(4B/lambda_lo) past which truncation leaves the restricted dual unchanged.
inline double truncation_free_level(const DivergenceSpec& spec, double B, double lambda_lo) {
    require(B > 0.0 && lambda_lo > 0.0, "truncation_free_level: B and lambda_lo must be positive");
    return growth_inverse(spec, 4.0 * B / lambda_lo);
}

/// inf{L >= 0 : E_P[zeta - L]_+ <= eps/8} for a density on the instance's atoms.
inline double instance_dependent_level(const FiniteInstance& inst, const std::vector<double>& density, double eps) {
    require(density.size() == inst.size(), "instance_dependent_level: density size mismatch");
    require(eps > 0.0, "instance_dependent_level: eps must be positive");
    const double target = eps / 8.0;
    std::vector<std::pair<double, double>> zp;  // (zeta, p), descending zeta
    for (std::size_t i = 0; i < inst.size(); ++i)
        if (inst.atoms()[i].p > 0.0) zp.emplace_back(density[i], inst.atoms()[i].p);
    std::sort(zp.begin(), zp.end(), [](auto a, auto b) { return a.first > b.first; });
    // Excess above L is linear between consecutive density values.
    double mass = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < zp.size(); ++j) {
        mass += zp[j].second;
        weighted += zp[j].second * zp[j].first;
        const double next = j + 1 < zp.size() ? zp[j + 1].first : 0.0;
        if (weighted - mass * next > target) return std::max(0.0, (weighted - target) / mass);
    }
    return 0.0;
}

/**
 * @brief sup{p <= 1/2 : R(p) <= B/2} for the two-point payoffs (B, 0),
 * found by bisection on the exact two-point oracle.
 */
inline double uniform_risk_threshold(const DivergenceSpec& spec, double tau, double B) {
    detail::require_growing(spec, "uniform_risk_threshold");
    detail::require_positive_tau(tau);
    require(B > 0.0, "uniform_risk_threshold: B must be positive");
    auto risk = [&](double p) { return B * detail::two_point_mass(spec, p, tau); };
    if (risk(0.5) <= 0.5 * B) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (risk(mid) <= 0.5 * B ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace phidro
