#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "phidro/divergence.hpp"
#include "phidro/error.hpp"
#include "phidro/extended_real.hpp"
#include "phidro/search.hpp"

namespace phidro {

struct Atom {
    double x;  ///< payoff
    double p;  ///< probability
};

/**
 * @brief Finite nominal measure with payoffs, payoff bound B and radius tau.
 *
 * Immutable after construction; the constructor enforces the invariants.
 */
class FiniteInstance {
public:
    FiniteInstance(std::vector<Atom> atoms, double B, double tau, DivergenceSpec spec)
        : atoms_(std::move(atoms)), B_(B), tau_(tau), spec_(spec) {
        require(!atoms_.empty(), "instance: at least one atom is required");
        require(B_ > 0.0 && std::isfinite(B_), "instance: B must be positive and finite");
        require(tau_ >= 0.0 && std::isfinite(tau_), "instance: tau must be nonnegative and finite");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            const std::string at = "instance: atom " + std::to_string(i);
            require(std::isfinite(a.x), at + " has a non-finite payoff");
            require(std::abs(a.x) <= B_, at + " payoff exceeds B in absolute value");
            require(a.p >= 0.0 && a.p <= 1.0, at + " probability outside [0, 1]");
            total += a.p;
        }
        require(std::abs(total - 1.0) <= 1e-12, "instance: probabilities must sum to 1");
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double B() const { return B_; }
    double tau() const { return tau_; }
    const DivergenceSpec& spec() const { return spec_; }

    double expectation() const {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.p * a.x;
        return s;
    }

    /// Largest payoff among atoms with positive probability.
    double ess_sup() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& a : atoms_)
            if (a.p > 0.0) m = std::max(m, a.x);
        return m;
    }

private:
    std::vector<Atom> atoms_;
    double B_;
    double tau_;
    DivergenceSpec spec_;
};

enum class DualStatus { Converged, BoxBoundary, MaxIter };

inline const char* to_string(DualStatus s) {
    switch (s) {
        case DualStatus::Converged: return "converged";
        case DualStatus::BoxBoundary: return "box_boundary";
        case DualStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

struct DualPoint {
    double lambda;
    double mu;
    double value;
    DualStatus status;
};

/// Primal/dual solution with feasibility diagnostics.
struct RiskReport {
    double primal = 0.0;
    double dual = 0.0;
    std::vector<double> density;  ///< zeta per atom, 0 on atoms with p = 0
    double gap = 0.0;
    double tolerance = 0.0;
    double mean_residual = 0.0;        ///< |sum p*zeta - 1|
    double divergence_residual = 0.0;  ///< max(0, sum p*phi(zeta) - tau)
    double min_density = 0.0;
    double lambda = 0.0;
    double mu = 0.0;
    std::string method;
};

inline constexpr double kDefaultTol = 1e-9;
inline constexpr int kAxisBudget = 200;

/// Conjugate term (lambda*phi)^*(y), or its truncation when L is given.
inline ExtendedReal conjugate_term(const DivergenceSpec& spec, double lambda, double y,
                                   std::optional<double> L) {
    if (L) return ExtendedReal(truncated_conjugate(spec, lambda, y, *L));
    return conjugate(spec, lambda, y);
}

/// f(lambda, mu) = lambda*tau + mu + E_P[(lambda*phi)^*(X - mu)].
inline ExtendedReal dual_objective(const FiniteInstance& inst, double lambda, double mu,
                                   std::optional<double> L = std::nullopt) {
    require(lambda >= 0.0 && std::isfinite(lambda), "dual_objective: lambda must be nonnegative");
    require(std::isfinite(mu), "dual_objective: mu must be finite");
    ExtendedReal total(lambda * inst.tau() + mu);
    for (const auto& a : inst.atoms()) {
        if (a.p == 0.0) continue;
        total += a.p * conjugate_term(inst.spec(), lambda, a.x - mu, L);
        if (total.is_infinite()) break;
    }
    return total;
}

/// Smallest lambda giving restriction bias lambda*tau <= tol/2.
inline double default_lambda_lo(double tau, double tol) {
    if (tau <= 0.0) return 1e-12;
    return std::max(1e-12, tol / (2.0 * tau));
}

/**
 * @brief Minimizes the dual objective over [lambda_lo, 2B/tau] x [-B, B].
 *
 * Nested golden-section search, outer axis lambda, inner axis mu, each
 * bracketed to width tol (relative once the coordinate exceeds 1).
 */
inline DualPoint dual_minimize(const FiniteInstance& inst, double lambda_lo, double tol,
                               std::optional<double> L = std::nullopt) {
    require(tol > 0.0, "dual_minimize: tol must be positive");
    require(lambda_lo >= 0.0 && std::isfinite(lambda_lo), "dual_minimize: lambda_lo must be nonnegative");
    if (L) require(*L >= 1.0, "dual_minimize: L must be >= 1");
    const auto& spec = inst.spec();
    const double B = inst.B(), tau = inst.tau();
    double lambda_hi;
    if (tau > 0.0) {
        lambda_hi = 2.0 * B / tau;
        require(lambda_lo <= lambda_hi, "dual_minimize: lambda_lo exceeds 2B/tau");
    } else {
        require(spec.is_indicator(), "dual_minimize: tau = 0 leaves lambda unbounded for this divergence");
        lambda_hi = lambda_lo;
    }
    if (lambda_lo == 0.0 && !L && !spec.bounded_domain() && !spec.is_indicator())
        throw Error(ErrorKind::Validation, "dual_minimize: lambda_lo must be positive for an unbounded domain");

    bool inner_ok = true;
    double best_mu = 0.0;
    auto f = [&](double lambda, double mu) { return dual_objective(inst, lambda, mu, L).value(); };
    auto inner = [&](double lambda) {
        auto r = detail::golden_minimize([&](double mu) { return f(lambda, mu); }, -B, B, tol, kAxisBudget);
        if (!r.converged) inner_ok = false;
        return r;
    };
    auto outer = detail::golden_minimize([&](double lambda) { return inner(lambda).value; }, lambda_lo,
                                         lambda_hi, tol, kAxisBudget);
    const auto in = inner(outer.arg);
    best_mu = in.arg;

    DualStatus status = DualStatus::Converged;
    if (!outer.converged || !inner_ok) {
        status = DualStatus::MaxIter;
    } else if (lambda_hi > lambda_lo && outer.arg >= lambda_hi - tol * std::max(1.0, lambda_hi)) {
        status = DualStatus::BoxBoundary;
    }
    return {outer.arg, best_mu, in.value, status};
}

namespace detail {

/// theta*a + (1-theta)*b, kept inside [min(a,b), max(a,b)] despite rounding.
inline double mix(double theta, double a, double b) {
    if (a == b) return a;
    return std::clamp(theta * a + (1.0 - theta) * b, std::min(a, b), std::max(a, b));
}

struct PrimalSolution {
    std::vector<double> zeta;
    double lambda = 0.0;
    double mu = 0.0;
};

/**
 * Recovers the optimal density from the Lagrangian maximizers on a
 * support with p_i > 0, each zeta_i boxed to [0, min(domain, cap, 1/p_i)].
 * mu is bisected to hit mean one, lambda to hit the divergence budget;
 * at both steps the two bracket ends are mixed so the constraint holds.
 */
inline PrimalSolution optimality_primal(const std::vector<double>& x, const std::vector<double>& p,
                                        const DivergenceSpec& spec, double tau, double cap,
                                        double lambda_lo, double lambda_hi) {
    const std::size_t m = x.size();
    std::vector<double> upper(m);
    for (std::size_t i = 0; i < m; ++i) upper[i] = std::min({spec.domain_upper(), cap, 1.0 / p[i]});

    auto zeta_at = [&](double lambda, double mu, std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            z[i] = std::clamp(smallest_maximizer(spec, lambda, x[i] - mu), 0.0, upper[i]);
            s += p[i] * z[i];
        }
        return s;
    };
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());

    struct Inner {
        std::vector<double> z;
        double mu;
    };
    auto mean_one = [&](double lambda) {
        double a = *xmin - 1.0, b = *xmax + 1.0;
        std::vector<double> za(m), zb(m), zm(m);
        double sa = zeta_at(lambda, a, za), sb = zeta_at(lambda, b, zb);
        for (int it = 0; it < 400 && b - a > 1e-16 * std::max({1.0, std::abs(a), std::abs(b)}); ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            const double sm = zeta_at(lambda, mid, zm);
            if (sm >= 1.0) {
                a = mid, sa = sm;
                za.swap(zm);
            } else {
                b = mid, sb = sm;
                zb.swap(zm);
            }
        }
        const double theta = sa == sb ? 1.0 : std::clamp((1.0 - sb) / (sa - sb), 0.0, 1.0);
        Inner r{std::vector<double>(m), theta * a + (1.0 - theta) * b};
        for (std::size_t i = 0; i < m; ++i) r.z[i] = mix(theta, za[i], zb[i]);
        return r;
    };
    auto budget = [&](const std::vector<double>& z) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += p[i] * phi(spec, z[i]);
        return s;
    };

    Inner lo = mean_one(lambda_lo);
    double phi_lo = budget(lo.z);
    if (phi_lo <= tau) return {lo.z, lambda_lo, lo.mu};

    double a = lambda_lo, b = std::max(lambda_hi, lambda_lo);
    Inner hi = mean_one(b);
    double phi_hi = budget(hi.z);
    for (int it = 0; it < 100 && phi_hi > tau; ++it) {
        a = b, lo = hi, phi_lo = phi_hi;
        b *= 2.0;
        hi = mean_one(b);
        phi_hi = budget(hi.z);
    }
    if (phi_hi > tau) throw Error(ErrorKind::NonConvergence, "primal recovery: no lambda meets the budget");
    for (int it = 0; it < 200 && b / a - 1.0 > 1e-15; ++it) {
        const double mid = std::sqrt(a * b);
        if (mid <= a || mid >= b) break;
        Inner im = mean_one(mid);
        const double pm = budget(im.z);
        if (pm > tau) {
            a = mid, lo = std::move(im), phi_lo = pm;
        } else {
            b = mid, hi = std::move(im), phi_hi = pm;
        }
    }
    const double theta = std::clamp((tau - phi_hi) / (phi_lo - phi_hi), 0.0, 1.0);
    PrimalSolution out{std::vector<double>(m), theta * a + (1.0 - theta) * b, theta * lo.mu + (1.0 - theta) * hi.mu};
    for (std::size_t i = 0; i < m; ++i) out.zeta[i] = mix(theta, lo.z[i], hi.z[i]);
    return out;
}

/**
 * Largest q in [0, 1] with p*phi(q/p) + (1-p)*phi((1-q)/(1-p)) <= tau,
 * the worst-case mass on the larger of two payoffs.
 */
inline double two_point_mass(const DivergenceSpec& spec, double p, double tau) {
    auto c = [&](double q) { return p * phi(spec, q / p) + (1.0 - p) * phi(spec, (1.0 - q) / (1.0 - p)); };
    if (c(1.0) <= tau) return 1.0;
    double lo = p, hi = 1.0;
    while (hi - lo > 1e-17) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (c(mid) <= tau ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

/**
 * @brief Worst-case expectation over the divergence ball, with primal
 * density, dual value and feasibility residuals.
 *
 * Throws GapTooLarge when the primal and dual routes disagree by more
 * than 10 * tol.
 */
inline RiskReport worst_case_expectation(const FiniteInstance& inst, double tol = kDefaultTol) {
    require(tol > 0.0, "worst_case_expectation: tol must be positive");
    const auto& spec = inst.spec();
    const double tau = inst.tau();

    std::vector<std::size_t> support;
    std::vector<double> xs, ps;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (inst.atoms()[i].p > 0.0) {
            support.push_back(i);
            xs.push_back(inst.atoms()[i].x);
            ps.push_back(inst.atoms()[i].p);
        }
    }
    const std::size_t m = support.size();
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());

    RiskReport rep;
    rep.tolerance = tol;
    std::vector<double> zeta(m, 1.0);
    bool solve_dual = true;

    if (tau == 0.0 && !spec.is_indicator()) {
        rep.method = "expectation";
        solve_dual = false;
    } else if (*xmin == *xmax) {
        rep.method = "constant";
    } else if (spec.kind() == DivergenceKind::EssSup) {
        rep.method = "ess_sup";
        double top_mass = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (xs[j] == *xmax) top_mass += ps[j];
        for (std::size_t j = 0; j < m; ++j) zeta[j] = xs[j] == *xmax ? 1.0 / top_mass : 0.0;
    } else if (m == 2) {
        rep.method = "two_point";
        const std::size_t hi = xs[0] > xs[1] ? 0 : 1, lo = 1 - hi;
        const double q = detail::two_point_mass(spec, ps[hi], tau);
        zeta[hi] = q / ps[hi];
        zeta[lo] = (1.0 - q) / ps[lo];
    } else {
        rep.method = "optimality";
        const double lambda_lo = default_lambda_lo(tau, tol);
        const double lambda_hi = tau > 0.0 ? 2.0 * inst.B() / tau : lambda_lo;
        auto sol = detail::optimality_primal(xs, ps, spec, tau, std::numeric_limits<double>::infinity(),
                                             lambda_lo, lambda_hi);
        zeta = std::move(sol.zeta);
    }

    double primal = 0.0, mean = 0.0, budget = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        primal += ps[j] * zeta[j] * xs[j];
        mean += ps[j] * zeta[j];
        budget += ps[j] * detail::phi(spec, zeta[j]);
    }
    rep.primal = primal;
    rep.mean_residual = std::abs(mean - 1.0);
    rep.divergence_residual = std::max(0.0, budget - tau);
    rep.min_density = *std::min_element(zeta.begin(), zeta.end());
    rep.density.assign(inst.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j) rep.density[support[j]] = zeta[j];

    if (solve_dual) {
        const auto dp = dual_minimize(inst, default_lambda_lo(tau, tol), tol * 1e-2);
        if (dp.status == DualStatus::MaxIter)
            throw Error(ErrorKind::NonConvergence, "worst_case_expectation: dual search hit its iteration budget");
        rep.dual = dp.value;
        rep.lambda = dp.lambda;
        rep.mu = dp.mu;
    } else {
        rep.dual = primal;
    }
    rep.gap = std::abs(rep.primal - rep.dual);
    if (rep.gap > 10.0 * tol) {
        throw Error(ErrorKind::GapTooLarge, "worst_case_expectation: primal " + std::to_string(rep.primal) +
                                                " and dual " + std::to_string(rep.dual) + " disagree");
    }
    return rep;
}

/// Worst-case expectation with densities restricted to [0, L].
inline double truncated_risk(const FiniteInstance& inst, double L, double tol = kDefaultTol) {
    require(L >= 1.0, "truncated_risk: L must be >= 1");
    require(tol > 0.0, "truncated_risk: tol must be positive");
    if (inst.tau() == 0.0 && !inst.spec().is_indicator()) return inst.expectation();
    const auto dp = dual_minimize(inst, 0.0, tol * 1e-2, L);
    if (dp.status == DualStatus::MaxIter)
        throw Error(ErrorKind::NonConvergence, "truncated_risk: dual search hit its iteration budget");
    return dp.value;
}

}  // namespace phidro
