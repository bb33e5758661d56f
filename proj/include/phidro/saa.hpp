#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "phidro/divergence.hpp"
#include "phidro/risk_oracle.hpp"

namespace phidro {

/// Sampled atom: index into the source instance, its payoff and multiplicity.
struct EmpiricalAtom {
    std::size_t index;
    double x;
    std::uint64_t count;
};

struct EmpiricalMeasure {
    std::vector<EmpiricalAtom> atoms;  ///< sorted by source index
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

/**
 * @brief Counter-based uniform stream: the value at position j depends only
 * on (seed, j), so any trial can be replayed without the ones before it.
 *
 * SplitMix64 finalizer applied to seed + (j + 1) * golden gamma.
 */
class CounterStream {
public:
    explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t position) const {
        std::uint64_t z = seed_ + (position + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t position) const {
        return static_cast<double>(bits(position) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
};

/**
 * @brief n i.i.d. draws from the instance's categorical law. Trial t reads
 * stream positions t*n .. t*n + n - 1, so serial and parallel runs agree.
 */
inline EmpiricalMeasure draw_empirical(const FiniteInstance& inst, std::uint64_t n, std::uint64_t seed,
                                       std::uint64_t trial) {
    require(n >= 1, "draw_empirical: n must be >= 1");
    std::vector<double> cumulative;
    std::vector<std::size_t> index;
    double c = 0.0;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (inst.atoms()[i].p == 0.0) continue;
        c += inst.atoms()[i].p;
        cumulative.push_back(c);
        index.push_back(i);
    }
    std::vector<std::uint64_t> counts(index.size(), 0);
    const CounterStream stream(seed);
    const std::uint64_t offset = trial * n;
    for (std::uint64_t j = 0; j < n; ++j) {
        const double u = stream.uniform(offset + j);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t k = std::min<std::size_t>(it - cumulative.begin(), index.size() - 1);
        ++counts[k];
    }
    EmpiricalMeasure emp;
    emp.n = n;
    emp.seed = seed;
    emp.trial = trial;
    for (std::size_t k = 0; k < index.size(); ++k)
        if (counts[k] > 0) emp.atoms.push_back({index[k], inst.atoms()[index[k]].x, counts[k]});
    return emp;
}

/// The instance with the empirical measure in place of P.
inline FiniteInstance empirical_instance(const EmpiricalMeasure& emp, const FiniteInstance& inst) {
    require(emp.n >= 1 && !emp.atoms.empty(), "empirical measure is empty");
    std::vector<Atom> atoms;
    atoms.reserve(emp.atoms.size());
    std::uint64_t total = 0;
    for (const auto& a : emp.atoms) {
        require(a.index < inst.size() && inst.atoms()[a.index].x == a.x,
                "empirical atom does not belong to the instance");
        atoms.push_back({a.x, static_cast<double>(a.count) / static_cast<double>(emp.n)});
        total += a.count;
    }
    require(total == emp.n, "empirical counts do not sum to n");
    return FiniteInstance(std::move(atoms), inst.B(), inst.tau(), inst.spec());
}

/// R_n(X): worst-case expectation under the empirical measure.
inline double saa_estimate(const EmpiricalMeasure& emp, const FiniteInstance& inst, double tol = kDefaultTol) {
    return worst_case_expectation(empirical_instance(emp, inst), tol).primal;
}

/// R_{n,L}(X): the truncated worst-case expectation under the empirical measure.
inline double truncated_saa_estimate(const EmpiricalMeasure& emp, const FiniteInstance& inst, double L,
                                     double tol = kDefaultTol) {
    return truncated_risk(empirical_instance(emp, inst), L, tol);
}

enum class TruncationMode { Sandwich, TheoremRate };

/// g^{-1}(c*B*tau/eps) with c = 2 (Sandwich) or 32 (TheoremRate); 1 when the argument is 0.
inline double truncation_level(const DivergenceSpec& spec, double B, double tau, double eps, TruncationMode mode) {
    require(eps > 0.0, "truncation_level: eps must be positive");
    require(B > 0.0 && tau >= 0.0, "truncation_level: B must be positive and tau nonnegative");
    const double c = mode == TruncationMode::Sandwich ? 2.0 : 32.0;
    const double arg = c * B * tau / eps;
    if (arg <= 0.0) return 1.0;
    return growth_inverse(spec, arg);
}

}  // namespace phidro
