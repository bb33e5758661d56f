#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "phidro/bounds.hpp"
#include "phidro/risk_oracle.hpp"
#include "phidro/saa.hpp"

namespace phidro {

/// Parameters of a generated two-point hard instance.
struct HardInstanceParams {
    DivergenceSpec spec;
    double tau;
    std::optional<double> p;    ///< sublinear route
    std::optional<double> B;    ///< superlinear route
    std::optional<double> eps;  ///< superlinear route
};

enum class TruncationChoice { Sandwich, TheoremRate, Fixed };

struct TruncationConfig {
    TruncationChoice mode;
    double L = 1.0;  ///< used by Fixed
};

struct ExperimentConfig {
    std::variant<std::monostate, FiniteInstance, HardInstanceParams> instance;
    std::vector<std::uint64_t> n_grid;
    double eps = 0.0;
    double delta = 0.25;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::optional<TruncationConfig> truncation;
    BoundMode bound_mode = BoundMode::Bernstein;
    double tol = kDefaultTol;
    std::string output_path = "-";
    unsigned threads = 1;
};

struct CurvePoint {
    std::uint64_t n;
    std::uint64_t trials;
    double eps;
    double deviation_freq;
    double mean_estimate;
    double std_estimate;
    double r_true;
    std::optional<double> predicted_lb;
    std::optional<double> predicted_ub;
    std::uint64_t seed;
};

struct RunSummary {
    std::size_t rows_written = 0;
    std::size_t failures = 0;
    std::string message;
};

inline void validate(const ExperimentConfig& cfg) {
    require(!std::holds_alternative<std::monostate>(cfg.instance),
            "config field 'instance': one of 'instance' or 'hard_instance' is required");
    require(cfg.trials >= 1, "config field 'trials': must be >= 1");
    require(cfg.eps > 0.0 && std::isfinite(cfg.eps), "config field 'eps': must be positive");
    require(cfg.delta > 0.0 && cfg.delta < 1.0, "config field 'delta': must lie in (0, 1)");
    require(cfg.tol > 0.0, "config field 'tol': must be positive");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        require(cfg.n_grid[i] >= 1, "config field 'n_grid': entries must be >= 1");
        if (i > 0) require(cfg.n_grid[i] > cfg.n_grid[i - 1], "config field 'n_grid': must be strictly increasing");
    }
    if (cfg.truncation && cfg.truncation->mode == TruncationChoice::Fixed)
        require(cfg.truncation->L >= 1.0, "config field 'truncation.L': must be >= 1");
    if (const auto* h = std::get_if<HardInstanceParams>(&cfg.instance)) {
        const bool sub = h->p.has_value();
        const bool sup = h->B.has_value() && h->eps.has_value();
        require(sub != sup, "config field 'hard_instance': give either 'p' or both 'B' and 'eps'");
    }
}

/// Materializes the configured instance.
inline FiniteInstance resolve_instance(const ExperimentConfig& cfg) {
    if (const auto* f = std::get_if<FiniteInstance>(&cfg.instance)) return *f;
    const auto& h = std::get<HardInstanceParams>(cfg.instance);
    if (h.p) return sublinear_hard_instance(h.spec, h.tau, *h.p).instance;
    return superlinear_hard_instance(h.spec, h.tau, *h.B, *h.eps).instance;
}

namespace detail {

/**
 * Runs fn(t) for t in [0, trials) on up to `threads` workers and returns the
 * results indexed by t. On failure, rethrows the error of the smallest
 * failing trial index, tagged with that index.
 */
inline std::vector<double> run_trials(std::uint64_t trials, unsigned threads,
                                      const std::function<double(std::uint64_t)>& fn) {
    std::vector<double> out(trials, 0.0);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::uint64_t failed_at = trials;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= trials || stop.load()) return;
            try {
                out[t] = fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (t < failed_at) failed_at = t, failure = std::current_exception();
                stop.store(true);
            }
        }
    };
    const unsigned n_workers = static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, trials)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const Error& e) {
            throw Error(e.kind(), "trial " + std::to_string(failed_at) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorKind::NonConvergence, "trial " + std::to_string(failed_at) + ": " + e.what());
        }
    }
    return out;
}

struct Moments {
    double mean;
    double std;
};

/// Mean and sample standard deviation, accumulated in index order.
inline Moments moments(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// R_n per trial for trial indices 0..trials-1; truncated estimator when L is given.
inline std::vector<double> saa_trials(const FiniteInstance& inst, std::uint64_t n, std::uint64_t trials,
                                      std::uint64_t seed, std::optional<double> L = std::nullopt,
                                      double tol = kDefaultTol, unsigned threads = 1) {
    return detail::run_trials(trials, threads, [&](std::uint64_t t) {
        const auto emp = draw_empirical(inst, n, seed, t);
        return L ? truncated_saa_estimate(emp, inst, *L, tol) : saa_estimate(emp, inst, tol);
    });
}

/**
 * @brief Frequency of |R_n - R| >= eps over `trials` seeded trials, with
 * the moments of R_n. Predictions are left empty.
 */
inline CurvePoint deviation_frequency(const FiniteInstance& inst, std::uint64_t n, double eps, std::uint64_t trials,
                                      std::uint64_t seed, unsigned threads = 1,
                                      std::optional<double> L = std::nullopt, double tol = kDefaultTol,
                                      std::optional<double> r_true = std::nullopt) {
    require(trials >= 1, "deviation_frequency: trials must be >= 1");
    require(n >= 1, "deviation_frequency: n must be >= 1");
    require(eps > 0.0, "deviation_frequency: eps must be positive");
    const double R = r_true ? *r_true : worst_case_expectation(inst, tol).primal;
    const auto est = saa_trials(inst, n, trials, seed, L, tol, threads);
    std::uint64_t hits = 0;
    for (double r : est)
        if (std::abs(r - R) >= eps) ++hits;
    const auto mo = detail::moments(est);
    return {n, trials, eps, static_cast<double>(hits) / static_cast<double>(trials), mo.mean, mo.std, R,
            std::nullopt, std::nullopt, seed};
}

struct BiasEstimate {
    double mean;
    double std_err;
};

/// Sample mean of R_n and its standard error.
inline BiasEstimate bias_estimate(const FiniteInstance& inst, std::uint64_t n, std::uint64_t trials,
                                  std::uint64_t seed, unsigned threads = 1, double tol = kDefaultTol) {
    require(trials >= 2, "bias_estimate: trials must be >= 2");
    const auto mo = detail::moments(saa_trials(inst, n, trials, seed, std::nullopt, tol, threads));
    return {mo.mean, mo.std / std::sqrt(static_cast<double>(trials))};
}

namespace detail {

inline std::optional<double> configured_truncation(const ExperimentConfig& cfg, const FiniteInstance& inst) {
    if (!cfg.truncation) return std::nullopt;
    switch (cfg.truncation->mode) {
        case TruncationChoice::Fixed: return cfg.truncation->L;
        case TruncationChoice::Sandwich:
            return truncation_level(inst.spec(), inst.B(), inst.tau(), cfg.eps, TruncationMode::Sandwich);
        case TruncationChoice::TheoremRate:
            return truncation_level(inst.spec(), inst.B(), inst.tau(), cfg.eps, TruncationMode::TheoremRate);
    }
    return std::nullopt;
}

inline std::pair<std::optional<double>, std::optional<double>> predictions(const ExperimentConfig& cfg,
                                                                           const FiniteInstance& inst) {
    const auto& spec = inst.spec();
    if (spec.growth_class() == GrowthClass::Sublinear || inst.tau() <= 0.0) return {std::nullopt, std::nullopt};
    std::optional<double> lb, ub;
    try {
        lb = sample_lower_bound(spec, inst.tau(), inst.B(), cfg.eps);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::GrowthUnbounded) throw;
    }
    if (cfg.eps <= inst.B()) {
        try {
            ub = sample_upper_bound(spec, inst.tau(), inst.B(), cfg.eps, cfg.delta, cfg.bound_mode);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::GrowthUnbounded) throw;
        }
    }
    return {lb, ub};
}

}  // namespace detail

/// Streams one CurvePoint per n in n_grid to `sink`, in n order.
inline void complexity_curve(const ExperimentConfig& cfg, const std::function<void(const CurvePoint&)>& sink) {
    validate(cfg);
    if (cfg.n_grid.empty()) return;
    const FiniteInstance inst = resolve_instance(cfg);
    const double R = worst_case_expectation(inst, cfg.tol).primal;
    const auto L = detail::configured_truncation(cfg, inst);
    const auto [lb, ub] = detail::predictions(cfg, inst);
    for (std::uint64_t n : cfg.n_grid) {
        auto pt = deviation_frequency(inst, n, cfg.eps, cfg.trials, cfg.seed, cfg.threads, L, cfg.tol, R);
        pt.predicted_lb = lb;
        pt.predicted_ub = ub;
        sink(pt);
    }
}

inline std::vector<CurvePoint> complexity_curve(const ExperimentConfig& cfg) {
    std::vector<CurvePoint> out;
    complexity_curve(cfg, [&](const CurvePoint& p) { out.push_back(p); });
    return out;
}

inline constexpr const char* kCsvHeader =
    "n,trials,eps,deviation_freq,mean_estimate,std_estimate,r_true,predicted_lb,predicted_ub,seed";

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_row(const CurvePoint& p) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    return std::to_string(p.n) + ',' + std::to_string(p.trials) + ',' + format_double(p.eps) + ',' +
           format_double(p.deviation_freq) + ',' + format_double(p.mean_estimate) + ',' +
           format_double(p.std_estimate) + ',' + format_double(p.r_true) + ',' + opt(p.predicted_lb) + ',' +
           opt(p.predicted_ub) + ',' + std::to_string(p.seed);
}

/**
 * @brief Runs the configured experiment, writing the CSV to `out` one row
 * per grid point (flushed as produced). Solver failures stop the run and
 * are reported in the summary; validation errors throw.
 */
inline RunSummary run_config(const ExperimentConfig& cfg, std::ostream& out,
                             const std::function<void(const CurvePoint&)>& progress = {}) {
    validate(cfg);
    RunSummary summary;
    out << kCsvHeader << '\n';
    out.flush();
    try {
        complexity_curve(cfg, [&](const CurvePoint& p) {
            out << csv_row(p) << '\n';
            out.flush();
            ++summary.rows_written;
            if (progress) progress(p);
        });
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonConvergence && e.kind() != ErrorKind::GapTooLarge) throw;
        summary.failures = 1;
        summary.message = e.what();
    }
    if (!out) throw Error(ErrorKind::Io, "run_config: failed writing CSV output");
    return summary;
}

}  // namespace phidro
