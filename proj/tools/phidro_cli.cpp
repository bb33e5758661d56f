// Command-line front end: eval, estimate, hard-instance, bounds, experiment.
// Exit codes: 0 success, 2 validation, 3 solver failure, 4 I/O.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "phidro/json_io.hpp"
#include "phidro/phidro.hpp"

namespace {

using phidro::Error;
using phidro::ErrorKind;
using phidro::io::json;

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonConvergence:
        case ErrorKind::GapTooLarge: return kExitSolver;
        case ErrorKind::Io: return kExitIo;
        default: return kExitValidation;
    }
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_eval(const std::string& path, double tol) {
    const auto inst = phidro::io::instance_from_json(phidro::io::read_json_file(path));
    emit(phidro::io::to_json(phidro::worst_case_expectation(inst, tol)));
    return 0;
}

int cmd_estimate(const std::string& path, std::uint64_t n, std::uint64_t seed, std::uint64_t trial,
                 std::optional<double> L, double tol) {
    const auto inst = phidro::io::instance_from_json(phidro::io::read_json_file(path));
    const auto emp = phidro::draw_empirical(inst, n, seed, trial);
    json out{{"r_n", phidro::saa_estimate(emp, inst, tol)}, {"empirical", phidro::io::to_json(emp)}};
    if (L) out["r_n_L"] = phidro::truncated_saa_estimate(emp, inst, *L, tol);
    emit(out);
    return 0;
}

int cmd_hard_instance(const std::string& div, double tau, std::optional<double> p, std::optional<double> eps,
                      std::optional<double> B) {
    const auto spec = phidro::io::parse_divergence(div);
    if (p) {
        emit(phidro::io::to_json(phidro::sublinear_hard_instance(spec, tau, *p)));
    } else {
        emit(phidro::io::to_json(phidro::superlinear_hard_instance(spec, tau, *B, *eps)));
    }
    return 0;
}

int cmd_bounds(const std::string& div, double tau, double B, double eps, double delta) {
    const auto spec = phidro::io::parse_divergence(div);
    if (spec.kind() == phidro::DivergenceKind::EssSup)
        throw Error(ErrorKind::Validation, "ess_sup: sample complexity can be made arbitrarily large");
    json out{{"divergence", phidro::io::to_json(spec)}, {"growth_class", phidro::to_string(spec.growth_class())}};
    if (spec.growth_class() == phidro::GrowthClass::Sublinear) {
        const auto c = phidro::sublinear_constants(spec, tau);
        const auto h = phidro::sublinear_hard_instance(spec, tau, c.p_max);
        out["constants"] = phidro::io::to_json(c);
        out["le_cam_n"] = h.le_cam_n;
        out["hard_instance"] = phidro::io::to_json(h);
        out["note"] = "sample complexity can be made arbitrarily large";
        emit(out);
        return 0;
    }
    json notes = json::array();
    auto attempt = [&](const char* what, auto&& fn) -> std::optional<double> {
        try {
            return fn();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::GrowthUnbounded) throw;
            notes.push_back(std::string(what) + ": " + e.what());
            return std::nullopt;
        }
    };
    using phidro::BoundMode;
    auto upper = [&](BoundMode m) { return phidro::sample_upper_bound(spec, tau, B, eps, delta, m); };
    out["lower"] = nullable(attempt("lower", [&] { return phidro::sample_lower_bound(spec, tau, B, eps); }));
    out["upper_hoeffding"] = nullable(attempt("upper_hoeffding", [&] { return upper(BoundMode::Hoeffding); }));
    out["upper_bernstein"] = nullable(attempt("upper_bernstein", [&] { return upper(BoundMode::Bernstein); }));
    out["upper_increment"] = nullable(attempt("upper_increment", [&] { return upper(BoundMode::Increment); }));
    const auto L = attempt("le_cam_n", [&] { return phidro::growth_inverse(spec, tau * B / (2.0 * eps)); });
    out["le_cam_n"] = L ? json(phidro::detail::safe_floor(*L * B / (2.0 * eps))) : json(nullptr);
    try {
        out["hard_instance"] = phidro::io::to_json(phidro::superlinear_hard_instance(spec, tau, B, eps));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::EpsTooLarge && e.kind() != ErrorKind::GrowthUnbounded) throw;
        out["hard_instance"] = nullptr;
        notes.push_back(std::string("hard_instance: ") + e.what());
    }
    if (!notes.empty()) out["notes"] = notes;
    emit(out);
    return 0;
}

int cmd_experiment(const std::string& path, std::optional<unsigned> threads, std::optional<std::uint64_t> seed,
                   std::optional<std::uint64_t> trials, std::optional<std::string> output) {
    auto cfg = phidro::io::config_from_json(phidro::io::read_json_file(path));
    if (threads) cfg.threads = std::max(1u, *threads);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (output) cfg.output_path = *output;
    phidro::validate(cfg);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.output_path != "-") {
        file.open(cfg.output_path, std::ios::out | std::ios::trunc);
        if (!file) throw Error(ErrorKind::Io, "cannot write '" + cfg.output_path + "'");
        out = &file;
    }
    const auto summary = phidro::run_config(cfg, *out, [](const phidro::CurvePoint& p) {
        std::cerr << "n=" << p.n << " deviation_freq=" << p.deviation_freq << " mean=" << p.mean_estimate << '\n';
    });
    if (summary.failures > 0) {
        std::cerr << "error: " << summary.message << '\n';
        return kExitSolver;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Worst-case expectations over phi-divergence balls"};
    app.require_subcommand(1);

    std::string instance_path, divergence, config_path;
    double tol = phidro::kDefaultTol, tau = 0.0, B = 1.0, eps = 0.0, delta = 0.0;
    std::uint64_t n = 0, seed = 0, trial = 0;
    std::optional<double> truncate, p, hard_eps, hard_B;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed_override, trials_override;
    std::optional<std::string> output_override;

    auto* eval = app.add_subcommand("eval", "Exact worst-case expectation of an instance");
    eval->add_option("--instance", instance_path, "Instance JSON file")->required();
    eval->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);

    auto* estimate = app.add_subcommand("estimate", "SAA estimate from one seeded draw");
    estimate->add_option("--instance", instance_path, "Instance JSON file")->required();
    estimate->add_option("--n", n, "Sample size")->required()->check(CLI::Range(std::uint64_t{1}, UINT64_MAX));
    estimate->add_option("--seed", seed, "Stream seed");
    estimate->add_option("--trial", trial, "Trial index");
    estimate->add_option("--truncate", truncate, "Truncation level L >= 1");
    estimate->add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber);

    auto* hard = app.add_subcommand("hard-instance", "Two-point hard instance");
    hard->add_option("--divergence", divergence, "Divergence, e.g. kl or cvar:alpha=0.1")->required();
    hard->add_option("--tau", tau, "Radius")->required();
    auto* p_opt = hard->add_option("--p", p, "P(omega_1), sublinear route");
    auto* eps_opt = hard->add_option("--eps", hard_eps, "Risk gap, superlinear route");
    auto* b_opt = hard->add_option("--B", hard_B, "Payoff bound, superlinear route");
    p_opt->excludes(eps_opt)->excludes(b_opt);
    eps_opt->needs(b_opt);
    b_opt->needs(eps_opt);

    auto* bounds = app.add_subcommand("bounds", "Sample-complexity bounds");
    bounds->add_option("--divergence", divergence, "Divergence")->required();
    bounds->add_option("--tau", tau, "Radius")->required();
    bounds->add_option("--B", B, "Payoff bound")->required();
    bounds->add_option("--eps", eps, "Accuracy")->required();
    bounds->add_option("--delta", delta, "Failure probability")->required();

    auto* experiment = app.add_subcommand("experiment", "Monte Carlo experiment from a JSON config");
    experiment->add_option("--config", config_path, "Config JSON file")->required();
    experiment->add_option("--threads", threads, "Worker threads");
    experiment->add_option("--seed", seed_override, "Override the config seed");
    experiment->add_option("--trials", trials_override, "Override the config trial count");
    experiment->add_option("--output", output_override, "Override the config output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (*eval) return cmd_eval(instance_path, tol);
        if (*estimate) return cmd_estimate(instance_path, n, seed, trial, truncate, tol);
        if (*hard) {
            if (!p && !hard_eps) throw Error(ErrorKind::Validation, "hard-instance: give --p or --eps with --B");
            return cmd_hard_instance(divergence, tau, p, hard_eps, hard_B);
        }
        if (*bounds) return cmd_bounds(divergence, tau, B, eps, delta);
        if (*experiment) return cmd_experiment(config_path, threads, seed_override, trials_override, output_override);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitValidation;
}
