#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "phidro/bounds.hpp"
#include "phidro/experiments.hpp"
#include "phidro/risk_oracle.hpp"
#include "phidro/saa.hpp"

namespace phidro::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Validation, where + ": missing field '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number()) throw Error(ErrorKind::Validation, where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

inline std::uint64_t count(const json& j, const std::string& key, const std::string& where) {
    const json& v = field(j, key, where);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw Error(ErrorKind::Validation, where + ": field '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::optional<double> optional_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return number(j, key, where);
}

}  // namespace detail

inline json to_json(const DivergenceSpec& s) {
    json params = json::object();
    if (s.kind() == DivergenceKind::CVaR) params["alpha"] = s.alpha();
    if (s.kind() == DivergenceKind::CressieRead) params["k"] = s.k();
    return {{"name", s.name()}, {"params", params}};
}

inline DivergenceSpec divergence_from_json(const json& j) {
    const std::string where = "divergence";
    const json& name_j = detail::field(j, "name", where);
    if (!name_j.is_string()) throw Error(ErrorKind::Validation, "divergence: field 'name' must be a string");
    const std::string name = name_j.get<std::string>();
    const json params = j.contains("params") ? j.at("params") : json::object();
    if (!params.is_object()) throw Error(ErrorKind::Validation, "divergence: field 'params' must be an object");
    if (name == "kl") return DivergenceSpec::kl();
    if (name == "cvar") return DivergenceSpec::cvar(detail::number(params, "alpha", "divergence.params"));
    if (name == "cressie_read") return DivergenceSpec::cressie_read(detail::number(params, "k", "divergence.params"));
    if (name == "variation") return DivergenceSpec::variation();
    if (name == "burg") return DivergenceSpec::burg();
    if (name == "neyman_chi2") return DivergenceSpec::neyman_chi2();
    if (name == "hellinger") return DivergenceSpec::hellinger();
    if (name == "ess_sup") return DivergenceSpec::ess_sup();
    throw Error(ErrorKind::Validation, "divergence: unknown name '" + name + "'");
}

/// Parses a JSON object, or the short form "name[:key=value]" e.g. "cvar:alpha=0.1".
inline DivergenceSpec parse_divergence(const std::string& text) {
    if (!text.empty() && text.front() == '{') {
        try {
            return divergence_from_json(json::parse(text));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Validation, std::string("divergence: ") + e.what());
        }
    }
    json j{{"name", text.substr(0, text.find(':'))}, {"params", json::object()}};
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        std::stringstream rest(text.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw Error(ErrorKind::Validation, "divergence: expected key=value, got '" + item + "'");
            try {
                std::size_t used = 0;
                const std::string value = item.substr(eq + 1);
                j["params"][item.substr(0, eq)] = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::Validation, "divergence: bad number in '" + item + "'");
            }
        }
    }
    return divergence_from_json(j);
}

inline json to_json(const FiniteInstance& inst) {
    json atoms = json::array();
    for (const auto& a : inst.atoms()) atoms.push_back({{"x", a.x}, {"p", a.p}});
    return {{"atoms", atoms}, {"B", inst.B()}, {"tau", inst.tau()}, {"divergence", to_json(inst.spec())}};
}

inline FiniteInstance instance_from_json(const json& j) {
    const std::string where = "instance";
    const json& atoms_j = detail::field(j, "atoms", where);
    if (!atoms_j.is_array()) throw Error(ErrorKind::Validation, "instance: field 'atoms' must be an array");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < atoms_j.size(); ++i) {
        const std::string at = "instance.atoms[" + std::to_string(i) + "]";
        atoms.push_back({detail::number(atoms_j[i], "x", at), detail::number(atoms_j[i], "p", at)});
    }
    return FiniteInstance(std::move(atoms), detail::number(j, "B", where), detail::number(j, "tau", where),
                          divergence_from_json(detail::field(j, "divergence", where)));
}

inline json to_json(const RiskReport& r) {
    return {{"primal", r.primal},
            {"dual", r.dual},
            {"density", r.density},
            {"gap", r.gap},
            {"tolerance", r.tolerance},
            {"mean_residual", r.mean_residual},
            {"divergence_residual", r.divergence_residual},
            {"min_density", r.min_density},
            {"lambda", r.lambda},
            {"mu", r.mu},
            {"method", r.method}};
}

inline json to_json(const DualPoint& d) {
    return {{"lambda", d.lambda}, {"mu", d.mu}, {"value", d.value}, {"status", to_string(d.status)}};
}

inline json to_json(const EmpiricalMeasure& e) {
    json atoms = json::array();
    for (const auto& a : e.atoms) atoms.push_back({{"index", a.index}, {"x", a.x}, {"count", a.count}});
    return {{"atoms", atoms}, {"n", e.n}, {"seed", e.seed}, {"trial", e.trial}};
}

inline json to_json(const HardInstance& h) {
    json j = to_json(h.instance);
    j["guarantee"] = h.guarantee;
    j["le_cam_n"] = h.le_cam_n;
    return j;
}

inline json to_json(const SublinearConstants& c) {
    return {{"G", c.G}, {"Lthr", c.Lthr}, {"r", c.r}, {"p_max", c.p_max}, {"k", c.k}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline BoundMode bound_mode_from_string(const std::string& s) {
    if (s == "hoeffding") return BoundMode::Hoeffding;
    if (s == "bernstein") return BoundMode::Bernstein;
    if (s == "increment") return BoundMode::Increment;
    throw Error(ErrorKind::Validation, "config field 'bound_mode': expected hoeffding, bernstein or increment");
}

/// Experiment config; every error names the offending field.
inline ExperimentConfig config_from_json(const json& j) {
    const std::string where = "config";
    if (!j.is_object()) throw Error(ErrorKind::Validation, "config: top level must be an object");
    static const char* known[] = {"instance", "hard_instance", "n_grid", "eps", "delta", "trials", "seed",
                                  "truncation", "bound_mode", "tol", "output_path", "threads"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw Error(ErrorKind::Validation, "config: unknown field '" + key + "'");
    }
    ExperimentConfig cfg;
    if (j.contains("instance") == j.contains("hard_instance"))
        throw Error(ErrorKind::Validation, "config field 'instance': give exactly one of 'instance' or 'hard_instance'");
    if (j.contains("instance")) {
        cfg.instance = instance_from_json(j.at("instance"));
    } else {
        const json& h = j.at("hard_instance");
        const std::string hw = "config.hard_instance";
        cfg.instance = HardInstanceParams{divergence_from_json(detail::field(h, "divergence", hw)),
                                          detail::number(h, "tau", hw), detail::optional_number(h, "p", hw),
                                          detail::optional_number(h, "B", hw), detail::optional_number(h, "eps", hw)};
    }
    const json& grid = detail::field(j, "n_grid", where);
    if (!grid.is_array()) throw Error(ErrorKind::Validation, "config field 'n_grid': must be an array");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid[i].is_number_integer() || grid[i].get<std::int64_t>() < 1)
            throw Error(ErrorKind::Validation, "config field 'n_grid': entries must be positive integers");
        cfg.n_grid.push_back(grid[i].get<std::uint64_t>());
    }
    cfg.eps = detail::number(j, "eps", where);
    if (j.contains("delta")) cfg.delta = detail::number(j, "delta", where);
    cfg.trials = detail::count(j, "trials", where);
    if (j.contains("seed")) cfg.seed = detail::count(j, "seed", where);
    if (j.contains("tol")) cfg.tol = detail::number(j, "tol", where);
    if (j.contains("threads")) cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, detail::count(j, "threads", where)));
    if (j.contains("output_path")) {
        if (!j.at("output_path").is_string())
            throw Error(ErrorKind::Validation, "config field 'output_path': must be a string");
        cfg.output_path = j.at("output_path").get<std::string>();
    }
    if (j.contains("bound_mode")) {
        if (!j.at("bound_mode").is_string())
            throw Error(ErrorKind::Validation, "config field 'bound_mode': must be a string");
        cfg.bound_mode = bound_mode_from_string(j.at("bound_mode").get<std::string>());
    }
    if (j.contains("truncation")) {
        const json& t = j.at("truncation");
        const json& mode = detail::field(t, "mode", "config.truncation");
        const std::string m = mode.is_string() ? mode.get<std::string>() : "";
        if (m == "sandwich") {
            cfg.truncation = TruncationConfig{TruncationChoice::Sandwich};
        } else if (m == "theorem_rate") {
            cfg.truncation = TruncationConfig{TruncationChoice::TheoremRate};
        } else if (m == "fixed") {
            cfg.truncation = TruncationConfig{TruncationChoice::Fixed, detail::number(t, "L", "config.truncation")};
        } else {
            throw Error(ErrorKind::Validation, "config field 'truncation.mode': expected sandwich, theorem_rate or fixed");
        }
    }
    validate(cfg);
    return cfg;
}

}  // namespace phidro::io
