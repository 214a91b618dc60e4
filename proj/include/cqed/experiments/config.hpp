#pragma once

// Scenario configuration: flat `key = value` text, one entry per line, `#`
// starts a comment. Keys are the SystemParams / ScenarioConfig field names.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cqed/hamiltonians.hpp"

#ifndef CQED_PRESET_DIR
#define CQED_PRESET_DIR "presets"
#endif

namespace cqed::experiments {

enum class ExactModel { rotating, interaction };

struct ScenarioConfig {
    std::string scenario_id;
    SystemParams params;
    std::optional<double> tau;  // nullopt: "auto"
    std::optional<int> n_max_a;  // nullopt: "auto"
    std::optional<int> n_max_b;
    bool delta_auto = false;  // delta_small = auto → resonance adjustment
    std::string initial_state_label = "i-vac";
    cplx alpha{0.0, 0.0};
    cplx beta{0.0, 0.0};
    bool approximate = false;
    ExactModel exact_model = ExactModel::rotating;
    int sample_count = 201;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double krylov_tol = 1e-12;
    bool adjust_omega_phase = true;
    bool lindblad_check = false;
    std::string output_path;
};

using KeyValues = std::map<std::string, std::string>;

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "scenario_id", "lambda_a",   "lambda_b",  "omega_mag",  "phi",          "delta_cap",
        "delta_small", "omega0",     "omega_i",   "omega_g",    "omega_e",      "gamma_c",
        "gamma_a",     "configuration", "tau",    "n_max_a",    "n_max_b",      "initial_state_label",
        "alpha",       "beta",       "approximate", "exact_model", "sample_count", "rel_tol",
        "abs_tol",     "krylov_tol", "adjust_omega_phase", "lindblad_check", "output_path"};
    return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Real number, optionally written as `x*pi`, `pi/x`, `-pi`, `pi`.
inline std::optional<double> parse_real(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    double sign = 1.0;
    if (s[0] == '-' && s.find("pi") != std::string::npos) {
        sign = -1.0;
        s = s.substr(1);
    }
    auto plain = [](const std::string& t) -> std::optional<double> {
        if (t.empty()) return std::nullopt;
        std::size_t pos = 0;
        try {
            const double v = std::stod(t, &pos);
            if (pos != t.size() || !std::isfinite(v)) return std::nullopt;
            return v;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    if (s == "pi") return sign * kPi;
    if (s.rfind("pi/", 0) == 0) {
        auto d = plain(s.substr(3));
        if (!d || *d == 0.0) return std::nullopt;
        return sign * kPi / *d;
    }
    if (s.size() > 3 && s.compare(s.size() - 3, 3, "*pi") == 0) {
        auto f = plain(s.substr(0, s.size() - 3));
        if (!f) return std::nullopt;
        return sign * *f * kPi;
    }
    auto v = plain(s);
    if (!v) return std::nullopt;
    return sign * *v;
}

/// Complex as `re` or `(re,im)`.
inline std::optional<cplx> parse_complex(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (s.front() != '(') {
        auto r = parse_real(s);
        if (!r) return std::nullopt;
        return cplx(*r, 0.0);
    }
    if (s.back() != ')') return std::nullopt;
    const std::string body = s.substr(1, s.size() - 2);
    const auto comma = body.find(',');
    if (comma == std::string::npos) {
        auto r = parse_real(body);
        if (!r) return std::nullopt;
        return cplx(*r, 0.0);
    }
    auto re = parse_real(body.substr(0, comma));
    auto im = parse_real(body.substr(comma + 1));
    if (!re || !im) return std::nullopt;
    return cplx(*re, *im);
}

inline std::optional<int> parse_int(const std::string& raw) {
    const std::string s = trim(raw);
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size() || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            return std::nullopt;
        return static_cast<int>(v);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::optional<bool> parse_bool(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    return std::nullopt;
}

}  // namespace detail

/// Parses the text of a config file. Unknown or duplicate keys and malformed
/// lines are reported together in one ConfigError.
inline KeyValues parse_key_values(const std::string& text, const std::string& origin = "config") {
    KeyValues kv;
    std::vector<std::string> bad;
    const std::set<std::string> known(config_keys().begin(), config_keys().end());
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bad.push_back(origin + ":" + std::to_string(lineno) + " (missing '=')");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!known.count(key)) {
            bad.push_back(key + " (unknown key)");
            continue;
        }
        if (kv.count(key)) {
            bad.push_back(key + " (duplicate)");
            continue;
        }
        kv[key] = value;
    }
    if (!bad.empty()) throw ConfigError("invalid configuration in " + origin, bad);
    return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file", path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_key_values(ss.str(), path.string());
}

/// `key=value` override; key must be known.
inline std::pair<std::string, std::string> parse_assignment(const std::string& text) {
    auto kv = parse_key_values(text, "override");
    if (kv.size() != 1) throw ConfigError("override must have the form key=value", {text});
    return *kv.begin();
}

/// Applies entries on top of `cfg`; all offending fields are reported together.
inline void apply_key_values(ScenarioConfig& cfg, const KeyValues& kv) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& key, const std::string& why) { bad.push_back(key + " (" + why + ")"); };
    SystemParams& p = cfg.params;

    for (const auto& [key, value] : kv) {
        auto real = [&](double& dst) {
            if (auto v = detail::parse_real(value)) dst = *v;
            else fail(key, "expected a real number");
        };
        auto complex = [&](cplx& dst) {
            if (auto v = detail::parse_complex(value)) dst = *v;
            else fail(key, "expected a real or (re,im) complex number");
        };
        auto boolean = [&](bool& dst) {
            if (auto v = detail::parse_bool(value)) dst = *v;
            else fail(key, "expected true or false");
        };
        auto cutoff = [&](std::optional<int>& dst) {
            if (value == "auto") dst.reset();
            else if (auto v = detail::parse_int(value)) dst = *v;
            else fail(key, "expected an integer or auto");
        };

        if (key == "scenario_id") cfg.scenario_id = value;
        else if (key == "lambda_a") complex(p.lambda_a);
        else if (key == "lambda_b") complex(p.lambda_b);
        else if (key == "omega_mag") real(p.omega_mag);
        else if (key == "phi") real(p.phi);
        else if (key == "delta_cap") real(p.delta_cap);
        else if (key == "delta_small") {
            if (value == "auto") {
                cfg.delta_auto = true;
            } else {
                cfg.delta_auto = false;
                real(p.delta_small);
            }
        } else if (key == "omega0") real(p.omega0);
        else if (key == "omega_i") real(p.omega_i);
        else if (key == "omega_g" || key == "omega_e") {
            auto& dst = key == "omega_g" ? p.omega_g : p.omega_e;
            if (value == "auto") dst.reset();
            else if (auto v = detail::parse_real(value)) dst = *v;
            else fail(key, "expected a real number or auto");
        } else if (key == "gamma_c") real(p.gamma_c);
        else if (key == "gamma_a") real(p.gamma_a);
        else if (key == "configuration") {
            if (value == "ladder") p.configuration = Configuration::ladder;
            else if (value == "lambda") p.configuration = Configuration::lambda;
            else fail(key, "expected ladder or lambda");
        } else if (key == "tau") {
            if (value == "auto") cfg.tau.reset();
            else if (auto v = detail::parse_real(value)) cfg.tau = *v;
            else fail(key, "expected seconds or auto");
        } else if (key == "n_max_a") cutoff(cfg.n_max_a);
        else if (key == "n_max_b") cutoff(cfg.n_max_b);
        else if (key == "initial_state_label") cfg.initial_state_label = value;
        else if (key == "alpha") complex(cfg.alpha);
        else if (key == "beta") complex(cfg.beta);
        else if (key == "approximate") boolean(cfg.approximate);
        else if (key == "exact_model") {
            if (value == "rotating") cfg.exact_model = ExactModel::rotating;
            else if (value == "interaction") cfg.exact_model = ExactModel::interaction;
            else fail(key, "expected rotating or interaction");
        } else if (key == "sample_count") {
            if (auto v = detail::parse_int(value)) cfg.sample_count = *v;
            else fail(key, "expected an integer");
        } else if (key == "rel_tol") real(cfg.rel_tol);
        else if (key == "abs_tol") real(cfg.abs_tol);
        else if (key == "krylov_tol") real(cfg.krylov_tol);
        else if (key == "adjust_omega_phase") boolean(cfg.adjust_omega_phase);
        else if (key == "lindblad_check") boolean(cfg.lindblad_check);
        else if (key == "output_path") cfg.output_path = value;
    }
    if (!bad.empty()) throw ConfigError("invalid configuration values", bad);
}

/// Flat key/value form of a config, used for the JSON echo and round trips.
inline KeyValues to_key_values(const ScenarioConfig& c) {
    auto num = [](double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    };
    auto cnum = [&](cplx z) { return z.imag() == 0.0 ? num(z.real()) : "(" + num(z.real()) + "," + num(z.imag()) + ")"; };
    const SystemParams& p = c.params;
    KeyValues kv;
    kv["scenario_id"] = c.scenario_id;
    kv["lambda_a"] = cnum(p.lambda_a);
    kv["lambda_b"] = cnum(p.lambda_b);
    kv["omega_mag"] = num(p.omega_mag);
    kv["phi"] = num(p.phi);
    kv["delta_cap"] = num(p.delta_cap);
    kv["delta_small"] = c.delta_auto ? "auto" : num(p.delta_small);
    kv["omega0"] = num(p.omega0);
    kv["omega_i"] = num(p.omega_i);
    kv["omega_g"] = p.omega_g ? num(*p.omega_g) : "auto";
    kv["omega_e"] = p.omega_e ? num(*p.omega_e) : "auto";
    kv["gamma_c"] = num(p.gamma_c);
    kv["gamma_a"] = num(p.gamma_a);
    kv["configuration"] = p.configuration == Configuration::ladder ? "ladder" : "lambda";
    kv["tau"] = c.tau ? num(*c.tau) : "auto";
    kv["n_max_a"] = c.n_max_a ? std::to_string(*c.n_max_a) : "auto";
    kv["n_max_b"] = c.n_max_b ? std::to_string(*c.n_max_b) : "auto";
    kv["initial_state_label"] = c.initial_state_label;
    kv["alpha"] = cnum(c.alpha);
    kv["beta"] = cnum(c.beta);
    kv["approximate"] = c.approximate ? "true" : "false";
    kv["exact_model"] = c.exact_model == ExactModel::rotating ? "rotating" : "interaction";
    kv["sample_count"] = std::to_string(c.sample_count);
    kv["rel_tol"] = num(c.rel_tol);
    kv["abs_tol"] = num(c.abs_tol);
    kv["krylov_tol"] = num(c.krylov_tol);
    kv["adjust_omega_phase"] = c.adjust_omega_phase ? "true" : "false";
    kv["lindblad_check"] = c.lindblad_check ? "true" : "false";
    kv["output_path"] = c.output_path;
    return kv;
}

inline std::filesystem::path preset_directory(const std::optional<std::string>& override_dir = std::nullopt) {
    if (override_dir) return *override_dir;
    if (const char* env = std::getenv("CQED_PRESETS")) return env;
    return CQED_PRESET_DIR;
}

}  // namespace cqed::experiments
