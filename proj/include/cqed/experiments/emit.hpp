#pragma once

// CSV time series and JSON summaries.

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cqed/experiments/scenarios.hpp"

namespace cqed::experiments {

enum class Format { csv, json };

inline const char* kCsvHeader = "t_s,norm,p_survival_exact,p_survival_eff,var_x,var_p,epr_sum_var";

inline std::string format_number(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string to_csv(const ScenarioResult& r) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    auto cell = [&](const std::optional<double>& v) {
        os << ',';
        if (v) os << format_number(*v);
    };
    for (const auto& row : r.series) {
        os << format_number(row.t_s);
        cell(row.norm);
        cell(row.p_survival_exact);
        cell(row.p_survival_eff);
        cell(row.var_x);
        cell(row.var_p);
        cell(row.epr_sum_var);
        os << '\n';
    }
    return os.str();
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Everything except the `timestamp` member is a pure function of the config.
inline nlohmann::ordered_json to_json(const ScenarioResult& r, bool with_timestamp = true) {
    nlohmann::ordered_json j;
    j["scenario_id"] = r.scenario_id;
    j["description"] = r.description;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : to_key_values(r.config)) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.summary) summary[k] = v;
    j["summary"] = summary;
    nlohmann::ordered_json prov;
    prov["tool_version"] = kToolVersion;
    prov["tolerances"] = {{"rel_tol", r.config.rel_tol},
                          {"abs_tol", r.config.abs_tol},
                          {"krylov_tol", r.config.krylov_tol}};
    nlohmann::ordered_json cut = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.cutoffs) cut[k] = v;
    prov["cutoffs"] = cut;
    prov["samples"] = r.series.size();
    prov["warnings"] = r.warnings;
    prov["notes"] = r.notes;
    j["provenance"] = prov;
    if (with_timestamp) j["timestamp"] = {{"utc", utc_timestamp()}, {"elapsed_s", r.elapsed_s}};
    return j;
}

namespace detail {

inline std::mutex& emit_mutex() {
    static std::mutex m;
    return m;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::lock_guard<std::mutex> lock(emit_mutex());
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create output directory", path.parent_path().string());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open output file", path.string());
    f << content;
    f.close();
    if (!f) throw IoError("write failed", path.string());
}

}  // namespace detail

/// Writes <dir>/<stem>.csv or <dir>/<stem>.json; returns the path written.
inline std::filesystem::path emit(const ScenarioResult& r, Format format, const std::filesystem::path& dir,
                                  const std::string& stem = {}) {
    const std::string name = stem.empty() ? r.scenario_id : stem;
    if (format == Format::csv) {
        const auto path = dir / (name + ".csv");
        detail::write_file(path, to_csv(r));
        return path;
    }
    const auto path = dir / (name + ".json");
    detail::write_file(path, to_json(r).dump(2) + "\n");
    return path;
}

/// run_scenario plus, when config.output_path is set, both output files under that directory.
inline ScenarioResult run_and_emit(const ScenarioConfig& config) {
    ScenarioResult r = run_scenario(config);
    if (!config.output_path.empty()) {
        emit(r, Format::csv, config.output_path);
        emit(r, Format::json, config.output_path);
    }
    return r;
}

}  // namespace cqed::experiments
