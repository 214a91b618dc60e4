// cqed command-line front end.
//
//   cqed list
//   cqed run <scenario-id> [--config FILE] [--out DIR] [--format csv|json] [--set key=value]...
//   cqed compare <scenario-id> [--config FILE] [--set key=value]...
//   cqed sweep <scenario-id> --vary KEY --values v1,v2,... [--config FILE] [--out DIR] [--format csv|json]
//
// Exit codes: 0 ok, 2 invalid configuration, 3 convergence failure, 4 I/O failure, 1 anything else.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cqed/cqed.hpp"

namespace ex = cqed::experiments;

namespace {

struct Common {
    std::string scenario;
    std::string config_file;
    std::vector<std::string> overrides;
    std::string presets;
    std::string out_dir;
    std::string format = "json";
};

ex::ScenarioConfig build_config(const Common& c) {
    std::optional<std::string> dir;
    if (!c.presets.empty()) dir = c.presets;
    ex::ScenarioConfig cfg = ex::load_scenario_config(c.scenario, dir);
    if (!c.config_file.empty()) {
        ex::apply_key_values(cfg, ex::read_key_values(c.config_file));
        if (cfg.scenario_id != c.scenario)
            throw cqed::ConfigError("config file names a different scenario", {"scenario_id=" + cfg.scenario_id});
    }
    ex::KeyValues kv;
    std::vector<std::string> bad;
    for (const auto& o : c.overrides) {
        try {
            auto [k, v] = ex::parse_assignment(o);
            kv[k] = v;
        } catch (const cqed::ConfigError& e) {
            for (const auto& f : e.fields()) bad.push_back(f);
        }
    }
    if (!bad.empty()) throw cqed::ConfigError("invalid --set override", bad);
    ex::apply_key_values(cfg, kv);
    if (cfg.scenario_id != c.scenario) throw cqed::ConfigError("scenario_id cannot be overridden", {"scenario_id"});
    return cfg;
}

ex::Format parse_format(const std::string& f) { return f == "csv" ? ex::Format::csv : ex::Format::json; }

void print_warnings(const ex::ScenarioResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& n : r.notes) std::cerr << "note: " << n << '\n';
}

int cmd_list() {
    for (const auto& s : ex::catalogue()) std::cout << s.id << "\n    " << s.description << '\n';
    return 0;
}

int cmd_run(const Common& c) {
    auto cfg = build_config(c);
    const auto r = ex::run_scenario(cfg);
    print_warnings(r);
    if (c.out_dir.empty()) {
        if (parse_format(c.format) == ex::Format::csv) std::cout << ex::to_csv(r);
        else std::cout << ex::to_json(r).dump(2) << '\n';
    } else {
        const auto path = ex::emit(r, parse_format(c.format), c.out_dir);
        std::cerr << "wrote " << path.string() << '\n';
    }
    return 0;
}

int cmd_compare(const Common& c) {
    auto cfg = build_config(c);
    const auto rep = ex::compare_exact_effective_report(cfg);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    nlohmann::ordered_json j;
    j["scenario_id"] = cfg.scenario_id;
    j["divergence"] = rep.divergence;
    for (const auto& t : rep.traces) j["per_state"][t.initial_state_label] = t.divergence;
    std::cout << j.dump(2) << '\n';
    return 0;
}

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    }
    return out;
}

int cmd_sweep(const Common& c, const std::string& key, const std::string& values) {
    auto cfg = build_config(c);
    const auto points = ex::sweep(cfg, key, split_values(values));
    int worst = 0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& pt = points[k];
        nlohmann::ordered_json j;
        j[key] = pt.value;
        if (pt.result) {
            nlohmann::ordered_json s = nlohmann::ordered_json::object();
            for (const auto& [name, v] : pt.result->summary) s[name] = v;
            j["summary"] = s;
            if (!c.out_dir.empty())
                ex::emit(*pt.result, parse_format(c.format), c.out_dir, cfg.scenario_id + "-" + std::to_string(k));
        } else {
            j["error"] = pt.error;
            j["exit_code"] = pt.exit_code;
            worst = std::max(worst, pt.exit_code);
        }
        std::cout << j.dump() << '\n';
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-QED parametric amplification simulator"};
    app.require_subcommand(1);
    Common common;
    std::string vary, values;

    auto add_common = [&](CLI::App* sub, bool outputs) {
        sub->add_option("scenario", common.scenario, "scenario id (see `cqed list`)")->required();
        sub->add_option("--config", common.config_file, "key=value file applied over the preset");
        sub->add_option("--set", common.overrides, "key=value override, repeatable");
        sub->add_option("--presets", common.presets, "preset directory");
        if (outputs) {
            sub->add_option("--out", common.out_dir, "output directory");
            sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        }
    };

    auto* list = app.add_subcommand("list", "print the scenario catalogue");
    auto* run = app.add_subcommand("run", "run one scenario");
    add_common(run, true);
    auto* compare = app.add_subcommand("compare", "exact versus effective divergence");
    add_common(compare, false);
    auto* sw = app.add_subcommand("sweep", "run a scenario over a list of values for one key");
    add_common(sw, true);
    sw->add_option("--vary", vary, "configuration key")->required();
    sw->add_option("--values", values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*list) return cmd_list();
        if (*run) return cmd_run(common);
        if (*compare) return cmd_compare(common);
        if (*sw) return cmd_sweep(common, vary, values);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ex::error_exit_code(e);
    }
    return 1;
}
