#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "oracles.hpp"

using namespace cqed;
namespace ex = cqed::experiments;
namespace fs = std::filesystem;

namespace {

ex::ScenarioConfig preset(const std::string& id) { return ex::load_scenario_config(id); }

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("cqed_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const fs::path log = fs::temp_directory_path() / ("cqed_cli_" + std::to_string(::getpid()) + ".log");
    const std::string cmd = std::string("\"") + CQED_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
        std::ifstream f(log);
        std::stringstream ss;
        ss << f.rdbuf();
        *output = ss.str();
    }
    fs::remove(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Catalogue, ElevenScenariosWithPresets) {
    const std::vector<std::string> ids = {"pdc-weak-epr",    "pdc-weak-evenodd", "pdc-weak-squeeze", "pdc-strong-epr",
                                          "pdc-strong-squeeze", "pdc-strong-cat", "puc-weak-swap",   "puc-strong-swap",
                                          "validate-weak",   "validate-strong",  "dissipative-squeeze"};
    ASSERT_EQ(ex::catalogue().size(), ids.size());
    for (const auto& id : ids) {
        const auto* info = ex::find_scenario(id);
        ASSERT_NE(info, nullptr) << id;
        EXPECT_FALSE(info->description.empty());
        const auto cfg = preset(id);
        EXPECT_EQ(cfg.scenario_id, id);
        EXPECT_NO_THROW(ex::validate_config(cfg)) << id;
    }
    EXPECT_EQ(ex::find_scenario("nope"), nullptr);
    EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, ParsesCommentsExpressionsAndAuto) {
    const auto kv = ex::parse_key_values("# heading\n  phi = -pi/2   # trailing\n\ntau=auto\nomega_mag = 6e5\n");
    EXPECT_EQ(kv.size(), 3u);
    ex::ScenarioConfig c = preset("puc-weak-swap");
    ex::apply_key_values(c, kv);
    EXPECT_DOUBLE_EQ(c.params.phi, -kPi / 2);
    EXPECT_FALSE(c.tau.has_value());
    EXPECT_DOUBLE_EQ(c.params.omega_mag, 6e5);
}

TEST(Config, UnknownKeysAreErrors) {
    try {
        ex::parse_key_values("omega_mag = 1\nomega_typo = 2\nalso_bad = 3\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        EXPECT_NE(all.find("omega_typo"), std::string::npos);
        EXPECT_NE(all.find("also_bad"), std::string::npos);
    }
    EXPECT_THROW(ex::parse_key_values("no equals sign\n"), ConfigError);
    EXPECT_THROW(ex::parse_key_values("tau = 1\ntau = 2\n"), ConfigError);
    EXPECT_THROW(ex::parse_assignment("bogus=1"), ConfigError);
}

TEST(Config, BadValuesAreReported) {
    ex::ScenarioConfig c = preset("pdc-weak-epr");
    EXPECT_THROW(ex::apply_key_values(c, {{"omega_mag", "fast"}}), ConfigError);
    EXPECT_THROW(ex::apply_key_values(c, {{"configuration", "triangle"}}), ConfigError);
    EXPECT_THROW(ex::apply_key_values(c, {{"sample_count", "2.5"}}), ConfigError);
}

TEST(Config, MissingFileIsIoError) {
    EXPECT_THROW(ex::read_key_values("/nonexistent/dir/x.cfg"), IoError);
    EXPECT_THROW(ex::load_scenario_config("pdc-weak-epr", std::string("/nonexistent/presets")), IoError);
}

TEST(Config, KeyValueRoundTrip) {
    for (const auto& info : ex::catalogue()) {
        const auto c = preset(info.id);
        const auto kv = ex::to_key_values(c);
        for (const auto& [k, v] : kv) {
            EXPECT_NE(std::find(ex::config_keys().begin(), ex::config_keys().end(), k), ex::config_keys().end()) << k;
        }
        ex::ScenarioConfig back;
        ex::apply_key_values(back, kv);
        EXPECT_EQ(ex::to_key_values(back), kv) << info.id;
    }
}

TEST(Config, ValidationListsOffendingFields) {
    ex::ScenarioConfig c = preset("puc-weak-swap");
    c.params.configuration = Configuration::ladder;
    c.params.gamma_c = -1.0;
    try {
        ex::validate_config(c);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string all = e.what();
        EXPECT_NE(all.find("configuration"), std::string::npos);
        EXPECT_NE(all.find("gamma_c"), std::string::npos);
    }
}

TEST(Scenarios, WeakEprQuality) {
    const auto r = ex::run_scenario(preset("pdc-weak-epr"));
    EXPECT_NEAR(r.summary.at("r_eff"), 0.75, 1e-12);
    EXPECT_NEAR(r.summary.at("epr_quality"), 0.78, 0.01);
    EXPECT_EQ(r.series.size(), static_cast<std::size_t>(r.config.sample_count));
    for (const auto& row : r.series) EXPECT_NEAR(*row.norm, 1.0, 1e-6);
}

TEST(Scenarios, StrongEprQuality) {
    const auto r = ex::run_scenario(preset("pdc-strong-epr"));
    EXPECT_NEAR(r.summary.at("r_eff"), 1.5, 1e-12);
    EXPECT_NEAR(r.summary.at("epr_quality"), 0.95, 0.01);
}

TEST(Scenarios, WeakSwapBranches) {
    const auto r = ex::run_scenario(preset("puc-weak-swap"));
    EXPECT_NEAR(r.summary.at("gamma_tau"), kPi / 2, 1e-12);
    EXPECT_GE(r.summary.at("fidelity_ecs_plus"), 0.999);
    EXPECT_GE(r.summary.at("fidelity_ecs_minus"), 0.999);
}

TEST(Scenarios, WeakSwapAgainstDenseOracle) {
    // effective evolution of |+⟩|1,1⟩ checked against a Padé exponential of the same generator
    ex::ScenarioConfig c = preset("puc-weak-swap");
    c.initial_state_label = "plus-coherent";
    c.n_max_a = 10;
    c.n_max_b = 10;
    const auto r = ex::run_scenario(c);
    const auto space = HilbertSpace::two_mode(10, 10);
    const auto h = build_effective_puc(c.params, space, Regime::weak, Subspace::pm, c.approximate).evaluate(0.0);
    const AtomicVector plus = dressed_vector(Sign::plus, c.params.phi);
    const auto psi0 = product_state(space, plus, coherent_amplitudes(10, 1.0), coherent_amplitudes(10, 1.0));
    const Vector ref = oracle::expm_pade(h.entries(), psi0.amplitudes(), r.summary.at("tau"));
    const auto target = product_state(space, plus, coherent_amplitudes(10, -1.0), coherent_amplitudes(10, 1.0));
    EXPECT_NEAR(r.summary.at("fidelity_plus_swap"), std::norm(target.amplitudes().dot(ref)), 1e-9);
}

TEST(Scenarios, ValidationSeriesAndSummary) {
    ex::ScenarioConfig c = preset("validate-weak");
    c.sample_count = 201;
    const auto r = ex::run_scenario(c);
    EXPECT_EQ(r.series.size(), 201u);
    for (const char* key : {"divergence_i-10", "divergence_plus-10", "divergence_minus-10", "divergence"})
        EXPECT_TRUE(r.summary.count(key)) << key;
    EXPECT_LE(r.summary.at("divergence_plus-10"), 0.10);
    EXPECT_LE(r.summary.at("divergence_minus-10"), 0.10);
    for (const auto& row : r.series) {
        EXPECT_GE(*row.p_survival_exact, 0.0);
        EXPECT_LE(*row.p_survival_exact, 1.0 + 1e-9);
        EXPECT_NEAR(*row.norm, 1.0, 1e-6);
    }
}

TEST(Scenarios, NoExactModelOutsideValidation) {
    EXPECT_THROW(ex::compare_exact_effective(preset("pdc-weak-epr")), ConfigError);
}

TEST(Scenarios, DivergenceIgnoresGlobalPhase) {
    const auto space = HilbertSpace::two_mode(2, 2);
    const auto psi0 = basis_state(space, Level::i, 1, 0);
    std::vector<StateVector> a, b, a_rot, b_rot;
    for (int s = 0; s < 6; ++s) {
        Vector u(space.dimension()), v(space.dimension());
        for (Index k = 0; k < u.size(); ++k) {
            u(k) = oracle::random_complex(1.0);
            v(k) = oracle::random_complex(1.0);
        }
        a.push_back(StateVector::normalized(space, u));
        b.push_back(StateVector::normalized(space, v));
        a_rot.push_back(StateVector(space, std::exp(I * oracle::uniform(0, 6.3)) * a.back().amplitudes()));
        b_rot.push_back(StateVector(space, std::exp(I * oracle::uniform(0, 6.3)) * b.back().amplitudes()));
    }
    const double d = ex::survival_divergence(psi0, a, b);
    EXPECT_GT(d, 0.0);
    EXPECT_NEAR(ex::survival_divergence(psi0, a_rot, b_rot), d, 1e-15);
    EXPECT_NEAR(ex::survival_divergence(StateVector(space, I * psi0.amplitudes()), a, b), d, 1e-15);
    EXPECT_EQ(ex::survival_divergence(psi0, a, a), 0.0);
}

TEST(Scenarios, LindbladCheckShortRunAndSizeGuard) {
    ex::ScenarioConfig c = preset("dissipative-squeeze");
    c.lindblad_check = true;
    EXPECT_THROW(ex::run_scenario(c), ConfigError);
    c.tau = 1e-5;
    const auto r = ex::run_scenario(c);
    EXPECT_EQ(r.series.size(), static_cast<std::size_t>(c.sample_count));
    for (const auto& row : r.series) EXPECT_NEAR(*row.norm, 1.0, 1e-7);
    // weak damping over a short run: the master equation tracks the phenomenological formula
    EXPECT_NEAR(r.summary.at("lindblad_variance") / r.summary.at("variance"), 1.0, 0.01);
}

TEST(Sweep, TauMatchesClosedForm) {
    ex::ScenarioConfig base = preset("pdc-weak-epr");
    base.sample_count = 2;
    const std::vector<std::string> values = {"1e-5", "2e-5", "3e-5", "4e-5", "5e-5"};
    const auto pts = ex::sweep(base, "tau", values);
    ASSERT_EQ(pts.size(), values.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        ASSERT_TRUE(pts[k].result) << pts[k].error;
        EXPECT_EQ(pts[k].value, values[k]);
        const double tau = std::stod(values[k]);
        const double q = epr_quality(pts[k].result->summary.at("xi_mag") * tau);
        EXPECT_NEAR(pts[k].result->summary.at("epr_quality"), q, 0.01) << values[k];
    }
}

TEST(Sweep, XiScalesInverselyWithDetuning) {
    ex::ScenarioConfig base = preset("pdc-weak-epr");
    base.sample_count = 2;
    base.tau = 1e-5;
    const auto pts = ex::sweep(base, "delta_cap", {"3e6", "6e6", "1.2e7"}, false);
    ASSERT_EQ(pts.size(), 3u);
    const double ref = pts[0].result->summary.at("xi_mag") * 3e6;
    EXPECT_NEAR(pts[1].result->summary.at("xi_mag") * 6e6 / ref, 1.0, 1e-12);
    EXPECT_NEAR(pts[2].result->summary.at("xi_mag") * 1.2e7 / ref, 1.0, 1e-12);
}

TEST(Sweep, EmptyUnknownAndPartialFailures) {
    const ex::ScenarioConfig base = preset("puc-strong-swap");
    EXPECT_TRUE(ex::sweep(base, "tau", {}).empty());
    EXPECT_THROW(ex::sweep(base, "not_a_key", {"1"}), ConfigError);
    const auto pts = ex::sweep(base, "omega_mag", {"3e6", "-1", "banana"});
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_TRUE(pts[0].result.has_value());
    EXPECT_FALSE(pts[1].result.has_value());
    EXPECT_EQ(pts[1].exit_code, 2);
    EXPECT_EQ(pts[2].exit_code, 2);
    EXPECT_FALSE(pts[2].error.empty());
}

TEST(ExitCodes, Classification) {
    EXPECT_EQ(ex::error_exit_code(ConfigError("x", {"k"})), 2);
    EXPECT_EQ(ex::error_exit_code(ConvergenceError("x", 1.0)), 3);
    EXPECT_EQ(ex::error_exit_code(IoError("x", "/p")), 4);
    EXPECT_EQ(ex::error_exit_code(CutoffError("x", 5)), 2);
    EXPECT_EQ(ex::error_exit_code(std::runtime_error("x")), 1);
}

TEST(Emit, CsvHeaderRowsAndPrecision) {
    const auto r = ex::run_scenario(preset("puc-strong-swap"));
    const std::string csv = ex::to_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t_s,norm,p_survival_exact,p_survival_eff,var_x,var_p,epr_sum_var");
    std::size_t rows = 0;
    const std::regex number(R"(-?\d\.(\d+)e[-+]\d+|-?\d+\.(\d+))");
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    }
    EXPECT_EQ(rows, r.series.size());
    EXPECT_GE(ex::format_number(1.0 / 3.0).size(), 17u);
    EXPECT_EQ(std::stod(ex::format_number(0.1 + 0.2)), 0.1 + 0.2);
    EXPECT_EQ(std::stod(ex::format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Emit, JsonRoundTripAndProvenance) {
    const auto r = ex::run_scenario(preset("pdc-weak-squeeze"));
    const auto j = nlohmann::json::parse(ex::to_json(r).dump(2));
    for (const auto& [k, v] : r.summary) EXPECT_EQ(j.at("summary").at(k).get<double>(), v) << k;
    EXPECT_EQ(j.at("config").at("scenario_id"), "pdc-weak-squeeze");
    EXPECT_EQ(j.at("provenance").at("tool_version"), ex::kToolVersion);
    EXPECT_TRUE(j.at("provenance").contains("tolerances"));
    EXPECT_TRUE(j.at("provenance").contains("cutoffs"));
    EXPECT_TRUE(j.contains("timestamp"));
    EXPECT_FALSE(ex::to_json(r, false).contains("timestamp"));
    // 17 significant digits survive the text form
    const std::string text = ex::to_json(r).dump();
    const std::regex digits(R"(\d\.\d{14,}(e[-+]?\d+)?)");
    EXPECT_TRUE(std::regex_search(text, digits));
}

TEST(Emit, DeterministicApartFromTimestamp) {
    for (const char* id : {"pdc-weak-squeeze", "puc-strong-swap", "validate-weak", "dissipative-squeeze"}) {
        const auto a = ex::to_json(ex::run_scenario(preset(id)), false).dump();
        const auto b = ex::to_json(ex::run_scenario(preset(id)), false).dump();
        EXPECT_EQ(a, b) << id;
    }
}

TEST(Emit, WritesFilesAndSurfacesIoErrors) {
    const auto r = ex::run_scenario(preset("puc-strong-swap"));
    const fs::path dir = scratch_dir("emit");
    const auto csv = ex::emit(r, ex::Format::csv, dir);
    const auto json = ex::emit(r, ex::Format::json, dir, "named");
    EXPECT_TRUE(fs::exists(csv));
    EXPECT_EQ(json.filename(), "named.json");
    EXPECT_EQ(slurp(csv), ex::to_csv(r));
    const fs::path blocker = dir / "file";
    std::ofstream(blocker) << "x";
    try {
        ex::emit(r, ex::Format::json, blocker / "sub");
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
    }
    fs::remove_all(dir);
}

TEST(Cli, ListAndRun) {
    std::string out;
    EXPECT_EQ(run_cli("list", &out), 0);
    for (const auto& info : ex::catalogue()) EXPECT_NE(out.find(info.id), std::string::npos);
    const fs::path dir = scratch_dir("cli");
    EXPECT_EQ(run_cli("run puc-strong-swap --out \"" + dir.string() + "\" --format csv"), 0);
    EXPECT_TRUE(fs::exists(dir / "puc-strong-swap.csv"));
    EXPECT_EQ(run_cli("run puc-strong-swap --format json", &out), 0);
    const auto j = nlohmann::json::parse(out.substr(out.find('{')));
    EXPECT_EQ(j.at("scenario_id"), "puc-strong-swap");
    fs::remove_all(dir);
}

TEST(Cli, ConfigFailuresExitTwo) {
    const fs::path dir = scratch_dir("cfg");
    std::ofstream(dir / "bad.cfg") << "omega_mag = 3e6\nomgea_mag = 1\n";
    std::string out;
    EXPECT_EQ(run_cli("run puc-strong-swap --config \"" + (dir / "bad.cfg").string() + "\"", &out), 2);
    EXPECT_NE(out.find("omgea_mag"), std::string::npos);
    EXPECT_EQ(run_cli("run no-such-scenario"), 2);
    std::ofstream(dir / "neg.cfg") << "omega_mag = -5\n";
    EXPECT_EQ(run_cli("run puc-strong-swap --config \"" + (dir / "neg.cfg").string() + "\""), 2);
    EXPECT_EQ(run_cli("sweep puc-strong-swap --vary bogus --values 1,2"), 2);
    fs::remove_all(dir);
}

TEST(Cli, IoFailuresExitFour) {
    const fs::path dir = scratch_dir("io");
    std::ofstream(dir / "file") << "x";
    EXPECT_EQ(run_cli("run puc-strong-swap --out \"" + (dir / "file" / "sub").string() + "\""), 4);
    EXPECT_EQ(run_cli("run puc-strong-swap --config \"" + (dir / "missing.cfg").string() + "\""), 4);
    fs::remove_all(dir);
}

TEST(Cli, CompareAndSweep) {
    std::string out;
    EXPECT_EQ(run_cli("compare validate-weak", &out), 0);
    const auto j = nlohmann::json::parse(out.substr(out.find('{')));
    EXPECT_TRUE(j.contains("divergence"));
    EXPECT_EQ(run_cli("sweep puc-strong-swap --vary alpha --values 0.5,1", &out), 0);
    EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 2);
}
