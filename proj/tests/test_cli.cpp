#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ossidamp/cli/commands.hpp"

using namespace ossidamp;
using namespace ossidamp::cli;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("ossidamp_cli_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig from_text(const std::string& yaml, const std::vector<std::string>& overrides = {}) {
    json doc = parse_config_text(yaml);
    if (doc.is_null()) doc = json::object();
    for (const auto& o : overrides) apply_override(doc, o);
    return RunConfig::from_json(doc);
}

std::string config_error_path(const std::string& yaml) {
    try {
        from_text(yaml);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(OSSIDAMP_TOOL) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(OSSIDAMP_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const auto cfg = from_text("");
    EXPECT_EQ(cfg.model.type, "lorentz");
    EXPECT_EQ(cfg.ensemble.T, std::vector<double>{1.0});
    EXPECT_EQ(cfg.threads, 1u);
}

TEST(Config, UnknownKeysRejectedWithPath) {
    EXPECT_EQ(config_error_path("model: {type: lorentz, chi_0: 0.3}"), "model.chi_0");
    EXPECT_EQ(config_error_path("modle: {}"), "modle");
}

TEST(Config, InvalidValuesRejectedWithPath) {
    EXPECT_EQ(config_error_path("model: {type: debye}"), "model.type");
    EXPECT_EQ(config_error_path("ensemble: {T: [1.0, 0.5]}"), "ensemble.T");
    EXPECT_EQ(config_error_path("ensemble: {T: [1.0, -2.0]}"), "ensemble.T[1]");
    EXPECT_EQ(config_error_path("ensemble: {regime: semiclassical}"), "ensemble.regime");
    EXPECT_EQ(config_error_path("oscillator: {omega0: 0}"), "oscillator.omega0");
    EXPECT_EQ(config_error_path("quadrature: {rel_tol: -1e-8}"), "quadrature.rel_tol");
    EXPECT_EQ(config_error_path("oracle: {n_modes: [100, 0]}"), "oracle.n_modes[1]");
    EXPECT_EQ(config_error_path("model: {type: tabulated}"), "model.path");
    EXPECT_EQ(config_error_path("schema_version: 7"), "schema_version");
    EXPECT_EQ(config_error_path("ensemble: {T: [1.0], T_grid: {start: 1, stop: 2, points: 3}}"), "ensemble.T_grid");
}

TEST(Config, MalformedYamlIsAConfigError) {
    EXPECT_THROW(parse_config_text("model: {type: lorentz"), ConfigError);
}

TEST(Config, TemperatureGridExpansion) {
    const auto lin = from_text("ensemble: {T_grid: {start: 1, stop: 3, points: 5, spacing: linear}}");
    EXPECT_EQ(lin.ensemble.T, (std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0}));
    const auto lg = from_text("ensemble: {T_grid: {start: 0.1, stop: 10, points: 3}}");
    ASSERT_EQ(lg.ensemble.T.size(), 3u);
    EXPECT_NEAR(lg.ensemble.T[1], 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(lg.ensemble.T[2], 10.0);
}

TEST(Overrides, RecognizedForm) {
    EXPECT_TRUE(is_override("--model.chi0=0.5"));
    EXPECT_FALSE(is_override("--out"));
    EXPECT_FALSE(is_override("--out=dir"));
    EXPECT_FALSE(is_override("model.chi0=0.5"));
}

TEST(Overrides, ReplaceAndCreateValues) {
    const auto cfg = from_text("model: {chi0: 0.3}", {"--model.chi0=0.5", "--ensemble.T=[0.5, 2.0]", "--oracle.n_modes=64"});
    EXPECT_EQ(cfg.model.chi0, 0.5);
    EXPECT_EQ(cfg.ensemble.T, (std::vector<double>{0.5, 2.0}));
    EXPECT_EQ(cfg.oracle.n_modes, std::vector<std::size_t>{64});
}

TEST(Overrides, UnknownKeyStillRejected) {
    EXPECT_THROW(from_text("", {"--model.chi00=0.5"}), ConfigError);
    json doc = json::object();
    doc["model"] = 3;
    EXPECT_THROW(apply_override(doc, "--model.chi0=0.5"), ConfigError);
}

TEST(Hash, IgnoresOutputAndThreadsButNotPhysics) {
    const auto a = from_text("output: {dir: a}\nrun: {threads: 1}");
    const auto b = from_text("output: {dir: b}\nrun: {threads: 4}");
    const auto c = from_text("model: {chi0: 0.31}");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Hash, ReportRoundTrip) {
    const auto cfg = from_text("model: {chi0: 0.25, omega_L: 3}\nensemble: {T: [0.5, 1.0]}\nquadrature: {cutoff: 1000}");
    const auto result = cmd_energy(cfg);
    const json report = json::parse(result.files.at("energy.json"));
    const auto again = RunConfig::from_json(report.at("config"));
    EXPECT_EQ(again.hash(), cfg.hash());
    EXPECT_EQ(report.at("config_hash"), cfg.hash());
}

TEST(Output, NumberFormatting) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_TRUE(json_number(std::numeric_limits<double>::quiet_NaN()).is_null());
}

TEST(Output, CsvRowWidthChecked) {
    CsvTable t({"a", "b"});
    t.add_row({"1", "2"});
    EXPECT_THROW(t.add_row({"1"}), std::logic_error);
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
}

TEST(Output, ParallelMapKeepsOrderAndPropagatesErrors) {
    const auto r = parallel_map<int>(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_map<int>(10, 3, [](std::size_t i) -> int { if (i == 7) throw std::runtime_error("x"); return 0; }),
                 std::runtime_error);
}

TEST(Output, ThreadCountFromEnvironment) {
    ::setenv("OSSIDAMP_THREADS", "3", 1);
    EXPECT_EQ(resolve_threads(1), 3u);
    ::setenv("OSSIDAMP_THREADS", "zero", 1);
    EXPECT_EQ(resolve_threads(2), 2u);
    ::unsetenv("OSSIDAMP_THREADS");
    EXPECT_EQ(resolve_threads(0), 1u);
}

TEST(Energy, CsvHeaderNamesUnits) {
    const auto r = cmd_energy(from_text(""));
    const auto csv = r.files.at("energy.csv");
    const auto header = csv.substr(0, csv.find('\n'));
    EXPECT_NE(header.find("(energy"), std::string::npos);
    EXPECT_EQ(r.exit_code, kExitClean);
}

TEST(Energy, OhmicQuantumFlagsDivergence) {
    const auto r = cmd_energy(from_text("model: {type: pseudo_ohmic, gamma: 0.1}"));
    EXPECT_EQ(r.exit_code, kExitDivergent);
    const json doc = json::parse(r.files.at("energy.json"));
    EXPECT_TRUE(doc.at("any_diverged").get<bool>());
    EXPECT_TRUE(doc.at("results")[0].at("U_star").at("diverged").get<bool>());
    EXPECT_TRUE(doc.at("results")[0].at("U").at("diverged").get<bool>());
}

TEST(Energy, ClassicalMeanForceEnergyIsKTOnTheGrid) {
    const auto r = cmd_energy(from_text("model: {chi0: 0.5, omega_L: 2}\nensemble: {regime: classical, T: [0.5, 1, 3]}"));
    const json doc = json::parse(r.files.at("energy.json"));
    for (const auto& row : doc.at("results")) EXPECT_EQ(row.at("U_star").at("value").get<double>(), row.at("T").get<double>());
}

TEST(Energy, UncoupledIsUndamped) {
    const auto r = cmd_energy(from_text("model: {type: none}\nensemble: {T: [0.5]}"));
    const json row = json::parse(r.files.at("energy.json")).at("results")[0];
    const double expected = 0.5 / std::tanh(1.0);
    EXPECT_NEAR(row.at("U").at("value").get<double>(), expected, 1e-15);
    EXPECT_NEAR(row.at("U_star").at("value").get<double>(), expected, 1e-15);
}

TEST(Determinism, RepeatedCommandsAreByteIdentical) {
    const auto cfg = from_text("model: {chi0: 0.5, omega_L: 2}\nensemble: {T: [0.5, 1.0]}");
    EXPECT_EQ(cmd_energy(cfg).files, cmd_energy(cfg).files);
    EXPECT_EQ(cmd_table1(cfg).files, cmd_table1(cfg).files);
}

TEST(Determinism, SweepIndependentOfThreadCount) {
    auto one = from_text("ensemble: {T: [1.0]}\nsweep: {parameter: model.chi0, values: [0.1, 0.4, 0.7]}\nrun: {threads: 1}");
    auto four = one;
    four.threads = 4;
    const auto a = cmd_sweep(one), b = cmd_sweep(four);
    EXPECT_EQ(a.files.at("sweep.csv"), b.files.at("sweep.csv"));
    // the embedded config records the thread count, so compare results and hash only
    const json ja = json::parse(a.files.at("sweep.json")), jb = json::parse(b.files.at("sweep.json"));
    EXPECT_EQ(ja.at("results").dump(), jb.at("results").dump());
    EXPECT_EQ(ja.at("config_hash"), jb.at("config_hash"));
}

TEST(Validate, DefaultModelPassesEveryCheck) {
    const auto checks = run_validation(from_text(""));
    for (const auto& c : checks) EXPECT_EQ(c.status, "pass") << c.name << ": " << c.detail;
    EXPECT_GE(checks.size(), 10u);
}

TEST(Validate, PseudoOhmicIsReportedInvalid) {
    const auto checks = run_validation(from_text("model: {type: pseudo_ohmic}\nvalidate: {kk_omega_max: 20, kk_points: 21}"));
    int failed = 0;
    for (const auto& c : checks)
        if (c.name == "kramers_kronig" || c.name == "diagonalizability") failed += c.status == "fail";
    EXPECT_EQ(failed, 2);
}

TEST(BathConverge, StrongCouplingRowsFail) {
    const auto r = cmd_bath_converge(
        from_text("model: {chi0: 1.5}\nensemble: {regime: classical}\noracle: {n_modes: [50, 100], omega_max: [50]}"));
    EXPECT_EQ(r.exit_code, kExitValidation);
    EXPECT_NE(r.files.at("bath_converge.csv").find("not positive definite"), std::string::npos);
}

TEST(Autocorr, EnvelopeMatchesDampingRate) {
    const auto r = cmd_autocorr(from_text("oscillator: {gamma: 0.3}\nensemble: {regime: classical}\nautocorr: {dt_max: 20, n_points: 201}"));
    EXPECT_EQ(r.exit_code, kExitClean);
    const json doc = json::parse(r.files.at("autocorr.json"));
    EXPECT_LT(doc.at("envelope").at("relative_error").get<double>(), 0.01);
    EXPECT_LT(doc.at("max_path_difference").get<double>(), 1e-6);
}

TEST(Tool, ExitCodes) {
    const auto out = scratch("exit");
    EXPECT_EQ(run_tool("energy " + config("undamped.yaml") + " --out " + out.string()), kExitClean);
    EXPECT_EQ(run_tool("energy " + config("pseudo_ohmic_quantum.yaml") + " --out " + out.string()), kExitDivergent);
    EXPECT_EQ(run_tool("bath-converge " + config("strong_coupling_bath.yaml") + " --out " + out.string()), kExitValidation);
    EXPECT_EQ(run_tool("energy " + config("undamped.yaml") + " --model.chi00=1 --out " + out.string()), kExitConfig);
    EXPECT_EQ(run_tool("energy /nonexistent.yaml"), kExitConfig);
    EXPECT_EQ(run_tool("frobnicate"), kExitConfig);
}

TEST(Tool, WritesDataFilesAndSidecar) {
    const auto out = scratch("files");
    ASSERT_EQ(run_tool("table1 " + config("lorentz_classical.yaml") + " --out " + out.string()), kExitClean);
    EXPECT_TRUE(std::filesystem::exists(out / "run_meta.json"));
    const json meta = json::parse(read_file(out / "run_meta.json"));
    EXPECT_EQ(meta.at("exit_code"), 0);
    EXPECT_EQ(meta.at("command"), "table1");
    const auto first = read_file(out / "table1.json");
    ASSERT_EQ(run_tool("table1 " + config("lorentz_classical.yaml") + " --out " + out.string()), kExitClean);
    EXPECT_EQ(read_file(out / "table1.json"), first);
    EXPECT_EQ(first.find("started_utc"), std::string::npos);
}

TEST(Tool, ShippedConfigsParse) {
    for (const auto& entry : std::filesystem::directory_iterator(OSSIDAMP_CONFIG_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(load_run_config(entry.path().string(), {})) << entry.path();
    }
}
