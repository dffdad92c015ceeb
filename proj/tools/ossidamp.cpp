// ossidamp.cpp: Command-line front end

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ossidamp/cli/commands.hpp"

namespace {

using namespace ossidamp::cli;

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        const std::vector<std::string>& overrides, const std::vector<std::string>& argv) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path, overrides);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::string started = utc_timestamp();
    CommandResult result;
    try {
        if (command == "energy") result = cmd_energy(cfg);
        else if (command == "table1") result = cmd_table1(cfg);
        else if (command == "validate") result = cmd_validate(cfg);
        else if (command == "bath-converge") result = cmd_bath_converge(cfg);
        else if (command == "autocorr") result = cmd_autocorr(cfg);
        else result = cmd_sweep(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return kExitValidation;
    }

    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
    for (const auto& [name, content] : result.files) write_file(dir / name, content);
    json meta{{"command", command},
              {"config_path", config_path},
              {"config_hash", cfg.hash()},
              {"argv", argv},
              {"threads", resolve_threads(cfg.threads)},
              {"version", OSSIDAMP_VERSION},
              {"started_utc", started},
              {"finished_utc", utc_timestamp()},
              {"exit_code", result.exit_code}};
    write_file(dir / "run_meta.json", canonical_json(meta));
    std::cout << result.summary;
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    // --section.key=value overrides are pulled out before CLI11 sees the arguments.
    std::vector<std::string> all(argv, argv + argc), overrides, rest;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i > 0 && is_override(all[i])) overrides.push_back(all[i]);
        else rest.push_back(all[i]);
    }

    CLI::App app{"Equilibrium thermodynamics of a damped harmonic oscillator"};
    app.set_version_flag("--version", std::string(OSSIDAMP_VERSION));
    app.require_subcommand(1);
    std::string config_path, out_dir;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"energy", "U*, U, F*, S* over the temperature grid"},
        {"table1", "U versus U* for no, Ohmic and general damping"},
        {"validate", "model validity, mode identities and thermodynamic consistency"},
        {"bath-converge", "discrete-bath oracle convergence table"},
        {"autocorr", "position autocorrelation over a time grid"},
        {"sweep", "energies over a list of values of one config key"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "YAML config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output.dir of the config)");
        sub->footer("Any config value can be overridden with --section.key=value.");
    }

    std::vector<const char*> args;
    for (const auto& s : rest) args.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return run(command, config_path, out_dir, overrides, all);
}
