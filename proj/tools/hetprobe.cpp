// hetprobe <scenario> [--config FILE] [--set k=v ...] [--seed U64] [--out DIR] [--threads N]
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "hetprobe/hetprobe.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw hetprobe::InputError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dual-frequency dispersive probe simulator"};
    app.set_version_flag("--version", hetprobe::kVersion);

    std::string scenario, config_file, out_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool list_keys = false;

    std::vector<std::string> names;
    for (const auto& [s, n] : hetprobe::scenario_names()) names.push_back(n);
    app.add_option("scenario", scenario, "scenario to run")->check(CLI::IsMember(names));
    app.add_option("--config", config_file, "JSON configuration file");
    app.add_option("--set", overrides, "override one key, e.g. --set spectrum.shots=32")->allow_extra_args(false);
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (default $HETPROBE_OUTPUT_DIR or ./hetprobe-out)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = all cores");
    app.add_flag("--list-keys", list_keys, "print every configuration key with its default and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (list_keys) {
        for (const auto& k : hetprobe::config_schema())
            std::cout << k.path << " = " << k.fallback.dump() << "    # " << k.help << "\n";
        return 0;
    }
    if (scenario.empty()) {
        std::cerr << "error: a scenario is required\n" << app.help();
        return 1;
    }

    try {
        hetprobe::Json raw = config_file.empty() ? hetprobe::Json::object() : hetprobe::parse_config_text(read_file(config_file));
        for (const auto& o : overrides) hetprobe::apply_override(raw, o);
        if (*seed_opt) raw["seed"] = seed;
        if (*threads_opt) raw["threads"] = threads;
        if (*out_opt) raw["output_dir"] = out_dir;

        const auto cfg = hetprobe::validate_config(hetprobe::parse_scenario(scenario), raw);
        const auto bundle = hetprobe::run_scenario(cfg);
        const auto dir = hetprobe::resolve_output_dir(cfg);
        for (const auto& f : hetprobe::write_bundle(bundle, dir)) std::cout << f.string() << "\n";

        for (const auto& [name, chk] : bundle.summary["checks"].items())
            std::cout << (chk.value("pass", false) ? "PASS " : "FAIL ") << name << "\n";
        return 0;
    } catch (const hetprobe::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const hetprobe::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const hetprobe::UnsupportedConfiguration& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const hetprobe::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
