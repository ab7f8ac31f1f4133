// atomlight command line runner.
//
//   atomlight_cli run <config.json> [--out DIR] [--seed U64] [--threads N]
//   atomlight_cli sweep <config.json> --param PATH --values V1,V2,... [--out DIR] [--seed U64] [--threads N]
//
// Exit codes: 0 success, 2 configuration error, 3 analysis error.

#include "atomlight/app/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

constexpr int exit_config = 2;
constexpr int exit_analysis = 3;

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        const std::string t = item.substr(b, e - b + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size()) throw atomlight::ConfigInvalid("--values: '" + t + "' is not a number");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    namespace app = atomlight::app;
    CLI::App cli{"atomlight scenario runner"};
    cli.set_version_flag("--version", std::string("atomlight ") + atomlight::version);
    cli.require_subcommand(1);

    std::string config_path, out_dir, param, values;
    std::uint64_t seed = 0;
    int threads = 1;

    std::vector<CLI::Option*> seed_flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides config.output)");
        seed_flags.push_back(sub->add_option("--seed", seed, "Random seed (overrides config.seed)"));
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto* run_cmd = cli.add_subcommand("run", "Run the analyses listed in the config");
    add_common(run_cmd);
    auto* sweep_cmd = cli.add_subcommand("sweep", "Rerun the analyses over values of one scalar parameter");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", param, "Dotted path of a numeric config field")->required();
    sweep_cmd->add_option("--values", values, "Comma separated values (may be empty)")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    app::RunOptions opt;
    opt.threads = threads;
    if (!out_dir.empty()) opt.out = out_dir;
    for (auto* f : seed_flags)
        if (f->count()) opt.seed = seed;

    app::RunConfig cfg;
    try {
        cfg = app::parse_config(app::load_json_file(config_path));
    } catch (const atomlight::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "ConfigInvalid: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (run_cmd->parsed()) {
            app::run(cfg, opt);
        } else {
            const auto t = app::run_sweep(cfg, param, parse_values(values), opt);
            std::cout << t.rows.size() << " sweep rows\n";
        }
    } catch (const atomlight::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return exit_config;
    } catch (const atomlight::BadParameterPath& e) {
        std::cerr << e.what() << "\n";
        return exit_config;
    } catch (const atomlight::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_analysis;
    } catch (const std::exception& e) {
        std::cerr << "AnalysisFailed: " << e.what() << "\n";
        return exit_analysis;
    }
    return 0;
}
