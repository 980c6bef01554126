/**
 * @file klshell_cli.cpp
 * @brief Command-line front end: `run` executes a scenario, `compare` prints the NRMSE of two snapshots.
 */

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "klshell/io.hpp"
#include "klshell/postprocess.hpp"
#include "klshell/runner.hpp"
#include "klshell/scenario.hpp"

namespace {

int fail(const std::string& category, const std::string& message) {
    std::string line = message;
    for (char& c : line)
        if (c == '\n' || c == '\r') c = ' ';
    std::cerr << "error: " << category << ": " << line << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin-plate wave solver (grid-characteristic method)"};
    app.require_subcommand(1);

    std::string scenario_path;
    klshell::RunOptions opt;
    std::optional<int> order;
    std::optional<double> courant;
    auto* run = app.add_subcommand("run", "Run a TOML scenario and write CSV/PGM artifacts");
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    run->add_option("--threads", opt.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--order", order, "Interpolation order override (1..5)");
    run->add_option("--courant", courant, "Courant number override (0, 1]");

    std::string file_a, file_b;
    auto* cmp = app.add_subcommand("compare", "Print NRMSE of snapshot A against reference snapshot B");
    cmp->add_option("a", file_a, "Snapshot CSV under test")->required();
    cmp->add_option("b", file_b, "Reference snapshot CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (run->parsed()) {
            opt.order = order;
            opt.courant = courant;
            const auto scenario = klshell::parse_scenario(scenario_path);
            const auto manifest = klshell::run_scenario(scenario, opt);
            std::cout << "wrote " << manifest.files.size() << " files to " << opt.out_dir << " (" << manifest.steps
                      << " steps)\n";
        } else if (cmp->parsed()) {
            const auto a = klshell::io::read_snapshot(file_a);
            const auto b = klshell::io::read_snapshot(file_b);
            std::cout << klshell::io::format_number(klshell::post::nrmse(a, b)) << '\n';
        }
    } catch (const klshell::Error& e) {
        return fail(e.category(), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
