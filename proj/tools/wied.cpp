#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "wied/config.hpp"
#include "wied/errors.hpp"
#include "wied/runner.hpp"
#include "wied/solver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"space-time functional minimizer and parabolic oracle"};
    app.require_subcommand(1);

    std::string config_path, out_dir, field_path;
    bool quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--quiet", quiet, "suppress progress output");
    };

    CLI::App* solve = app.add_subcommand("solve", "minimize the space-time functional");
    add_common(solve);
    CLI::App* sweep = app.add_subcommand("sweep", "epsilon sweep against the reference");
    add_common(sweep);
    CLI::App* reference = app.add_subcommand("reference", "implicit Euler reference run");
    add_common(reference);
    CLI::App* diagnose = app.add_subcommand("diagnose", "estimate checks on a field dump");
    add_common(diagnose);
    diagnose->add_option("--field", field_path, "field dump (.json/.f64 stem)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const wied::RunConfig cfg = wied::load_config(config_path);
        std::string out = !out_dir.empty()
                              ? out_dir
                              : (!cfg.output_dir.empty() ? cfg.output_dir : "out");
        if (solve->parsed()) return wied::run_solve(cfg, out, quiet);
        if (sweep->parsed()) return wied::run_sweep(cfg, out, quiet);
        if (reference->parsed()) return wied::run_reference(cfg, out, quiet);
        if (diagnose->parsed()) return wied::run_diagnose(cfg, out, quiet, field_path);
    } catch (const wied::nonconvergence_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
