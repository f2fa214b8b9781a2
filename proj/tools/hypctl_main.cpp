// Command-line front end for the compensator toolkit: validate a plant
// configuration, run the design pipeline, simulate the closed loop, and
// verify a finished design.

#include "hypctl/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Backstepping compensator design for coupled hyperbolic PDE-ODE systems"};
    app.require_subcommand(1);

    std::string config_path, design_path, out_path = "design.json", out_dir = "sim_out";
    hypctl::CommandOverrides ov;
    int grid = -1;
    uint64_t seed = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--grid", grid, "override the grid resolution N");
        sub->add_option("--seed", seed, "override the design seed")->each([&](const std::string&) {
            have_seed = true;
        });
        sub->add_flag("--plots", ov.plots, "emit SVG plots next to the CSV output");
    };

    CLI::App* validate = app.add_subcommand("validate", "check the plant assumptions");
    validate->add_option("config", config_path, "plant configuration file")->required();

    CLI::App* design = app.add_subcommand("design", "run the full compensator design");
    design->add_option("config", config_path, "plant configuration file")->required();
    design->add_option("-o,--output", out_path, "design output file (JSON)");
    add_common(design);

    CLI::App* simulate = app.add_subcommand("simulate", "simulate the output-feedback loop");
    simulate->add_option("config", config_path, "plant configuration file")->required();
    simulate->add_option("-d,--design", design_path, "design output file")->required();
    simulate->add_option("-o,--output", out_dir, "output directory for trace CSVs");
    add_common(simulate);

    CLI::App* verify = app.add_subcommand("verify", "re-run the design checks");
    verify->add_option("config", config_path, "plant configuration file")->required();
    verify->add_option("-d,--design", design_path, "design output file")->required();
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : hypctl::kExitUsage;
    }

    if (grid > 0)
        ov.grid_N = grid;
    if (have_seed)
        ov.seed = seed;

    try {
        if (validate->parsed())
            return hypctl::cmd_validate(config_path, std::cout);
        if (design->parsed())
            return hypctl::cmd_design(config_path, out_path, ov, std::cout);
        if (simulate->parsed())
            return hypctl::cmd_simulate(config_path, design_path, out_dir, ov, std::cout);
        if (verify->parsed())
            return hypctl::cmd_verify(config_path, design_path, ov, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hypctl::kExitFailed;
    }
    return hypctl::kExitUsage;
}
