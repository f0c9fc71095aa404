#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magspring/cli.hpp"
#include "magspring/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::string materials_file;
    int workers = -1;
    bool deterministic = true;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "JSON config file (defaults used when omitted)");
    cmd->add_option("--set", args.overrides, "Override a config value, e.g. --set geometry.r_frame_mm=18");
    cmd->add_option("-o,--output", args.output_dir, "Output directory (overrides config)");
    cmd->add_option("--materials", args.materials_file, "Material library JSON (overrides config)");
    cmd->add_option("--workers", args.workers, "Sweep worker count (0 = auto / MAGSPRING_WORKERS)");
    cmd->add_flag("--deterministic,!--no-deterministic", args.deterministic,
                  "Deterministic solver mode (default on)");
}

magspring::cli::RunConfig load(const CommonArgs& args) {
    std::vector<std::string> overrides = args.overrides;
    if (!args.output_dir.empty()) overrides.push_back("output_dir=" + args.output_dir);
    if (!args.materials_file.empty()) overrides.push_back("materials.library_file=" + args.materials_file);
    if (args.workers >= 0) overrides.push_back("workers=" + std::to_string(args.workers));
    overrides.push_back(std::string("solver.deterministic=") + (args.deterministic ? "true" : "false"));
    if (args.config_path.empty()) return magspring::cli::load_default_config(overrides);
    return magspring::cli::load_config_file(args.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magspring: quasi-static magneto-mechanical model of an MRE magnetic-spring gripper"};
    app.require_subcommand(1);

    CommonArgs geo_args, sweep_args, cap_args, dump_args;
    CLI::App* cmd_geometry = app.add_subcommand("geometry", "Report grasp radii and the wrap-angle limit");
    add_common(cmd_geometry, geo_args);

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "Coenergy sweep, spline fit and torque curve (CSV outputs)");
    add_common(cmd_sweep, sweep_args);

    CLI::App* cmd_capacity = app.add_subcommand("capacity", "Payload predictions per material (CSV)");
    add_common(cmd_capacity, cap_args);

    CLI::App* cmd_dump = app.add_subcommand("field-dump", "Solve one wrap angle and dump element fields");
    add_common(cmd_dump, dump_args);
    double dump_theta_deg = 0.0;
    bool dump_mesh = false;
    cmd_dump->add_option("--theta-deg", dump_theta_deg, "Wrap angle in degrees")->required();
    cmd_dump->add_flag("--mesh-out", dump_mesh, "Also export the mesh as plain text");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_geometry->parsed()) {
            magspring::cli::run_geometry(load(geo_args), std::cout);
        } else if (cmd_sweep->parsed()) {
            magspring::cli::run_sweep(load(sweep_args), std::cout);
        } else if (cmd_capacity->parsed()) {
            magspring::cli::run_capacity(load(cap_args), std::cout);
        } else if (cmd_dump->parsed()) {
            magspring::cli::run_field_dump(load(dump_args), dump_theta_deg, dump_mesh, std::cout);
        }
    } catch (const magspring::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
