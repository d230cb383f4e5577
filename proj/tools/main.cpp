#include <Eigen/Core>
#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "igs/simulation.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int cmd_run(const std::string& config_path, const std::string& preset, int steps,
            const std::string& out_dir, bool positivity) {
    igs::RunConfig cfg;
    if (!config_path.empty())
        cfg = igs::config_from_json(read_file(config_path));
    else
        cfg = igs::preset_config(preset.empty() ? "desk" : preset);
    if (steps > 0) cfg.max_steps = steps;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (positivity) cfg.positivity = true;

    igs::SimulationState state = igs::build_initial_condition(cfg);
    std::cout << "dofs: " << state.basis.num_dofs() << " (scalar), steps: "
              << cfg.max_steps << ", out: " << cfg.out_dir << "\n";
    const igs::RunResult result = igs::run_simulation(state);
    const igs::RunLogRecord& last = result.log.back();
    std::cout << "finished: " << result.termination << " after " << last.k
              << " steps, t = " << last.t << ", area = " << last.area
              << ", dofs = " << last.dofs << ", refinements = "
              << result.refinement_events << "\n";
    return 0;
}

int cmd_table1() {
    const auto table = igs::table1_harness();
    std::cout << "projection error of the sphere mapping (radius 40)\n";
    std::cout << std::left << std::setw(6) << "n" << std::setw(6) << "p"
              << "error\n";
    for (const auto& row : table) {
        std::cout << std::left << std::setw(6) << row.n << std::setw(6) << row.p
                  << std::scientific << std::setprecision(2) << row.error << "\n";
        std::cout.unsetf(std::ios::scientific);
    }
    return 0;
}

int cmd_export(const std::string& ckpt, const std::string& out, int samples) {
    igs::SimulationState state = igs::load_checkpoint(ckpt);
    const int m = samples > 0 ? samples : state.config.mesh_samples;
    igs::export_surface(state, m, out);
    std::cout << "wrote " << out << " (step " << state.step << ", t = " << state.t
              << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pattern-driven growth of a closed spline surface"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir, ckpt, out_vtk;
    int steps = 0, samples = 0;
    bool positivity = false, serial = false;

    CLI::App* run = app.add_subcommand("run", "time-step a configuration");
    run->add_option("config", config_path, "JSON configuration file");
    run->add_option("--preset", preset, "desk | paper-healthy | paper-polymicrogyria")
        ->check(CLI::IsMember({"desk", "paper-healthy", "paper-polymicrogyria"}));
    run->add_option("--steps", steps, "override the step count");
    run->add_option("--out-dir", out_dir, "override the output directory");
    run->add_flag("--positivity", positivity, "clip concentrations at zero (QP solve)");
    run->add_flag("--serial", serial, "single-threaded linear algebra");

    CLI::App* table1 = app.add_subcommand("table1", "sphere projection error table");
    table1->add_flag("--serial", serial, "single-threaded linear algebra");

    CLI::App* exp = app.add_subcommand("export", "write a checkpoint as a VTK mesh");
    exp->add_option("checkpoint", ckpt, "checkpoint file")->required();
    exp->add_option("output", out_vtk, "output .vtk path")->required();
    exp->add_option("--samples", samples, "per-face samples per direction");

    CLI11_PARSE(app, argc, argv);
    if (serial) Eigen::setNbThreads(1);

    try {
        if (run->parsed()) return cmd_run(config_path, preset, steps, out_dir, positivity);
        if (table1->parsed()) return cmd_table1();
        if (exp->parsed()) return cmd_export(ckpt, out_vtk, samples);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
