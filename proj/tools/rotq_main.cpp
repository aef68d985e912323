// rotq: scenario runner for the rotation-invariant hybrid-qubit simulator.
//
//   rotq run <config.json>       run a sweep config, write the CSV table
//   rotq preset <name>           run a shipped preset by name
//   rotq coeffs <config.json>    dump the channel coupling tensor as CSV
//   rotq classify <config.json>  invariance-condition report for the channel
//   rotq list-presets            list shipped preset names
//
// Exit codes: 0 success, 1 validation error, 2 numeric-convergence failure.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rotq/scenario.hpp"

namespace {

std::string preset_directory() {
    if (const char* env = std::getenv("ROTQ_PRESETS_DIR")) return env;
#ifdef ROTQ_DEFAULT_PRESET_DIR
    return ROTQ_DEFAULT_PRESET_DIR;
#else
    return "presets";
#endif
}

struct CommonOpts {
    std::string out;
    double grid_scale = 1.0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_threads = true) {
    cmd->add_option("--out", opts.out, "Output path (default: the config's 'output' field)");
    cmd->add_option("--grid-scale", opts.grid_scale,
                    "Multiply the quadrature resolution (convergence studies)");
    if (with_threads)
        cmd->add_option("--threads", opts.threads, "Worker threads (default: all available)");
}

int run_table(const rotq::ScenarioConfig& cfg, const CommonOpts& opts) {
    std::string out = opts.out.empty() ? cfg.output : opts.out;
    if (cfg.protocol == rotq::Protocol::coeffs) {
        rotq::ModeCoupling c = rotq::pipeline_coupling(cfg, opts.grid_scale);
        std::ofstream os(out, std::ios::binary);
        if (!os) throw rotq::ValidationError("output: cannot open '" + out + "'");
        rotq::write_coupling_csv(os, c);
        std::cout << "wrote " << out << " (coupling table)\n";
        return 0;
    }
    rotq::SweepTable table = rotq::run_scenario(cfg, opts.threads, opts.grid_scale);
    rotq::emit_csv(table, out);
    std::cout << "wrote " << out << " (" << table.rows.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for rotation-invariant hybrid polarization-OAM photonic qubits"};
    app.require_subcommand(1);

    std::string config_path, preset_name, coeffs_path, classify_path;
    CommonOpts run_opts, preset_opts, coeffs_opts;
    double classify_scale = 1.0;

    CLI::App* cmd_run = app.add_subcommand("run", "Run a scenario config");
    cmd_run->add_option("config", config_path, "Scenario config (JSON)")->required();
    add_common(cmd_run, run_opts);

    CLI::App* cmd_preset = app.add_subcommand("preset", "Run a shipped preset");
    cmd_preset->add_option("name", preset_name, "Preset name (see list-presets)")->required();
    add_common(cmd_preset, preset_opts);

    CLI::App* cmd_coeffs = app.add_subcommand("coeffs", "Dump the channel coupling tensor");
    cmd_coeffs->add_option("config", coeffs_path, "Mask/channel config (JSON)")->required();
    add_common(cmd_coeffs, coeffs_opts, false);

    CLI::App* cmd_classify =
        app.add_subcommand("classify", "Check the fidelity-invariance condition for a channel");
    cmd_classify->add_option("config", classify_path, "Channel config (JSON)")->required();
    cmd_classify->add_option("--grid-scale", classify_scale, "Quadrature resolution multiplier");

    CLI::App* cmd_list = app.add_subcommand("list-presets", "List shipped preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_run->parsed()) return run_table(rotq::load_config(config_path), run_opts);
        if (cmd_preset->parsed()) {
            std::string path = rotq::preset_path(preset_directory(), preset_name);
            return run_table(rotq::load_config(path), preset_opts);
        }
        if (cmd_coeffs->parsed()) {
            rotq::ScenarioConfig cfg = rotq::load_config(coeffs_path);
            CommonOpts o = coeffs_opts;
            if (o.out.empty()) o.out = "coeffs.csv";
            rotq::ModeCoupling c = rotq::pipeline_coupling(cfg, o.grid_scale);
            std::ofstream os(o.out, std::ios::binary);
            if (!os) throw rotq::ValidationError("output: cannot open '" + o.out + "'");
            rotq::write_coupling_csv(os, c);
            std::cout << "wrote " << o.out << " (coupling table)\n";
            return 0;
        }
        if (cmd_classify->parsed()) {
            rotq::ClassifyReport rep =
                rotq::classify_channel(rotq::load_config(classify_path), classify_scale);
            std::cout << "invariance: " << (rep.holds ? "holds" : "violated") << "\n"
                      << "max_dev: " << rep.max_dev << "\n"
                      << "predicted_mub_fidelity: " << rep.predicted_fidelity << "\n"
                      << "direct_mub_fidelity: " << rep.direct_fidelity << "\n";
            return 0;
        }
        if (cmd_list->parsed()) {
            for (const std::string& name : rotq::list_presets(preset_directory()))
                std::cout << name << "\n";
            return 0;
        }
    } catch (const rotq::convergence_error& e) {
        std::cerr << "numeric convergence failure: " << e.what() << "\n";
        return 2;
    } catch (const rotq::ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
