#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Oberbeck-Boussinesq realization pipeline: spectrum, reduce, control, realize"};
    std::string stage, config_path, out;
    long seed = -1;
    int threads = 0;
    bool plot = false;
    std::vector<std::string> overrides;
    app.add_option("--stage,stage", stage, "spectrum | reduce | control | realize | all (default)");
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "seed for every random draw");
    app.add_option("--threads", threads, "worker threads (fallback: OB_REALIZE_THREADS)");
    app.add_flag("--plot", plot, "emit SVG phase portraits");
    app.add_option("--set", overrides, "dotted override, e.g. realize.xi=1e-2 (repeatable)");
    CLI11_PARSE(app, argc, argv);

    try {
        ob::json cfg = ob::cli::default_config();
        if (!config_path.empty()) cfg.merge_patch(ob::read_json(config_path));
        for (const auto& o : overrides) ob::cli::apply_override(cfg, o);
        if (!out.empty()) cfg["out"] = out;
        if (seed >= 0) cfg["seed"] = seed;
        if (plot) cfg["plot"] = true;
        if (threads > 0) {
            cfg["threads"] = threads;
        } else if (const char* env = std::getenv("OB_REALIZE_THREADS")) {
            const int t = std::atoi(env);
            if (t < 1) throw ob::Error("config", "OB_REALIZE_THREADS must be a positive integer");
            cfg["threads"] = t;
        }
        if (stage.empty()) stage = "all";
        const ob::cli::RunConfig rc = ob::cli::make_run_config(cfg);

        if (stage == "spectrum") {
            ob::cli::cmd_spectrum(rc);
        } else if (stage == "reduce") {
            ob::cli::cmd_reduce(rc);
        } else if (stage == "control") {
            ob::cli::cmd_control(rc);
        } else if (stage == "realize") {
            ob::cli::cmd_realize(rc);
        } else if (stage == "all") {
            ob::cli::cmd_spectrum(rc);
            ob::cli::cmd_reduce(rc);
            ob::cli::cmd_control(rc);
            ob::cli::cmd_realize(rc);
        } else {
            throw ob::Error("config", "unknown stage '" + stage + "'");
        }
    } catch (const ob::Error& e) {
        std::cerr << "error " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [internal] " << e.what() << "\n";
        return 3;
    }
    return 0;
}
