// solve <config.json> [--out DIR] [--jobs N] [--seed S] [--timing]
//
// Exit status: 0 when every run converged, 2 when any run failed, 1 on a config error.

#include "fredholm/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    namespace fb = fredholm::bench;
    CLI::App app{"Run a benchmark config and write a CSV table of the results"};
    std::string config_path;
    std::string out_dir = ".";
    unsigned jobs = 1;
    std::optional<std::uint64_t> seed;
    bool timing = false;
    app.add_option("config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 256u));
    app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--timing", timing, "fill the wall_ms column");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    fb::ExperimentConfig cfg;
    try {
        cfg = fb::load_config(config_path);
        if (seed) cfg.seed = *seed;
        (void)fb::make_problem(cfg.problem);
    } catch (const fredholm::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    try {
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        const auto records = fb::run_experiment(cfg, jobs);
        fb::emit_csv(records, dir / cfg.csv_name, timing);
        if (cfg.profiles) {
            const auto grid = fredholm::build_grid(0.0, 1.0, cfg.rule, cfg.n);
            for (std::size_t i = 0; i < records.size(); ++i)
                if (records[i].solution.size() > 0)
                    fb::emit_profile(records[i].solution, grid, dir / ("profile_" + std::to_string(i) + "_" + records[i].method + ".csv"));
        }
        bool ok = true;
        for (const auto& r : records) {
            std::cout << r.method << " delta=" << fb::format_double(r.delta)
                      << (r.converged ? " converged" : " FAILED") << (r.converged ? "" : " (" + r.param_summary + ")") << '\n';
            ok = ok && r.converged;
        }
        return ok ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
