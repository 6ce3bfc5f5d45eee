#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sitsq/config.hpp"
#include "sitsq/errors.hpp"
#include "sitsq/runner.hpp"
#include "sitsq/svg.hpp"

namespace {

unsigned resolve_threads(unsigned flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SIT_SQUEEZE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 0;  // hardware concurrency
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sit-squeeze: stochastic pulse-propagation and homodyne "
                 "squeezing simulator for mercury-filled hollow-core fibers"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "execute a simulation scan");
    std::string config_path, scan = "phase", out_dir;
    unsigned threads = 0;
    long long seed = -1;
    bool paper_scale = false;
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--scan", scan, "phase | detuning | pressure");
    run->add_option("--threads", threads, "worker threads (default: hardware)");
    run->add_option("--seed", seed, "override ensemble.master_seed");
    run->add_flag("--paper-scale", paper_scale, "raise n_traj to 12000");
    run->add_option("--out", out_dir, "override output.directory");

    // plot
    auto* plot = app.add_subcommand("plot", "render an SVG from a result CSV");
    std::string csv_path, kind, svg_path;
    plot->add_option("--csv", csv_path, "input CSV")->required();
    plot->add_option("--kind", kind, "phase | length | heatmap | detuning | pressure")
        ->required();
    plot->add_option("--out", svg_path, "output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        sitsq::RunConfig cfg;
        try {
            cfg = sitsq::parse_config(config_path);
            if (seed >= 0) cfg.ensemble.master_seed = static_cast<std::uint64_t>(seed);
            if (paper_scale) cfg.ensemble.n_traj = 12000;
            if (!out_dir.empty()) cfg.output.directory = out_dir;
            if (scan != "phase" && scan != "detuning" && scan != "pressure") {
                std::cerr << "error: unknown scan kind '" << scan << "'\n";
                return 1;
            }
        } catch (const sitsq::config_error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        }
        try {
            const auto files = sitsq::run_and_write(cfg, scan, resolve_threads(threads));
            for (const auto& f : files) std::cout << "wrote " << f << "\n";
            return 0;
        } catch (const sitsq::config_error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        } catch (const sitsq::divergence_error& e) {
            std::cerr << "divergence failure: " << e.what() << "\n";
            return 2;
        } catch (const sitsq::io_error& e) {
            std::cerr << "I/O error: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    if (plot->parsed()) {
        try {
            std::ifstream in(csv_path, std::ios::binary);
            if (!in) {
                std::cerr << "plot error: cannot open " << csv_path << "\n";
                return 4;
            }
            std::string csv((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
            const std::string svg = sitsq::plot_from_csv(csv, kind);
            sitsq::atomic_write_file(svg_path, svg);
            std::cout << "wrote " << svg_path << "\n";
            return 0;
        } catch (const sitsq::plot_error& e) {
            std::cerr << "plot error: " << e.what() << "\n";
            return 4;
        } catch (const sitsq::io_error& e) {
            std::cerr << "I/O error: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "plot error: " << e.what() << "\n";
            return 4;
        }
    }
    return 0;
}
