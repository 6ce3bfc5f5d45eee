#include "sitsq/runner.hpp"

#include <chrono>
#include <filesystem>

#include "sitsq/errors.hpp"
#include "sitsq/svg.hpp"

namespace sitsq {

namespace fs = std::filesystem;

PhaseScanRun compute_phase_scan(const RunConfig& cfg, unsigned threads,
                                bool field_stats) {
    PhaseScanRun run;
    run.model = build_model(cfg);
    EnsembleOptions opt;
    opt.n_traj = cfg.ensemble.n_traj;
    opt.n_threads = threads;
    opt.batch_count = cfg.ensemble.batch_count;
    opt.field_stats = field_stats;
    run.ensemble = run_ensemble(run.model.params, opt);
    run.surface = scan_phase_length(run.ensemble, run.model.z_positions,
                                    run.model.theta_grid,
                                    run.model.params.field_norm);
    return run;
}

std::vector<DetuningRow> compute_detuning_scan(const RunConfig& cfg, unsigned threads) {
    std::vector<DetuningRow> rows;
    for (double delta : cfg.scan.delta_over_taup) {
        RunConfig point = cfg;
        point.pulse.detuning_over_taup = delta;
        PhaseScanRun run = compute_phase_scan(point, threads);
        DetuningRow r;
        r.delta = delta;
        r.s_opt = run.surface.s_opt;
        r.s_opt_db = run.surface.s_opt_db;
        r.l_opt = run.surface.z_opt;
        r.std_err = run.surface.stderr_opt;
        rows.push_back(r);
    }
    return rows;
}

std::vector<PressureRow> compute_pressure_scan(const RunConfig& cfg, unsigned threads) {
    std::vector<PressureRow> rows;
    for (double temp : cfg.scan.pressures_k) {
        RunConfig point = cfg;
        point.gas.temperature_k = temp;
        point.gas.pressure_pa = 0.0;  // from the vapor-pressure fit
        PhaseScanRun run = compute_phase_scan(point, threads);
        PressureRow r;
        r.pressure_pa = run.model.pressure_pa;
        r.temperature_k = temp;
        r.s_opt = run.surface.s_opt;
        r.s_opt_db = run.surface.s_opt_db;
        r.l_opt = run.surface.z_opt;
        r.std_err = run.surface.stderr_opt;
        r.mode = point.gas.isotope_mode;
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::string> run_and_write(const RunConfig& cfg, const std::string& scan,
                                       unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(cfg.output.directory, ec);
    if (ec) throw io_error("cannot create output directory " + cfg.output.directory);
    const auto path = [&](const std::string& name) {
        return (fs::path(cfg.output.directory) / name).string();
    };

    std::vector<std::pair<std::string, std::string>> files;  // name, content
    ManifestInfo info;
    info.scan_kind = scan;
    info.master_seed = cfg.ensemble.master_seed;
    info.threads = threads;

    if (scan == "phase") {
        PhaseScanRun run = compute_phase_scan(cfg, threads);
        files.emplace_back("squeezing_surface.csv", surface_csv(run.surface));
        files.emplace_back("optimum.csv", optimum_csv(run.surface));
        info.n_traj = run.ensemble.n_traj;
        info.n_used = run.ensemble.n_used;
        info.n_discarded = run.ensemble.n_discarded;
        info.pressure_pa = run.model.pressure_pa;
        info.rho_tot = run.model.rho_tot;
        info.rho_ideal_gas = run.model.rho_ideal_gas;
        info.g_principal = run.model.g_principal;
        info.field_norm = run.model.params.field_norm;
        info.warnings = run.model.warnings;
        for (const auto& w : run.ensemble.warnings) info.warnings.push_back(w);
        info.optimum_line = format_sci(run.surface.z_opt) + " " +
                            format_sci(run.surface.theta_opt) + " " +
                            format_sci(run.surface.s_opt) + " " +
                            format_sci(run.surface.s_opt_db) + " " +
                            format_sci(run.surface.stderr_opt);
        if (cfg.output.write_svg) {
            files.emplace_back("surface_phase.svg",
                               plot_from_csv(files[0].second, "phase"));
            files.emplace_back("surface_length.svg",
                               plot_from_csv(files[0].second, "length"));
            files.emplace_back("surface_heatmap.svg",
                               plot_from_csv(files[0].second, "heatmap"));
        }
    } else if (scan == "detuning") {
        auto rows = compute_detuning_scan(cfg, threads);
        files.emplace_back("detuning_scan.csv", detuning_csv(rows));
        BuiltModel m = build_model(cfg);
        info.n_traj = cfg.ensemble.n_traj * rows.size();
        info.pressure_pa = m.pressure_pa;
        info.rho_tot = m.rho_tot;
        info.rho_ideal_gas = m.rho_ideal_gas;
        info.g_principal = m.g_principal;
        info.field_norm = m.params.field_norm;
        info.warnings = m.warnings;
        if (cfg.output.write_svg)
            files.emplace_back("detuning_scan.svg",
                               plot_from_csv(files[0].second, "detuning"));
    } else if (scan == "pressure") {
        auto rows = compute_pressure_scan(cfg, threads);
        files.emplace_back("pressure_scan.csv", pressure_csv(rows));
        BuiltModel m = build_model(cfg);
        info.n_traj = cfg.ensemble.n_traj * rows.size();
        info.pressure_pa = m.pressure_pa;
        info.rho_tot = m.rho_tot;
        info.rho_ideal_gas = m.rho_ideal_gas;
        info.g_principal = m.g_principal;
        info.field_norm = m.params.field_norm;
        info.warnings = m.warnings;
        if (cfg.output.write_svg)
            files.emplace_back("pressure_scan.svg",
                               plot_from_csv(files[0].second, "pressure"));
    } else {
        throw config_error("unknown scan kind '" + scan +
                           "' (expected phase, detuning or pressure)");
    }

    std::vector<std::string> written;
    for (const auto& [name, content] : files) {
        atomic_write_file(path(name), content);
        written.push_back(path(name));
    }
    info.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    atomic_write_file(path("manifest.txt"), manifest_text(cfg, info, files));
    written.push_back(path("manifest.txt"));
    return written;
}

} // namespace sitsq
