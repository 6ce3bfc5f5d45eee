#ifndef SITSQ_CONFIG_HPP
#define SITSQ_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sitsq/atomic_data.hpp"
#include "sitsq/sde.hpp"

namespace sitsq {

// Flat key = value configuration with [section] headers. Unknown keys are
// rejected; every field has a default matching the shipped desk-scale setup.
struct RunConfig {
    struct Gas {
        double temperature_k = 273.0;
        double pressure_pa = 0.0;        // 0 = from the vapor-pressure fit
        double atom_number_total = 0.0;  // 0 = off; otherwise rescales rho_tot
        std::string isotope_mode = "202-only";  // or "all"
        bool operator==(const Gas&) const = default;
    } gas;

    struct Pulse {
        double duration_fs = 4.0;
        std::string amplitude = "soliton";  // or a number, rad/s (value of A)
        double detuning_over_taup = 0.0;
        double initial_phase_rad = 0.0;
        bool operator==(const Pulse&) const = default;
    } pulse;

    struct Fiber {
        double length_m = 0.05;
        double core_diameter_m = 10e-6;
        double kappa_per_m = 0.0;
        std::string group_velocity = "c";  // or a number, m/s
        bool operator==(const Fiber&) const = default;
    } fiber;

    struct GridCfg {
        std::uint64_t n_z = 250;
        std::uint64_t n_t = 2048;
        double window_over_taup = 32.0;
        std::uint64_t n_freq_bins = 1;
        double span_fwhm = 6.0;
        std::uint64_t n_z_samples = 50;
        bool operator==(const GridCfg&) const = default;
    } grid;

    struct Ensemble {
        std::uint64_t n_traj = 2000;
        std::uint64_t master_seed = 1;
        std::uint64_t batch_count = 10;
        bool zero_noise = false;
        double initial_inversion = -0.5;
        bool operator==(const Ensemble&) const = default;
    } ensemble;

    struct Model {
        double gamma_p_over_gamma0 = 3.0;
        double lorentz_coeff = 0.5;
        bool include_secondary_lines = true;
        std::string data_file;                  // "" = bundled table
        double field_bath_temperature_k = -1.0; // -1 = gas temperature
        double atom_bath_temperature_k = -1.0;  // -1 = gas temperature
        bool operator==(const Model&) const = default;
    } model;

    struct Scan {
        double theta_min_rad = -1.5707963267948966;
        double theta_max_rad = 1.5707963267948966;
        std::uint64_t n_theta = 157;
        std::vector<double> delta_over_taup = {0.0, 0.001, 0.01, 0.1, 0.5,
                                               1.0, 2.0, 4.0, 8.0, 16.0};
        std::vector<double> pressures_k = {273.0, 293.0, 303.0};
        bool operator==(const Scan&) const = default;
    } scan;

    struct Output {
        std::string directory = "out";
        bool write_svg = false;
        bool operator==(const Output&) const = default;
    } output;

    bool operator==(const RunConfig&) const = default;
};

// Parses and fully validates; throws config_error with file:line context.
RunConfig parse_config(const std::string& path);

// Parse from an already-loaded string (origin names the source in errors).
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical serialization; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Whole-config validation (also called by parse_config). Returns warnings.
std::vector<std::string> validate_config(const RunConfig& cfg);

// Everything derived from a RunConfig that a run needs.
struct BuiltModel {
    SimParams params;
    GasSample sample;
    double pressure_pa = 0.0;       // pressure actually used
    double rho_tot = 0.0;           // density actually used (after overrides)
    double rho_ideal_gas = 0.0;     // ideal-gas value, recorded alongside
    double g_principal = 0.0;
    double tau_p = 0.0;             // s
    std::vector<double> theta_grid;
    std::vector<double> z_positions;
    std::vector<std::string> warnings;
};

BuiltModel build_model(const RunConfig& cfg);

} // namespace sitsq

#endif
