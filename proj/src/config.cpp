#include "sitsq/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sitsq/constants.hpp"
#include "sitsq/errors.hpp"
#include "sitsq/lineshape.hpp"

namespace sitsq {

using namespace constants;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw config_error(where + ": expected a number, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& v, const std::string& where) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error(where + ": expected a nonnegative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error(where + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw config_error(where + ": empty element in list '" + v + "'");
        out.push_back(to_double(item, where));
    }
    if (out.empty()) throw config_error(where + ": empty list");
    return out;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i) s += ",";
        s += buf;
    }
    return s;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;

    const auto where = [&](const std::string& key) {
        return origin + ":" + std::to_string(lineno) + ": [" + section + "] " + key;
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            const bool known =
                section == "gas" || section == "pulse" || section == "fiber" ||
                section == "grid" || section == "ensemble" || section == "model" ||
                section == "scan" || section == "output";
            if (!known)
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");

        const std::string w = where(key);
        bool handled = true;
        if (section == "gas") {
            if (key == "temperature_K") cfg.gas.temperature_k = to_double(val, w);
            else if (key == "pressure_Pa") cfg.gas.pressure_pa = to_double(val, w);
            else if (key == "atom_number_total") cfg.gas.atom_number_total = to_double(val, w);
            else if (key == "isotope_mode") cfg.gas.isotope_mode = val;
            else handled = false;
        } else if (section == "pulse") {
            if (key == "duration_fs") cfg.pulse.duration_fs = to_double(val, w);
            else if (key == "amplitude") cfg.pulse.amplitude = val;
            else if (key == "detuning_over_taup") cfg.pulse.detuning_over_taup = to_double(val, w);
            else if (key == "initial_phase_rad") cfg.pulse.initial_phase_rad = to_double(val, w);
            else handled = false;
        } else if (section == "fiber") {
            if (key == "length_m") cfg.fiber.length_m = to_double(val, w);
            else if (key == "core_diameter_m") cfg.fiber.core_diameter_m = to_double(val, w);
            else if (key == "kappa_per_m") cfg.fiber.kappa_per_m = to_double(val, w);
            else if (key == "group_velocity") cfg.fiber.group_velocity = val;
            else handled = false;
        } else if (section == "grid") {
            if (key == "n_z") cfg.grid.n_z = to_u64(val, w);
            else if (key == "n_t") cfg.grid.n_t = to_u64(val, w);
            else if (key == "window_over_taup") cfg.grid.window_over_taup = to_double(val, w);
            else if (key == "n_freq_bins") cfg.grid.n_freq_bins = to_u64(val, w);
            else if (key == "span_fwhm") cfg.grid.span_fwhm = to_double(val, w);
            else if (key == "n_z_samples") cfg.grid.n_z_samples = to_u64(val, w);
            else handled = false;
        } else if (section == "ensemble") {
            if (key == "n_traj") cfg.ensemble.n_traj = to_u64(val, w);
            else if (key == "master_seed") cfg.ensemble.master_seed = to_u64(val, w);
            else if (key == "batch_count") cfg.ensemble.batch_count = to_u64(val, w);
            else if (key == "zero_noise") cfg.ensemble.zero_noise = to_bool(val, w);
            else if (key == "initial_inversion") cfg.ensemble.initial_inversion = to_double(val, w);
            else handled = false;
        } else if (section == "model") {
            if (key == "gamma_p_over_gamma0") cfg.model.gamma_p_over_gamma0 = to_double(val, w);
            else if (key == "lorentz_coeff") cfg.model.lorentz_coeff = to_double(val, w);
            else if (key == "include_secondary_lines") cfg.model.include_secondary_lines = to_bool(val, w);
            else if (key == "data_file") cfg.model.data_file = val;
            else if (key == "field_bath_temperature_K") cfg.model.field_bath_temperature_k = to_double(val, w);
            else if (key == "atom_bath_temperature_K") cfg.model.atom_bath_temperature_k = to_double(val, w);
            else handled = false;
        } else if (section == "scan") {
            if (key == "theta_min_rad") cfg.scan.theta_min_rad = to_double(val, w);
            else if (key == "theta_max_rad") cfg.scan.theta_max_rad = to_double(val, w);
            else if (key == "n_theta") cfg.scan.n_theta = to_u64(val, w);
            else if (key == "delta_over_taup") cfg.scan.delta_over_taup = to_list(val, w);
            else if (key == "pressures_K") cfg.scan.pressures_k = to_list(val, w);
            else handled = false;
        } else if (section == "output") {
            if (key == "directory") cfg.output.directory = val;
            else if (key == "write_svg") cfg.output.write_svg = to_bool(val, w);
            else handled = false;
        } else {
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": key '" + key + "' outside any section");
        }
        if (!handled)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "' in [" + section + "]");
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string serialize_config(const RunConfig& c) {
    char buf[64];
    std::ostringstream o;
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    o << "[gas]\n";
    o << "temperature_K = " << num(c.gas.temperature_k) << "\n";
    o << "pressure_Pa = " << num(c.gas.pressure_pa) << "\n";
    o << "atom_number_total = " << num(c.gas.atom_number_total) << "\n";
    o << "isotope_mode = " << c.gas.isotope_mode << "\n";
    o << "[pulse]\n";
    o << "duration_fs = " << num(c.pulse.duration_fs) << "\n";
    o << "amplitude = " << c.pulse.amplitude << "\n";
    o << "detuning_over_taup = " << num(c.pulse.detuning_over_taup) << "\n";
    o << "initial_phase_rad = " << num(c.pulse.initial_phase_rad) << "\n";
    o << "[fiber]\n";
    o << "length_m = " << num(c.fiber.length_m) << "\n";
    o << "core_diameter_m = " << num(c.fiber.core_diameter_m) << "\n";
    o << "kappa_per_m = " << num(c.fiber.kappa_per_m) << "\n";
    o << "group_velocity = " << c.fiber.group_velocity << "\n";
    o << "[grid]\n";
    o << "n_z = " << c.grid.n_z << "\n";
    o << "n_t = " << c.grid.n_t << "\n";
    o << "window_over_taup = " << num(c.grid.window_over_taup) << "\n";
    o << "n_freq_bins = " << c.grid.n_freq_bins << "\n";
    o << "span_fwhm = " << num(c.grid.span_fwhm) << "\n";
    o << "n_z_samples = " << c.grid.n_z_samples << "\n";
    o << "[ensemble]\n";
    o << "n_traj = " << c.ensemble.n_traj << "\n";
    o << "master_seed = " << c.ensemble.master_seed << "\n";
    o << "batch_count = " << c.ensemble.batch_count << "\n";
    o << "zero_noise = " << (c.ensemble.zero_noise ? "true" : "false") << "\n";
    o << "initial_inversion = " << num(c.ensemble.initial_inversion) << "\n";
    o << "[model]\n";
    o << "gamma_p_over_gamma0 = " << num(c.model.gamma_p_over_gamma0) << "\n";
    o << "lorentz_coeff = " << num(c.model.lorentz_coeff) << "\n";
    o << "include_secondary_lines = "
      << (c.model.include_secondary_lines ? "true" : "false") << "\n";
    if (!c.model.data_file.empty()) o << "data_file = " << c.model.data_file << "\n";
    o << "field_bath_temperature_K = " << num(c.model.field_bath_temperature_k) << "\n";
    o << "atom_bath_temperature_K = " << num(c.model.atom_bath_temperature_k) << "\n";
    o << "[scan]\n";
    o << "theta_min_rad = " << num(c.scan.theta_min_rad) << "\n";
    o << "theta_max_rad = " << num(c.scan.theta_max_rad) << "\n";
    o << "n_theta = " << c.scan.n_theta << "\n";
    o << "delta_over_taup = " << fmt_list(c.scan.delta_over_taup) << "\n";
    o << "pressures_K = " << fmt_list(c.scan.pressures_k) << "\n";
    o << "[output]\n";
    o << "directory = " << c.output.directory << "\n";
    o << "write_svg = " << (c.output.write_svg ? "true" : "false") << "\n";
    return o.str();
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> warnings;
    const auto fail = [](const std::string& m) { throw config_error("config: " + m); };

    if (c.gas.temperature_k <= 0.0) fail("gas.temperature_K must be > 0");
    if (c.gas.pressure_pa < 0.0) fail("gas.pressure_Pa must be >= 0");
    if (c.gas.atom_number_total < 0.0) fail("gas.atom_number_total must be >= 0");
    if (c.gas.isotope_mode != "202-only" && c.gas.isotope_mode != "all")
        fail("gas.isotope_mode must be '202-only' or 'all'");

    if (c.pulse.duration_fs <= 0.0) fail("pulse.duration_fs must be > 0");
    if (c.pulse.amplitude != "soliton") {
        const double a = to_double(c.pulse.amplitude, "pulse.amplitude");
        if (a <= 0.0) fail("pulse.amplitude must be 'soliton' or a positive number");
    }
    if (c.pulse.detuning_over_taup < 0.0)
        fail("pulse.detuning_over_taup must be >= 0");

    if (c.fiber.length_m <= 0.0) fail("fiber.length_m must be > 0");
    if (c.fiber.core_diameter_m <= 0.0) fail("fiber.core_diameter_m must be > 0");
    if (c.fiber.kappa_per_m < 0.0) fail("fiber.kappa_per_m must be >= 0");
    if (c.fiber.group_velocity != "c") {
        const double v = to_double(c.fiber.group_velocity, "fiber.group_velocity");
        if (v <= 0.0) fail("fiber.group_velocity must be 'c' or a positive number");
    }

    if (c.grid.n_z < 1) fail("grid.n_z must be >= 1");
    if (c.grid.n_t < 64) fail("grid.n_t must be >= 64");
    if (c.grid.window_over_taup < 20.0)
        fail("grid.window_over_taup must be >= 20 (pulse must fit with margin)");
    if (static_cast<double>(c.grid.n_t) < 50.0 * c.grid.window_over_taup)
        fail("grid.n_t too small: need dt <= tau_p/50, i.e. n_t >= 50 * window_over_taup");
    if (c.grid.n_freq_bins < 1 || c.grid.n_freq_bins % 2 == 0)
        fail("grid.n_freq_bins must be odd (a center bin must exist)");
    if (c.grid.span_fwhm <= 0.0) fail("grid.span_fwhm must be > 0");
    if (c.grid.n_z_samples < 1) fail("grid.n_z_samples must be >= 1");

    if (c.ensemble.n_traj < 2) fail("ensemble.n_traj must be >= 2");
    if (c.ensemble.batch_count < 2) fail("ensemble.batch_count must be >= 2");
    if (c.ensemble.n_traj < c.ensemble.batch_count)
        fail("ensemble.n_traj must be >= ensemble.batch_count");

    if (c.model.gamma_p_over_gamma0 < 0.0) fail("model.gamma_p_over_gamma0 must be >= 0");
    if (c.model.lorentz_coeff < 0.0) fail("model.lorentz_coeff must be >= 0");

    if (!(c.scan.theta_max_rad > c.scan.theta_min_rad)) fail("scan: theta_max must exceed theta_min");
    if (c.scan.n_theta < 3) fail("scan.n_theta must be >= 3");
    for (double d : c.scan.delta_over_taup)
        if (d < 0.0) fail("scan.delta_over_taup entries must be >= 0");
    for (double t : c.scan.pressures_k)
        if (t <= 0.0) fail("scan.pressures_K entries must be > 0");

    if (c.output.directory.empty()) fail("output.directory must not be empty");
    return warnings;
}

BuiltModel build_model(const RunConfig& cfg) {
    BuiltModel out;
    out.warnings = validate_config(cfg);

    const double tau_p = cfg.pulse.duration_fs * 1e-15;
    out.tau_p = tau_p;
    const double amp = cfg.pulse.amplitude == "soliton"
                           ? 1.0 / tau_p
                           : to_double(cfg.pulse.amplitude, "pulse.amplitude");
    const double v_g = cfg.fiber.group_velocity == "c"
                           ? c_light
                           : to_double(cfg.fiber.group_velocity, "fiber.group_velocity");

    double pressure = cfg.gas.pressure_pa;
    if (pressure <= 0.0) {
        try {
            pressure = vapor_pressure_hg(cfg.gas.temperature_k);
        } catch (const std::out_of_range& e) {
            throw config_error(std::string("gas.temperature_K: ") + e.what() +
                               " (supply gas.pressure_Pa directly)");
        }
    }
    out.pressure_pa = pressure;

    out.sample = make_gas_sample(cfg.gas.temperature_k, pressure,
                                 cfg.gas.isotope_mode, cfg.model.data_file);
    out.rho_ideal_gas = out.sample.total_density;

    FiberConfig fiber;
    fiber.length = cfg.fiber.length_m;
    fiber.core_diameter = cfg.fiber.core_diameter_m;
    fiber.loss_kappa = cfg.fiber.kappa_per_m;
    fiber.group_velocity = v_g;
    const double a_core = fiber.core_area();

    if (cfg.gas.atom_number_total > 0.0) {
        const double rho_override =
            cfg.gas.atom_number_total / (a_core * fiber.length);
        const double scale = rho_override / out.sample.total_density;
        out.sample.total_density = rho_override;
        for (auto& d : out.sample.per_isotope_density) d *= scale;
        out.warnings.push_back("atom_number_total override active: rho_tot = " +
                               std::to_string(rho_override) + " m^-3 (ideal gas: " +
                               std::to_string(out.rho_ideal_gas) + " m^-3)");
    }
    out.rho_tot = out.sample.total_density;

    SimParams& p = out.params;
    const double window = cfg.grid.window_over_taup * tau_p;
    p.grid = make_grid(fiber.length, cfg.grid.n_z, window, cfg.grid.n_t,
                       cfg.grid.n_z_samples);
    p.pulse.half_amplitude = amp;
    p.pulse.duration = tau_p;
    p.pulse.center = 0.5 * window;
    p.pulse.detuning = cfg.pulse.detuning_over_taup / tau_p;
    p.pulse.initial_phase = cfg.pulse.initial_phase_rad;
    p.kappa = cfg.fiber.kappa_per_m;
    p.initial_inversion = cfg.ensemble.initial_inversion;
    p.zero_noise = cfg.ensemble.zero_noise;
    p.master_seed = cfg.ensemble.master_seed;
    p.omega_divergence = 1e6 * 2.0 * amp;

    const double t_field = cfg.model.field_bath_temperature_k < 0.0
                               ? cfg.gas.temperature_k
                               : cfg.model.field_bath_temperature_k;
    const double t_atom = cfg.model.atom_bath_temperature_k < 0.0
                              ? cfg.gas.temperature_k
                              : cfg.model.atom_bath_temperature_k;
    const double w0 = carrier_omega0();

    // reference: the principal 202 line defines the dipole scale
    double gamma0_ref = 0.0;
    for (const auto& iso : out.sample.isotopes) {
        if (iso.mass_number != 202) continue;
        for (const auto& t : iso.transitions)
            if (t.label == "D3P2") gamma0_ref = t.gamma0;
    }
    if (gamma0_ref <= 0.0)
        throw config_error("data file lacks the 202 D3P2 reference line");

    const double dz = p.grid.dz;
    for (std::size_t ai = 0; ai < out.sample.isotopes.size(); ++ai) {
        const IsotopeSpec& iso = out.sample.isotopes[ai];
        const double rho_a = out.sample.per_isotope_density[ai];
        for (const auto& t : iso.transitions) {
            const bool secondary = t.label == "S1P2";
            if (secondary && !cfg.model.include_secondary_lines) continue;
            if (t.rel_strength <= 0.0) {
                out.warnings.push_back("skipping zero-strength line " + t.label +
                                       " of isotope " + std::to_string(iso.mass_number));
                continue;
            }
            const double lam = 2.0 * pi * c_light / (w0 + t.offset);
            const double w_dip =
                std::sqrt(t.rel_strength * (t.gamma0 / gamma0_ref) *
                          std::pow(lam / kCarrierWavelength, 3.0));
            SystemParams s;
            s.u = w_dip;
            s.label = std::to_string(iso.mass_number) + ":" + t.label;
            s.rates = make_rate_set(
                t.gamma0, cfg.model.gamma_p_over_gamma0 * t.gamma0,
                ThermalConfig{t_field, t_atom, w0 + t.offset}, cfg.fiber.kappa_per_m);
            s.pump_noise = s.rates.w12 > 1e-40 * t.gamma0;
            const double g_eff = t.coupling * t.rel_strength / w_dip;
            s.source_coeff = g_eff * rho_a;

            if (cfg.grid.n_freq_bins == 1) {
                s.detuning = {t.offset};
                s.weight = {1.0};
            } else {
                const double dw_l = 2.0 * s.rates.gamma_perp;
                const double dw_d = doppler_fwhm(cfg.gas.temperature_k,
                                                 iso.atomic_mass, lam);
                const LineshapeParams lp = make_lineshape_params(
                    dw_l, dw_d, t.offset, cfg.model.lorentz_coeff);
                const FrequencyGrid fg = discretize_lineshape(
                    lp, cfg.grid.n_freq_bins, cfg.grid.span_fwhm);
                s.detuning = fg.bin_centers;
                s.weight = fg.weights;
            }
            s.noise_amp.resize(s.weight.size());
            for (std::size_t m = 0; m < s.weight.size(); ++m) {
                const double n_cell = rho_a * a_core * dz * s.weight[m];
                s.noise_amp[m] = n_cell > 0.0 ? 1.0 / std::sqrt(n_cell) : 0.0;
            }
            p.systems.push_back(std::move(s));
        }
    }

    // integrator accuracy bound dt * max(rate, detuning, Rabi) < 0.1; hard for
    // resonant systems, advisory for the far-detuned secondary line (implicit
    // midpoint is A-stable; only a cubic phase error remains there)
    const double dt = p.grid.dt;
    if (dt * 2.0 * amp >= 0.1)
        throw config_error("grid: dt * peak Rabi = " +
                           std::to_string(dt * 2.0 * amp) +
                           " >= 0.1; increase grid.n_t");
    for (const auto& s : p.systems) {
        double dmax = 0.0;
        for (double d : s.detuning) dmax = std::max(dmax, std::fabs(d));
        const double worst = dt * std::max(s.rates.gamma_perp, dmax);
        if (worst >= 0.1) {
            if (s.label.find("S1P2") != std::string::npos)
                out.warnings.push_back(
                    "system " + s.label + ": dt * detuning = " + std::to_string(worst) +
                    " exceeds 0.1 (far-off-resonant line; phase error only)");
            else
                throw config_error("system " + s.label + ": dt * max rate = " +
                                   std::to_string(worst) +
                                   " >= 0.1; increase grid.n_t or shrink the window");
        }
    }

    const double g_principal =
        3.0 * gamma0_ref * kCarrierWavelength * kCarrierWavelength / (4.0 * pi);
    out.g_principal = g_principal;
    p.field_norm = 4.0 * g_principal * (c_light / v_g) / a_core;
    const double nbar_f = t_field > 0.0 ? thermal_occupation(w0, t_field) : 0.0;
    p.field_noise_amp =
        2.0 * std::sqrt(0.25 * p.field_norm * cfg.fiber.kappa_per_m * nbar_f);

    out.theta_grid.resize(cfg.scan.n_theta);
    for (std::size_t i = 0; i < cfg.scan.n_theta; ++i)
        out.theta_grid[i] =
            cfg.scan.theta_min_rad +
            (cfg.scan.theta_max_rad - cfg.scan.theta_min_rad) *
                static_cast<double>(i) / static_cast<double>(cfg.scan.n_theta - 1);

    out.z_positions.reserve(p.grid.sample_iz.size());
    for (std::size_t k = 0; k < p.grid.sample_iz.size(); ++k)
        out.z_positions.push_back(p.grid.sample_z(k));

    return out;
}

} // namespace sitsq
