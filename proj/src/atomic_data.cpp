#include "sitsq/atomic_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "sitsq/constants.hpp"
#include "sitsq/errors.hpp"

#ifndef SITSQ_DEFAULT_DATA_FILE
#define SITSQ_DEFAULT_DATA_FILE "share/mercury_transitions.dat"
#endif

namespace sitsq {

using namespace constants;

double carrier_omega0() { return 2.0 * pi * c_light / kCarrierWavelength; }

namespace {

// Table 1 abundances plus nuclear spins. Raw values sum to 1.0001.
struct IsotopeRow {
    int mass;
    double abundance_raw;
    double spin;
};
constexpr IsotopeRow kIsotopes[] = {
    {196, 0.0015, 0.0}, {198, 0.1002, 0.0}, {200, 0.2313, 0.0},
    {202, 0.2980, 0.0}, {204, 0.0685, 0.0}, {199, 0.1684, 0.5},
    {201, 0.1322, 1.5},
};

std::string resolve_data_file(const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (const char* env = std::getenv("SIT_SQUEEZE_DATA")) return env;
    return SITSQ_DEFAULT_DATA_FILE;
}

std::map<int, std::vector<TransitionSpec>> load_transitions(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("transition data file not found: " + path);

    std::map<int, std::vector<TransitionSpec>> table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        int iso;
        std::string label;
        double offset_ghz, gamma0_mhz, strength;
        if (!(ss >> iso)) continue;  // blank / comment-only line
        if (!(ss >> label >> offset_ghz >> gamma0_mhz >> strength))
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": malformed transition record: '" + line + "'");
        std::string trailing;
        if (ss >> trailing)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": trailing fields in transition record: '" + line + "'");
        if (gamma0_mhz <= 0.0)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": gamma0 must be positive in record for isotope " +
                               std::to_string(iso) + " " + label);
        if (strength < 0.0)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": negative rel_strength in record for isotope " +
                               std::to_string(iso) + " " + label);
        const bool known = std::any_of(std::begin(kIsotopes), std::end(kIsotopes),
                                       [&](const IsotopeRow& r) { return r.mass == iso; });
        if (!known)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": unknown isotope " + std::to_string(iso));

        TransitionSpec t;
        t.label = label;
        t.offset = 2.0 * pi * offset_ghz * 1e9;
        t.gamma0 = gamma0_mhz * 1e6;
        t.rel_strength = strength;
        const double lam = 2.0 * pi * c_light / (carrier_omega0() + t.offset);
        t.coupling = 3.0 * t.gamma0 * lam * lam / (4.0 * pi);
        table[iso].push_back(t);
    }
    return table;
}

void validate_transition_set(const IsotopeSpec& iso, const std::string& path) {
    const bool bosonic = iso.nuclear_spin == 0.0;
    int n_main = 0, n_green = 0;
    double main_strength_sum = 0.0;
    for (const auto& t : iso.transitions) {
        if (t.label.rfind("D3P2", 0) == 0) {
            ++n_main;
            main_strength_sum += t.rel_strength;
        } else if (t.label == "S1P2") {
            ++n_green;
        } else {
            throw config_error(path + ": unrecognized transition label '" + t.label +
                               "' for isotope " + std::to_string(iso.mass_number));
        }
    }
    if (bosonic && (n_main != 1 || n_green != 1))
        throw config_error(path + ": isotope " + std::to_string(iso.mass_number) +
                           " must carry exactly one D3P2 and one S1P2 line");
    if (!bosonic && n_main < 1)
        throw config_error(path + ": isotope " + std::to_string(iso.mass_number) +
                           " has no D3P2 hyperfine lines");
    if (std::fabs(main_strength_sum - 1.0) > 1e-3)
        throw config_error(path + ": isotope " + std::to_string(iso.mass_number) +
                           " D3P2 strengths sum to " + std::to_string(main_strength_sum) +
                           ", expected 1");
}

} // namespace

std::vector<IsotopeSpec> mercury_isotope_table(const std::string& data_file) {
    const std::string path = resolve_data_file(data_file);
    auto transitions = load_transitions(path);

    double raw_sum = 0.0;
    for (const auto& r : kIsotopes) raw_sum += r.abundance_raw;

    std::vector<IsotopeSpec> out;
    out.reserve(std::size(kIsotopes));
    for (const auto& r : kIsotopes) {
        IsotopeSpec iso;
        iso.mass_number = r.mass;
        iso.atomic_mass = r.mass * atomic_mass_unit;
        iso.abundance_raw = r.abundance_raw;
        iso.abundance = r.abundance_raw / raw_sum;
        iso.nuclear_spin = r.spin;
        auto it = transitions.find(r.mass);
        if (it == transitions.end())
            throw config_error(path + ": no transitions listed for isotope " +
                               std::to_string(r.mass));
        iso.transitions = it->second;
        validate_transition_set(iso, path);
        out.push_back(std::move(iso));
    }
    return out;
}

double vapor_pressure_hg(double temperature) {
    if (!(temperature >= 250.0 && temperature <= 320.0))
        throw std::out_of_range("vapor_pressure_hg: T = " + std::to_string(temperature) +
                                " K outside validated range [250, 320] K");
    // fit through (273 K, 0.272 Pa) and (293 K, 0.889 Pa)
    constexpr double a = 16.047971016356204;
    constexpr double b = 4736.52931452856;
    return std::exp(a - b / temperature);
}

double number_density(double pressure, double temperature) {
    if (temperature <= 0.0)
        throw std::domain_error("number_density: temperature must be > 0");
    if (pressure < 0.0)
        throw std::domain_error("number_density: pressure must be >= 0");
    return pressure / (k_boltzmann * temperature);
}

std::vector<double> isotope_densities(const GasSample& sample) {
    std::vector<double> out;
    out.reserve(sample.isotopes.size());
    for (const auto& iso : sample.isotopes)
        out.push_back(iso.abundance * sample.total_density);
    return out;
}

GasSample make_gas_sample(double temperature, double pressure,
                          const std::string& isotope_mode,
                          const std::string& data_file) {
    GasSample s;
    s.temperature = temperature;
    s.pressure = pressure;
    s.total_density = number_density(pressure, temperature);

    auto table = mercury_isotope_table(data_file);
    if (isotope_mode == "202-only") {
        auto it = std::find_if(table.begin(), table.end(),
                               [](const IsotopeSpec& i) { return i.mass_number == 202; });
        IsotopeSpec only = *it;
        only.abundance = 1.0;
        only.abundance_raw = 1.0;
        s.isotopes.push_back(std::move(only));
    } else if (isotope_mode == "all") {
        s.isotopes = std::move(table);
    } else {
        throw config_error("unknown isotope_mode '" + isotope_mode +
                           "' (expected '202-only' or 'all')");
    }
    s.per_isotope_density = isotope_densities(s);
    return s;
}

} // namespace sitsq
