#ifndef SITSQ_ATOMIC_DATA_HPP
#define SITSQ_ATOMIC_DATA_HPP

#include <string>
#include <vector>

namespace sitsq {

// Carrier: the 365.5 nm line used as the zero of all frequency offsets.
inline constexpr double kCarrierWavelength = 365.5e-9;  // m
double carrier_omega0();                                 // rad/s

struct TransitionSpec {
    std::string label;
    double offset = 0.0;        // line center relative to carrier, rad/s
    double gamma0 = 0.0;        // natural linewidth (decay rate), rad/s
    double rel_strength = 0.0;  // hyperfine branching weight, dimensionless
    double coupling = 0.0;      // field-equation source coefficient, (rad/s) m^2
};

struct IsotopeSpec {
    int mass_number = 0;
    double atomic_mass = 0.0;    // kg
    double abundance = 0.0;      // normalized fraction
    double abundance_raw = 0.0;  // as tabulated, before renormalization
    double nuclear_spin = 0.0;   // 0, 1/2 or 3/2
    std::vector<TransitionSpec> transitions;
};

struct GasSample {
    double temperature = 0.0;    // K
    double pressure = 0.0;       // Pa
    double total_density = 0.0;  // m^-3
    std::vector<IsotopeSpec> isotopes;
    std::vector<double> per_isotope_density;  // m^-3, aligned with isotopes
};

// The seven stable isotopes with transition tables from the bundled data
// file. Pass an explicit path to override; otherwise SIT_SQUEEZE_DATA or the
// compiled-in default is used. Throws config_error on missing/malformed data.
std::vector<IsotopeSpec> mercury_isotope_table(const std::string& data_file = "");

// Two-point Clausius-Clapeyron fit P = exp(a - b/T) anchored at
// (273 K, 0.272 Pa) and (293 K, 0.889 Pa). Valid for 250 K <= T <= 320 K.
double vapor_pressure_hg(double temperature);

// Ideal gas closure rho = P / (kB T).
double number_density(double pressure, double temperature);

// Per-isotope densities A_alpha * rho_tot.
std::vector<double> isotope_densities(const GasSample& sample);

// Assemble a sample at (T, P). Mode "202-only" treats the whole sample as
// 202Hg; "all" splits by natural abundance.
GasSample make_gas_sample(double temperature, double pressure,
                          const std::string& isotope_mode,
                          const std::string& data_file = "");

} // namespace sitsq

#endif
