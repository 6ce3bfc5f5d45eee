#include "sitsq/rates.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "sitsq/constants.hpp"

namespace sitsq {

using namespace constants;

double thermal_occupation(double omega, double temperature) {
    if (omega <= 0.0) throw std::domain_error("thermal_occupation: omega <= 0");
    if (temperature < 0.0) throw std::domain_error("thermal_occupation: T < 0");
    if (temperature == 0.0) return 0.0;
    const double x = hbar * omega / (k_boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

std::pair<double, double> pump_decay_rates(double gamma0, double nbar_a) {
    if (gamma0 <= 0.0) throw std::domain_error("pump_decay_rates: gamma0 <= 0");
    if (nbar_a < 0.0) throw std::domain_error("pump_decay_rates: nbar_a < 0");
    return {gamma0 * nbar_a, gamma0 * (1.0 + nbar_a)};
}

std::pair<double, double> damping_rates(double w12, double w21, double gamma_p) {
    if (w12 < 0.0 || w21 < 0.0 || gamma_p < 0.0)
        throw std::domain_error("damping_rates: rates must be >= 0");
    const double gpar = w12 + w21;
    return {gpar, gamma_p + 0.5 * gpar};
}

double steady_state_inversion(double w12, double w21) {
    if (w12 + w21 <= 0.0)
        throw std::domain_error("steady_state_inversion: W12 + W21 must be > 0");
    return (w12 - w21) / (w12 + w21);
}

double power_broadened_width(double dnu_l, double rabi) {
    if (dnu_l < 0.0 || rabi < 0.0)
        throw std::domain_error("power_broadened_width: arguments must be >= 0");
    return std::sqrt(dnu_l * dnu_l + rabi * rabi);
}

RateSet make_rate_set(double gamma0, double gamma_p, const ThermalConfig& thermal,
                      double kappa) {
    RateSet r;
    r.nbar = thermal.field_bath_temperature > 0.0
                 ? thermal_occupation(thermal.carrier, thermal.field_bath_temperature)
                 : 0.0;
    r.nbar_a = thermal.atom_bath_temperature > 0.0
                   ? thermal_occupation(thermal.carrier, thermal.atom_bath_temperature)
                   : 0.0;
    std::tie(r.w12, r.w21) = pump_decay_rates(gamma0, r.nbar_a);
    std::tie(r.gamma_par, r.gamma_perp) = damping_rates(r.w12, r.w21, gamma_p);
    r.gamma_p = gamma_p;
    r.sigma_ss = steady_state_inversion(r.w12, r.w21);
    r.kappa = kappa;
    return r;
}

} // namespace sitsq
