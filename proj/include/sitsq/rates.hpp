#ifndef SITSQ_RATES_HPP
#define SITSQ_RATES_HPP

#include <utility>

namespace sitsq {

struct ThermalConfig {
    double field_bath_temperature = 0.0;  // K
    double atom_bath_temperature = 0.0;   // K
    double carrier = 0.0;                 // rad/s
};

// All rates for one transition, closed over the bath temperatures.
struct RateSet {
    double w12 = 0.0;       // incoherent pump rate, rad/s
    double w21 = 0.0;       // decay rate, rad/s
    double gamma_par = 0.0; // longitudinal (population) damping
    double gamma_perp = 0.0;// transverse (coherence) damping
    double gamma_p = 0.0;   // pure dephasing
    double sigma_ss = 0.0;  // steady-state inversion
    double nbar = 0.0;      // field reservoir occupation
    double nbar_a = 0.0;    // atomic reservoir occupation
    double kappa = 0.0;     // fiber linear loss, 1/m
};

// Bose occupation 1/(exp(hbar w / kB T) - 1); 0 at T = 0.
double thermal_occupation(double omega, double temperature);

// W21 = gamma0 (1 + nbar_a), W12 = gamma0 nbar_a.
std::pair<double, double> pump_decay_rates(double gamma0, double nbar_a);

// gamma_par = W12 + W21; gamma_perp = gamma_p + gamma_par / 2.
std::pair<double, double> damping_rates(double w12, double w21, double gamma_p);

// (W12 - W21) / (W12 + W21); throws domain_error when both are zero.
double steady_state_inversion(double w12, double w21);

// sqrt(dnu_L^2 + Omega^2)
double power_broadened_width(double dnu_l, double rabi);

// Assemble the full RateSet for one transition. gamma_p is typically
// 3 * gamma0 but overridable.
RateSet make_rate_set(double gamma0, double gamma_p, const ThermalConfig& thermal,
                      double kappa = 0.0);

} // namespace sitsq

#endif
