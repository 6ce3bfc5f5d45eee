#include "sitsq/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sitsq/constants.hpp"
#include "sitsq/errors.hpp"

namespace sitsq {

using namespace constants;

double FiberConfig::core_area() const {
    return pi * 0.25 * core_diameter * core_diameter;
}

Grid make_grid(double length, std::size_t n_z, double window, std::size_t n_t,
               std::size_t n_samples) {
    if (length <= 0.0 || n_z == 0 || window <= 0.0 || n_t < 2)
        throw config_error("make_grid: invalid grid parameters");
    Grid g;
    g.n_z = n_z;
    g.dz = length / static_cast<double>(n_z);
    g.n_t = n_t;
    g.window = window;
    g.dt = window / static_cast<double>(n_t);
    if (n_samples > n_z) n_samples = n_z;
    g.sample_iz.push_back(0);  // input record
    for (std::size_t k = 1; k <= n_samples; ++k) {
        std::size_t iz = (k * n_z) / n_samples;
        if (iz != g.sample_iz.back()) g.sample_iz.push_back(iz);
    }
    return g;
}

FieldSlice init_soliton(const PulseConfig& pulse, const Grid& grid) {
    if (pulse.half_amplitude <= 0.0)
        throw config_error("init_soliton: pulse amplitude must be > 0");
    if (pulse.center <= 0.0 || pulse.center >= grid.window)
        throw config_error("init_soliton: pulse center outside the time window");

    const double a = pulse.half_amplitude;
    const double scale = pulse.amplitude_scale;
    FieldSlice s;
    s.omega.resize(grid.n_t);
    s.omega_dag.resize(grid.n_t);
    for (std::size_t i = 0; i < grid.n_t; ++i) {
        const double tau = static_cast<double>(i) * grid.dt;
        const double env = scale * 2.0 * a / std::cosh(a * (tau - pulse.center));
        const double ph = pulse.detuning * tau + pulse.initial_phase;
        const std::complex<double> v = env * std::complex<double>(std::cos(ph), std::sin(ph));
        s.omega[i] = v;
        s.omega_dag[i] = std::conj(v);
    }
    const double edge = std::max(std::abs(s.omega.front()), std::abs(s.omega.back()));
    const double peak = scale * 2.0 * a;
    if (edge > 1e-6 * peak)
        throw config_error("init_soliton: pulse truncated by the window (|Omega| at the "
                           "edge is " + std::to_string(edge / peak) +
                           " of the peak; need < 1e-6)");
    return s;
}

std::complex<double> susceptibility(double n_j, double lambda0, double gamma0,
                                    double detuning, double rabi_sq) {
    if (n_j < 0.0) throw std::domain_error("susceptibility: N_j < 0");
    const double denom = gamma0 * gamma0 + 4.0 * detuning * detuning + 2.0 * rabi_sq;
    const double pref = n_j * 3.0 * lambda0 * lambda0 * lambda0 * gamma0 / (4.0 * pi * pi);
    return pref * std::complex<double>(-2.0 * detuning, gamma0) / denom;
}

double pulse_area(const FieldSlice& slice, const Grid& grid) {
    double sum = 0.0;
    for (const auto& v : slice.omega) sum += std::abs(v);
    return sum * grid.dt;
}

std::complex<double> complex_pulse_area(const FieldSlice& slice, const Grid& grid) {
    std::complex<double> sum = 0.0;
    for (const auto& v : slice.omega) sum += v;
    return sum * grid.dt;
}

double pulse_energy(const FieldSlice& slice, const Grid& grid) {
    double sum = 0.0;
    for (const auto& v : slice.omega) sum += std::norm(v);
    return sum * grid.dt;
}

} // namespace sitsq
