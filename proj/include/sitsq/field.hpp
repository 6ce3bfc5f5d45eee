#ifndef SITSQ_FIELD_HPP
#define SITSQ_FIELD_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sitsq {

struct PulseConfig {
    double half_amplitude = 0.0;  // A; peak Rabi frequency is 2A, rad/s
    double duration = 0.0;        // tau_p, s; canonical soliton has A = 1/tau_p
    double center = 0.0;          // tau_0, s
    double detuning = 0.0;        // rad/s
    double initial_phase = 0.0;   // rad
    // envelope multiplier: the sech width stays 1/A, the area becomes
    // amplitude_scale * 2 pi. 1 is the canonical soliton.
    double amplitude_scale = 1.0;
};

struct FiberConfig {
    double length = 0.0;          // m
    double core_diameter = 0.0;   // m
    double mode_profile = 1.0;    // u(r_perp), uniform over the core
    double loss_kappa = 0.0;      // 1/m
    double group_velocity = 0.0;  // m/s; 0 means "use c"
    double core_area() const;
};

// Discretization of the retarded-frame propagation window.
struct Grid {
    std::size_t n_z = 0;
    double dz = 0.0;       // m
    std::size_t n_t = 0;
    double dt = 0.0;       // s (retarded-time step)
    double window = 0.0;   // s
    std::vector<std::size_t> sample_iz;  // z-step indices where records are kept
    double sample_z(std::size_t k) const { return static_cast<double>(sample_iz[k]) * dz; }
};

Grid make_grid(double length, std::size_t n_z, double window, std::size_t n_t,
               std::size_t n_samples);

// One field record: Omega and its independent conjugate partner on the
// tau grid. In zero-noise runs omega_dag == conj(omega) to roundoff.
struct FieldSlice {
    std::vector<std::complex<double>> omega;
    std::vector<std::complex<double>> omega_dag;
};

// Omega(0,tau) = 2A sech[A(tau - tau0)] exp(i [delta tau + phi0]).
// Throws config_error when the pulse does not fit the window.
FieldSlice init_soliton(const PulseConfig& pulse, const Grid& grid);

// Linear susceptibility diagnostic; N_j is the atom count per cell.
std::complex<double> susceptibility(double n_j, double lambda0, double gamma0,
                                    double detuning, double rabi_sq);

// integral |Omega| dtau on the grid.
double pulse_area(const FieldSlice& slice, const Grid& grid);

// signed (complex) area integral Omega dtau; the resonant Fourier component.
std::complex<double> complex_pulse_area(const FieldSlice& slice, const Grid& grid);

// integral |Omega|^2 dtau
double pulse_energy(const FieldSlice& slice, const Grid& grid);

} // namespace sitsq

#endif
