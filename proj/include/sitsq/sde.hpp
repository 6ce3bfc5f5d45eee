#ifndef SITSQ_SDE_HPP
#define SITSQ_SDE_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sitsq/field.hpp"
#include "sitsq/lineshape.hpp"
#include "sitsq/rates.hpp"
#include "sitsq/rng.hpp"

namespace sitsq {

using cxd = std::complex<double>;

// ---------------------------------------------------------------------------
// single-cell Bloch variables and the building-block operations
// ---------------------------------------------------------------------------

struct BlochState {
    cxd rm;  // R^-
    cxd rp;  // R^+ (independent phase-space partner, not conj(rm) in general)
    cxd r3;  // inversion
};

struct BlochDerivative {
    cxd drm, drp, dr3;
};

// Unit-variance Gaussian draws for one cell and step. xi_j, xi_jd and xi_z
// are real; xi_p (dephasing) and xi_o (incoherent pump) are complex with
// <xi xi*> = 1.
struct NoiseDraw {
    double xi_j = 0.0, xi_jd = 0.0, xi_z = 0.0;
    cxd xi_p = 0.0, xi_o = 0.0;
};

// Deterministic drift of the atomic equations at detuning delta from the
// carrier; u is the (real) mode/dipole weight.
BlochDerivative atomic_drift(const BlochState& s, cxd omega, cxd omega_dag,
                             double u, const RateSet& rates, double delta);

// Langevin terms with the 1/sqrt(rho_cell) prefactor, rho_cell being the
// atom number the cell's variables average over. Complex square roots take
// the principal branch of the full product.
struct AtomicNoise {
    cxd fr, frd, fz;
};
AtomicNoise atomic_noise(const BlochState& s, cxd omega, cxd omega_dag, double u,
                         const RateSet& rates, double rho_cell,
                         const NoiseDraw& draw);

// One semi-implicit midpoint step of length dt. The drift is iterated to the
// midpoint (4 fixed-point iterations); noise coefficients are evaluated at
// the first midpoint estimate. noise_amp = 1/sqrt(N_cell); pass draw = nullptr
// for a zero-noise step.
BlochState step_atoms(const BlochState& s, cxd omega_mid, cxd omega_dag_mid,
                      double u, const RateSet& rates, double delta, double dt,
                      double noise_amp, const NoiseDraw* draw);

// weighted bin sum approximating coeff * integral f(w) R dw for one system
cxd polarization_source(const std::vector<cxd>& r_bins,
                        const std::vector<double>& weights, double source_coeff);

// Forward-Euler z step of the field pair. field_noise_amp is the per-step
// Langevin increment scale (0 disables); the partner gets the conjugate draw.
void step_field(FieldSlice& field, const std::vector<cxd>& source_m,
                const std::vector<cxd>& source_p, double kappa, double dz,
                double field_noise_amp, RngStream* rng);

// ---------------------------------------------------------------------------
// assembled simulation parameters
// ---------------------------------------------------------------------------

// Couplings for the field equation and the measurement normalization.
struct CouplingSpec {
    std::vector<double> g;      // per transition system, (rad/s) m^2
    double g_principal = 0.0;   // principal-line coupling
    double field_norm = 0.0;    // commutator constant 4 G /(A v_g/c ...), rad^2/s
};

// One (isotope, transition) system: its own rates, frequency bins and
// noise normalization.
struct SystemParams {
    double u = 1.0;              // dipole weight (sqrt of relative line strength)
    double source_coeff = 0.0;   // g * rho_alpha, (rad/s)/m
    RateSet rates;
    std::vector<double> detuning;   // per bin, rad/s relative to carrier
    std::vector<double> weight;     // per bin, sums to 1
    std::vector<double> noise_amp;  // per bin, 1/sqrt(N_cell)
    bool pump_noise = false;
    std::string label;
};

struct SimParams {
    Grid grid;
    PulseConfig pulse;
    std::vector<SystemParams> systems;
    double kappa = 0.0;             // field loss, 1/m
    double field_noise_amp = 0.0;   // 2 sqrt(sum_G kappa nbar)
    double field_norm = 0.0;        // shot-noise constant for the measurement
    double initial_inversion = -0.5;
    bool zero_noise = false;
    double r_divergence = 1e3;      // |R| threshold
    double omega_divergence = 0.0;  // |Omega| threshold (set from 1e6 * 2A)
    std::uint64_t master_seed = 1;
};

// matched local oscillator: the z = 0 pulse, L2-normalized on the grid
std::vector<cxd> make_matched_lo(const PulseConfig& pulse, const Grid& grid);

// ---------------------------------------------------------------------------
// trajectory propagation and the parallel ensemble
// ---------------------------------------------------------------------------

struct TrajectoryResult {
    std::vector<FieldSlice> records;  // at grid.sample_iz
    bool diverged = false;
};

// Full z sweep of one trajectory. Deterministic in (master_seed, index).
TrajectoryResult propagate_trajectory(const SimParams& params, std::uint64_t index);

struct EnsembleOptions {
    std::size_t n_traj = 2;
    unsigned n_threads = 0;          // 0 = hardware concurrency
    std::size_t batch_count = 10;    // batches for error estimation
    std::size_t chunks_per_batch = 8;// fixed so results are thread-count independent
    bool field_stats = false;        // accumulate mean/SE of Omega(tau) per sample
    std::vector<cxd> f_lo;           // homodyne LO; empty = matched to the pulse
};

// Per-batch sums of the homodyne overlap moments at every recorded z.
// I1 = dt sum f_lo Omega_dag, I2 = dt sum conj(f_lo) Omega. The sums are
// accumulated relative to the zero-noise reference overlaps (ref_i1, ref_i2
// in EnsembleResult), which kills the catastrophic cancellation in
// <M^2> - <M>^2; the shift drops out of every variance.
struct BatchMoments {
    std::vector<cxd> i1, i2, i1sq, i2sq, i1i2;  // [n_samples]
    std::size_t n = 0;
};

struct FieldStats {
    std::size_t n = 0;
    std::size_t n_t = 0;
    // flattened [sample][tau] sums for Omega
    std::vector<double> sum_re, sum_im, sum_re2, sum_im2;
};

struct EnsembleResult {
    std::vector<BatchMoments> batches;
    std::vector<cxd> ref_i1, ref_i2;  // zero-noise reference overlaps [n_samples]
    std::optional<FieldStats> field_stats;
    std::size_t n_traj = 0, n_used = 0, n_discarded = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
    std::size_t n_samples = 0;
};

// Runs n_traj independent trajectories on a worker pool. Aggregation order
// is fixed by trajectory index, so identical seeds give identical results
// for any thread count. Throws divergence_error when more than half of the
// trajectories escape.
EnsembleResult run_ensemble(const SimParams& params, const EnsembleOptions& options);

// Calibrates the coupling so the measured small-signal on-resonance intensity
// absorption coefficient equals alpha_target (within 1%), by bisection on a
// linear-response probe run.
CouplingSpec coupling_from_absorption(double alpha_target, double rho,
                                      const FrequencyGrid& bins,
                                      const RateSet& rates);

} // namespace sitsq

#endif
