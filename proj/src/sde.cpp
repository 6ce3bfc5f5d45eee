#include "sitsq/sde.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "sitsq/constants.hpp"
#include "sitsq/errors.hpp"

namespace sitsq {

using namespace constants;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// principal-branch complex sqrt on raw doubles (hot path)
inline void csqrt_d(double re, double im, double& ore, double& oim) {
    const double m = std::sqrt(re * re + im * im);
    double ur = 0.5 * (m + re);
    double vi = 0.5 * (m - re);
    if (ur < 0.0) ur = 0.0;
    if (vi < 0.0) vi = 0.0;
    ore = std::sqrt(ur);
    oim = im < 0.0 ? -std::sqrt(vi) : std::sqrt(vi);
}

} // namespace

// ---------------------------------------------------------------------------
// reference single-cell operations (readable forms; the kernel mirrors them)
// ---------------------------------------------------------------------------

BlochDerivative atomic_drift(const BlochState& s, cxd omega, cxd omega_dag,
                             double u, const RateSet& rates, double delta) {
    BlochDerivative d;
    const cxd om = u * omega;
    const cxd od = u * omega_dag;
    d.drm = -(cxd(rates.gamma_perp, delta)) * s.rm + om * s.r3;
    d.drp = -(cxd(rates.gamma_perp, -delta)) * s.rp + od * s.r3;
    d.dr3 = -rates.gamma_par * (s.r3 - rates.sigma_ss) -
            0.5 * (om * s.rp + od * s.rm);
    return d;
}

AtomicNoise atomic_noise(const BlochState& s, cxd omega, cxd omega_dag, double u,
                         const RateSet& rates, double rho_cell,
                         const NoiseDraw& draw) {
    if (rho_cell <= 0.0) throw std::domain_error("atomic_noise: rho_cell <= 0");
    const double amp = 1.0 / std::sqrt(rho_cell);
    const cxd om = u * omega;
    const cxd od = u * omega_dag;
    const double sqw12 = std::sqrt(rates.w12);
    const cxd p_amp = std::sqrt(cxd(rates.gamma_p) * (s.r3 + 1.0));

    AtomicNoise f;
    f.fr = amp * (draw.xi_j * std::sqrt(om * s.rm) + 2.0 * draw.xi_p * p_amp +
                  2.0 * draw.xi_o * sqw12);
    f.frd = amp * (draw.xi_jd * std::sqrt(od * s.rp) +
                   2.0 * std::conj(draw.xi_p) * p_amp +
                   2.0 * std::conj(draw.xi_o) * sqw12);
    const cxd bracket = 2.0 * rates.gamma_par * (1.0 - rates.sigma_ss * s.r3) +
                        (s.rm * od + s.rp * om) - 2.0 * rates.w12 * s.rp * s.rm;
    f.fz = amp * (draw.xi_z * std::sqrt(bracket) -
                  (draw.xi_o * s.rp + std::conj(draw.xi_o) * s.rm) * sqw12);
    return f;
}

BlochState step_atoms(const BlochState& s, cxd omega_mid, cxd omega_dag_mid,
                      double u, const RateSet& rates, double delta, double dt,
                      double noise_amp, const NoiseDraw* draw) {
    const double h2 = 0.5 * dt;
    // first midpoint estimate, drift only
    BlochDerivative d = atomic_drift(s, omega_mid, omega_dag_mid, u, rates, delta);
    BlochState mid{s.rm + h2 * d.drm, s.rp + h2 * d.drp, s.r3 + h2 * d.dr3};

    cxd nm = 0.0, np = 0.0, nz = 0.0;
    if (draw) {
        // full-step Wiener increments; coefficients at the midpoint estimate
        AtomicNoise f = atomic_noise(mid, omega_mid, omega_dag_mid, u, rates,
                                     1.0, *draw);
        const double scale = noise_amp * std::sqrt(dt);
        nm = scale * f.fr;
        np = scale * f.frd;
        nz = scale * f.fz;
    }
    for (int iter = 0; iter < 3; ++iter) {
        d = atomic_drift(mid, omega_mid, omega_dag_mid, u, rates, delta);
        mid.rm = s.rm + h2 * d.drm + 0.5 * nm;
        mid.rp = s.rp + h2 * d.drp + 0.5 * np;
        mid.r3 = s.r3 + h2 * d.dr3 + 0.5 * nz;
    }
    return {2.0 * mid.rm - s.rm, 2.0 * mid.rp - s.rp, 2.0 * mid.r3 - s.r3};
}

cxd polarization_source(const std::vector<cxd>& r_bins,
                        const std::vector<double>& weights, double source_coeff) {
    if (r_bins.size() != weights.size())
        throw std::invalid_argument("polarization_source: size mismatch");
    cxd sum = 0.0;
    for (std::size_t m = 0; m < r_bins.size(); ++m) sum += weights[m] * r_bins[m];
    return source_coeff * sum;
}

void step_field(FieldSlice& field, const std::vector<cxd>& source_m,
                const std::vector<cxd>& source_p, double kappa, double dz,
                double field_noise_amp, RngStream* rng) {
    const std::size_t n = field.omega.size();
    for (std::size_t i = 0; i < n; ++i) {
        cxd xi = 0.0;
        if (rng && field_noise_amp > 0.0)
            xi = field_noise_amp * cxd(rng->normal() * kInvSqrt2,
                                       rng->normal() * kInvSqrt2);
        field.omega[i] += dz * (-0.5 * kappa * field.omega[i] + source_m[i]) + xi;
        field.omega_dag[i] +=
            dz * (-0.5 * kappa * field.omega_dag[i] + source_p[i]) + std::conj(xi);
    }
}

std::vector<cxd> make_matched_lo(const PulseConfig& pulse, const Grid& grid) {
    FieldSlice in = init_soliton(pulse, grid);
    const double energy = pulse_energy(in, grid);
    std::vector<cxd> lo(grid.n_t);
    const double norm = 1.0 / std::sqrt(energy);
    for (std::size_t i = 0; i < grid.n_t; ++i) lo[i] = in.omega[i] * norm;
    return lo;
}

// ---------------------------------------------------------------------------
// trajectory kernel
// ---------------------------------------------------------------------------

namespace {

struct SliceObserver {
    virtual void on_record(std::size_t sample_index, const FieldSlice& slice) = 0;
    virtual ~SliceObserver() = default;
};

// Per-system constants unpacked for the kernel.
struct SysK {
    double u;
    double coeff;
    double gper, gpar, sss, gp, w12, sqw12;
    bool pump_noise;
    bool has_p_noise;
    std::size_t nbin;
    std::size_t offset;  // cell index of first bin
};

// Advances one trajectory; returns false if it diverged.
bool run_trajectory(const SimParams& p, std::uint64_t index, SliceObserver& obs) {
    const Grid& g = p.grid;
    const std::size_t n_t = g.n_t;
    const double dt = g.dt;
    const double h2 = 0.5 * dt;

    FieldSlice field = init_soliton(p.pulse, g);

    std::vector<SysK> sys;
    std::size_t total_bins = 0;
    for (const auto& s : p.systems) {
        SysK k;
        k.u = s.u;
        k.coeff = s.source_coeff;
        k.gper = s.rates.gamma_perp;
        k.gpar = s.rates.gamma_par;
        k.sss = s.rates.sigma_ss;
        k.gp = s.rates.gamma_p;
        k.w12 = s.rates.w12;
        k.sqw12 = std::sqrt(s.rates.w12);
        k.pump_noise = s.pump_noise;
        k.has_p_noise = s.rates.gamma_p > 0.0;
        k.nbin = s.detuning.size();
        k.offset = total_bins;
        total_bins += k.nbin;
        sys.push_back(k);
    }

    // cell state: [bin][rm_re rm_im rp_re rp_im r3_re r3_im]
    std::vector<double> cells(total_bins * 6);
    // per-bin constants
    std::vector<double> det(total_bins), wgt(total_bins), sdt(total_bins);
    {
        std::size_t c = 0;
        for (const auto& s : p.systems) {
            for (std::size_t m = 0; m < s.detuning.size(); ++m, ++c) {
                det[c] = s.detuning[m];
                wgt[c] = s.weight[m];
                sdt[c] = s.noise_amp[m] * std::sqrt(dt);
            }
        }
    }

    std::vector<cxd> src_m(n_t), src_p(n_t);
    RngStream rng(p.master_seed, index);
    const bool noisy = !p.zero_noise;
    const double r_div2 = p.r_divergence * p.r_divergence;
    const double om_div = p.omega_divergence > 0.0
                              ? p.omega_divergence
                              : 1e6 * 2.0 * p.pulse.half_amplitude;
    const double om_div2 = om_div * om_div;
    // dz * famp * (unit complex normal) gives the Wiener increment of the
    // delta-correlated field noise, std famp_phys * sqrt(dz/dt)
    const double famp = p.field_noise_amp > 0.0
                            ? p.field_noise_amp / std::sqrt(g.dz * dt)
                            : 0.0;

    std::size_t sample_ptr = 0;
    bool diverged = false;

    for (std::size_t iz = 0; iz <= g.n_z && !diverged; ++iz) {
        while (sample_ptr < g.sample_iz.size() && g.sample_iz[sample_ptr] == iz) {
            obs.on_record(sample_ptr, field);
            ++sample_ptr;
        }
        if (iz == g.n_z) break;

        // fresh ground-state atoms for this z cell
        for (std::size_t c = 0; c < total_bins; ++c) {
            double* q = &cells[6 * c];
            q[0] = q[1] = q[2] = q[3] = 0.0;
            q[4] = p.initial_inversion;
            q[5] = 0.0;
        }
        src_m[0] = src_p[0] = cxd(0.0, 0.0);

        for (std::size_t it = 0; it + 1 < n_t; ++it) {
            const cxd om_grid =
                0.5 * (field.omega[it] + field.omega[it + 1]);
            const cxd od_grid =
                0.5 * (field.omega_dag[it] + field.omega_dag[it + 1]);
            cxd acc_m = 0.0, acc_p = 0.0;

            for (const auto& k : sys) {
                const double om_re = k.u * om_grid.real();
                const double om_im = k.u * om_grid.imag();
                const double od_re = k.u * od_grid.real();
                const double od_im = k.u * od_grid.imag();
                double sys_m_re = 0.0, sys_m_im = 0.0;
                double sys_p_re = 0.0, sys_p_im = 0.0;

                for (std::size_t m = 0; m < k.nbin; ++m) {
                    const std::size_t c = k.offset + m;
                    double* q = &cells[6 * c];
                    const double delta = det[c];
                    const double rm0_re = q[0], rm0_im = q[1];
                    const double rp0_re = q[2], rp0_im = q[3];
                    const double r30_re = q[4], r30_im = q[5];

                    // drift at the current point -> first midpoint estimate
                    double am_re = rm0_re, am_im = rm0_im;
                    double ap_re = rp0_re, ap_im = rp0_im;
                    double a3_re = r30_re, a3_im = r30_im;
                    double nm_re = 0.0, nm_im = 0.0, np_re = 0.0, np_im = 0.0;
                    double nz_re = 0.0, nz_im = 0.0;

                    for (int iter = 0; iter < 4; ++iter) {
                        const double dm_re = -k.gper * am_re + delta * am_im +
                                             om_re * a3_re - om_im * a3_im;
                        const double dm_im = -k.gper * am_im - delta * am_re +
                                             om_re * a3_im + om_im * a3_re;
                        const double dp_re = -k.gper * ap_re - delta * ap_im +
                                             od_re * a3_re - od_im * a3_im;
                        const double dp_im = -k.gper * ap_im + delta * ap_re +
                                             od_re * a3_im + od_im * a3_re;
                        const double d3_re =
                            -k.gpar * (a3_re - k.sss) -
                            0.5 * (om_re * ap_re - om_im * ap_im + od_re * am_re -
                                   od_im * am_im);
                        const double d3_im =
                            -k.gpar * a3_im -
                            0.5 * (om_re * ap_im + om_im * ap_re + od_re * am_im +
                                   od_im * am_re);
                        am_re = rm0_re + h2 * dm_re + 0.5 * nm_re;
                        am_im = rm0_im + h2 * dm_im + 0.5 * nm_im;
                        ap_re = rp0_re + h2 * dp_re + 0.5 * np_re;
                        ap_im = rp0_im + h2 * dp_im + 0.5 * np_im;
                        a3_re = r30_re + h2 * d3_re + 0.5 * nz_re;
                        a3_im = r30_im + h2 * d3_im + 0.5 * nz_im;

                        if (iter == 0 && noisy) {
                            // noise coefficients at the first midpoint estimate
                            const double s = sdt[c];
                            const double nJ = rng.normal();
                            const double nJd = rng.normal();
                            const double nZ = rng.normal();
                            double xp_re = 0.0, xp_im = 0.0;
                            if (k.has_p_noise) {
                                xp_re = rng.normal() * kInvSqrt2;
                                xp_im = rng.normal() * kInvSqrt2;
                            }
                            double xo_re = 0.0, xo_im = 0.0;
                            if (k.pump_noise) {
                                xo_re = rng.normal() * kInvSqrt2;
                                xo_im = rng.normal() * kInvSqrt2;
                            }
                            // sqrt(u Omega R-)
                            double tJ_re, tJ_im;
                            csqrt_d(om_re * am_re - om_im * am_im,
                                    om_re * am_im + om_im * am_re, tJ_re, tJ_im);
                            // sqrt(u Omega^dag R+)
                            double tJd_re, tJd_im;
                            csqrt_d(od_re * ap_re - od_im * ap_im,
                                    od_re * ap_im + od_im * ap_re, tJd_re, tJd_im);
                            // sqrt(gamma_p (R3 + 1)) shared by both partners
                            double tP_re = 0.0, tP_im = 0.0;
                            if (k.has_p_noise)
                                csqrt_d(k.gp * (a3_re + 1.0), k.gp * a3_im, tP_re,
                                        tP_im);
                            nm_re = s * (nJ * tJ_re +
                                         2.0 * (xp_re * tP_re - xp_im * tP_im) +
                                         2.0 * xo_re * k.sqw12);
                            nm_im = s * (nJ * tJ_im +
                                         2.0 * (xp_re * tP_im + xp_im * tP_re) +
                                         2.0 * xo_im * k.sqw12);
                            np_re = s * (nJd * tJd_re +
                                         2.0 * (xp_re * tP_re + xp_im * tP_im) +
                                         2.0 * xo_re * k.sqw12);
                            np_im = s * (nJd * tJd_im +
                                         2.0 * (xp_re * tP_im - xp_im * tP_re) -
                                         2.0 * xo_im * k.sqw12);
                            // F^z bracket
                            const double cross_re =
                                am_re * od_re - am_im * od_im + ap_re * om_re -
                                ap_im * om_im;
                            const double cross_im =
                                am_re * od_im + am_im * od_re + ap_re * om_im +
                                ap_im * om_re;
                            const double pp_re = ap_re * am_re - ap_im * am_im;
                            const double pp_im = ap_re * am_im + ap_im * am_re;
                            const double br_re =
                                2.0 * k.gpar * (1.0 - k.sss * a3_re) + cross_re -
                                2.0 * k.w12 * pp_re;
                            const double br_im = -2.0 * k.gpar * k.sss * a3_im +
                                                 cross_im - 2.0 * k.w12 * pp_im;
                            double tz_re, tz_im;
                            csqrt_d(br_re, br_im, tz_re, tz_im);
                            nz_re = s * (nZ * tz_re -
                                         k.sqw12 * (xo_re * ap_re - xo_im * ap_im +
                                                    xo_re * am_re + xo_im * am_im));
                            nz_im = s * (nZ * tz_im -
                                         k.sqw12 * (xo_re * ap_im + xo_im * ap_re +
                                                    xo_re * am_im - xo_im * am_re));
                            am_re += 0.5 * nm_re;
                            am_im += 0.5 * nm_im;
                            ap_re += 0.5 * np_re;
                            ap_im += 0.5 * np_im;
                            a3_re += 0.5 * nz_re;
                            a3_im += 0.5 * nz_im;
                        }
                    }
                    // full step from the midpoint
                    const double rm1_re = 2.0 * am_re - rm0_re;
                    const double rm1_im = 2.0 * am_im - rm0_im;
                    const double rp1_re = 2.0 * ap_re - rp0_re;
                    const double rp1_im = 2.0 * ap_im - rp0_im;
                    const double r31_re = 2.0 * a3_re - r30_re;
                    const double r31_im = 2.0 * a3_im - r30_im;
                    q[0] = rm1_re;
                    q[1] = rm1_im;
                    q[2] = rp1_re;
                    q[3] = rp1_im;
                    q[4] = r31_re;
                    q[5] = r31_im;

                    const double w = wgt[c];
                    sys_m_re += w * rm1_re;
                    sys_m_im += w * rm1_im;
                    sys_p_re += w * rp1_re;
                    sys_p_im += w * rp1_im;

                    if (rm1_re * rm1_re + rm1_im * rm1_im > r_div2 ||
                        rp1_re * rp1_re + rp1_im * rp1_im > r_div2 ||
                        r31_re * r31_re + r31_im * r31_im > r_div2)
                        diverged = true;
                }
                acc_m += k.coeff * cxd(sys_m_re, sys_m_im);
                acc_p += k.coeff * cxd(sys_p_re, sys_p_im);
            }
            src_m[it + 1] = acc_m;
            src_p[it + 1] = acc_p;
        }
        if (diverged) break;

        // z step of the field pair
        double max2 = 0.0;
        for (std::size_t i = 0; i < n_t; ++i) {
            cxd xi = 0.0;
            if (famp > 0.0 && noisy)
                xi = famp * cxd(rng.normal() * kInvSqrt2, rng.normal() * kInvSqrt2);
            field.omega[i] +=
                g.dz * (-0.5 * p.kappa * field.omega[i] + src_m[i]) + g.dz * xi;
            field.omega_dag[i] +=
                g.dz * (-0.5 * p.kappa * field.omega_dag[i] + src_p[i]) +
                g.dz * std::conj(xi);
            const double n2 = std::norm(field.omega[i]);
            if (n2 > max2) max2 = n2;
        }
        if (max2 > om_div2) diverged = true;
    }
    return !diverged;
}

} // namespace

TrajectoryResult propagate_trajectory(const SimParams& params, std::uint64_t index) {
    struct Copier : SliceObserver {
        std::vector<FieldSlice> records;
        void on_record(std::size_t, const FieldSlice& s) override {
            records.push_back(s);
        }
    } copier;
    TrajectoryResult r;
    r.diverged = !run_trajectory(params, index, copier);
    r.records = std::move(copier.records);
    return r;
}

// ---------------------------------------------------------------------------
// parallel ensemble with thread-count-independent reduction
// ---------------------------------------------------------------------------

namespace {

struct ChunkAccum {
    std::vector<cxd> i1, i2, i1sq, i2sq, i1i2;
    std::vector<double> f_sum_re, f_sum_im, f_sum_re2, f_sum_im2;
    std::size_t n = 0;
    std::size_t discarded = 0;

    void init(std::size_t n_samples, std::size_t n_t, bool field_stats) {
        i1.assign(n_samples, 0.0);
        i2.assign(n_samples, 0.0);
        i1sq.assign(n_samples, 0.0);
        i2sq.assign(n_samples, 0.0);
        i1i2.assign(n_samples, 0.0);
        if (field_stats) {
            f_sum_re.assign(n_samples * n_t, 0.0);
            f_sum_im.assign(n_samples * n_t, 0.0);
            f_sum_re2.assign(n_samples * n_t, 0.0);
            f_sum_im2.assign(n_samples * n_t, 0.0);
        }
    }
};

// Buffers one trajectory; committed only if the trajectory completes.
struct TrajBuffer : SliceObserver {
    const std::vector<cxd>* f_lo;
    double dt;
    bool keep_slices;
    std::vector<std::pair<cxd, cxd>> overlaps;  // (I1, I2) per sample
    std::vector<FieldSlice> slices;

    void on_record(std::size_t, const FieldSlice& s) override {
        cxd i1 = 0.0, i2 = 0.0;
        const std::size_t n = s.omega.size();
        for (std::size_t i = 0; i < n; ++i) {
            i1 += (*f_lo)[i] * s.omega_dag[i];
            i2 += std::conj((*f_lo)[i]) * s.omega[i];
        }
        overlaps.emplace_back(i1 * dt, i2 * dt);
        if (keep_slices) slices.push_back(s);
    }
};

} // namespace

EnsembleResult run_ensemble(const SimParams& params, const EnsembleOptions& options) {
    if (options.n_traj < 2)
        throw std::invalid_argument("run_ensemble: n_traj must be >= 2");
    const auto t0 = std::chrono::steady_clock::now();

    const std::size_t n_samples = params.grid.sample_iz.size();
    const std::size_t n_chunks = options.batch_count * options.chunks_per_batch;
    const std::size_t per_chunk = (options.n_traj + n_chunks - 1) / n_chunks;

    std::vector<cxd> f_lo = options.f_lo.empty()
                                ? make_matched_lo(params.pulse, params.grid)
                                : options.f_lo;
    if (f_lo.size() != params.grid.n_t)
        throw std::invalid_argument("run_ensemble: f_lo length != n_t");

    std::vector<ChunkAccum> chunks(n_chunks);
    for (auto& c : chunks) c.init(n_samples, params.grid.n_t, options.field_stats);

    // zero-noise reference overlaps; subtracting them from every trajectory's
    // overlaps removes the large common offset before the moment sums
    std::vector<cxd> ref1(n_samples, 0.0), ref2(n_samples, 0.0);
    {
        SimParams base = params;
        base.zero_noise = true;
        TrajBuffer ref;
        ref.f_lo = &f_lo;
        ref.dt = params.grid.dt;
        ref.keep_slices = false;
        if (run_trajectory(base, 0, ref))
            for (std::size_t k = 0; k < n_samples; ++k) {
                ref1[k] = ref.overlaps[k].first;
                ref2[k] = ref.overlaps[k].second;
            }
    }

    unsigned n_threads = options.n_threads;
    if (n_threads == 0) {
        n_threads = std::thread::hardware_concurrency();
        if (n_threads == 0) n_threads = 1;
    }

    std::atomic<std::size_t> next_chunk{0};
    auto worker = [&] {
        TrajBuffer buf;
        buf.f_lo = &f_lo;
        buf.dt = params.grid.dt;
        buf.keep_slices = options.field_stats;
        for (;;) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            ChunkAccum& acc = chunks[c];
            const std::size_t begin = c * per_chunk;
            const std::size_t end = std::min(begin + per_chunk, options.n_traj);
            for (std::size_t traj = begin; traj < end; ++traj) {
                buf.overlaps.clear();
                buf.slices.clear();
                const bool ok = run_trajectory(params, traj, buf);
                if (!ok) {
                    ++acc.discarded;
                    continue;
                }
                for (std::size_t k = 0; k < n_samples; ++k) {
                    const cxd i1 = buf.overlaps[k].first - ref1[k];
                    const cxd i2 = buf.overlaps[k].second - ref2[k];
                    acc.i1[k] += i1;
                    acc.i2[k] += i2;
                    acc.i1sq[k] += i1 * i1;
                    acc.i2sq[k] += i2 * i2;
                    acc.i1i2[k] += i1 * i2;
                }
                if (options.field_stats) {
                    const std::size_t n_t = params.grid.n_t;
                    for (std::size_t k = 0; k < n_samples; ++k) {
                        const auto& om = buf.slices[k].omega;
                        double* sr = &acc.f_sum_re[k * n_t];
                        double* si = &acc.f_sum_im[k * n_t];
                        double* sr2 = &acc.f_sum_re2[k * n_t];
                        double* si2 = &acc.f_sum_im2[k * n_t];
                        for (std::size_t i = 0; i < n_t; ++i) {
                            const double re = om[i].real(), im = om[i].imag();
                            sr[i] += re;
                            si[i] += im;
                            sr2[i] += re * re;
                            si2[i] += im * im;
                        }
                    }
                }
                ++acc.n;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    EnsembleResult res;
    res.n_traj = options.n_traj;
    res.n_samples = n_samples;
    res.ref_i1 = ref1;
    res.ref_i2 = ref2;
    res.batches.resize(options.batch_count);
    for (std::size_t b = 0; b < options.batch_count; ++b) {
        BatchMoments& bm = res.batches[b];
        bm.i1.assign(n_samples, 0.0);
        bm.i2.assign(n_samples, 0.0);
        bm.i1sq.assign(n_samples, 0.0);
        bm.i2sq.assign(n_samples, 0.0);
        bm.i1i2.assign(n_samples, 0.0);
        for (std::size_t j = 0; j < options.chunks_per_batch; ++j) {
            const ChunkAccum& c = chunks[b * options.chunks_per_batch + j];
            bm.n += c.n;
            for (std::size_t k = 0; k < n_samples; ++k) {
                bm.i1[k] += c.i1[k];
                bm.i2[k] += c.i2[k];
                bm.i1sq[k] += c.i1sq[k];
                bm.i2sq[k] += c.i2sq[k];
                bm.i1i2[k] += c.i1i2[k];
            }
        }
    }
    if (options.field_stats) {
        FieldStats fs;
        fs.n_t = params.grid.n_t;
        fs.sum_re.assign(n_samples * params.grid.n_t, 0.0);
        fs.sum_im.assign(n_samples * params.grid.n_t, 0.0);
        fs.sum_re2.assign(n_samples * params.grid.n_t, 0.0);
        fs.sum_im2.assign(n_samples * params.grid.n_t, 0.0);
        for (const auto& c : chunks) {
            fs.n += c.n;
            for (std::size_t i = 0; i < fs.sum_re.size(); ++i) {
                fs.sum_re[i] += c.f_sum_re[i];
                fs.sum_im[i] += c.f_sum_im[i];
                fs.sum_re2[i] += c.f_sum_re2[i];
                fs.sum_im2[i] += c.f_sum_im2[i];
            }
        }
        res.field_stats = std::move(fs);
    }
    for (const auto& c : chunks) {
        res.n_used += c.n;
        res.n_discarded += c.discarded;
    }
    const double frac =
        res.n_traj > 0 ? static_cast<double>(res.n_discarded) / res.n_traj : 0.0;
    if (frac > 0.5)
        throw divergence_error("run_ensemble: " + std::to_string(res.n_discarded) +
                               " of " + std::to_string(res.n_traj) +
                               " trajectories diverged (> 50%)");
    if (frac > 0.05)
        res.warnings.push_back("discard fraction " + std::to_string(frac) +
                               " exceeds 5%");
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---------------------------------------------------------------------------
// coupling calibration
// ---------------------------------------------------------------------------

namespace {

// measured small-signal intensity absorption coefficient for coupling g
double probe_alpha(double g, double rho, const FrequencyGrid& bins,
                   const RateSet& rates, double alpha_target) {
    // narrowband weak probe: duration much longer than every atomic time
    double width = rates.gamma_perp;
    for (double w : bins.bin_centers) width = std::max(width, std::fabs(w));
    if (width <= 0.0)
        throw std::runtime_error("coupling_from_absorption: system has no "
                                 "linewidth; cannot form a cw probe");
    const double tau_probe = 60.0 / width;

    SimParams p;
    const double l_test = 0.7 / alpha_target;
    p.grid = make_grid(l_test, 48, 32.0 * tau_probe, 3072, 1);
    p.pulse.duration = tau_probe;
    p.pulse.half_amplitude = 1.0 / tau_probe;
    p.pulse.amplitude_scale = 1e-3;  // area 2e-3 pi, deep linear regime
    p.pulse.center = 16.0 * tau_probe;
    p.zero_noise = true;
    SystemParams s;
    s.u = 1.0;
    s.source_coeff = g * rho;
    s.rates = rates;
    s.detuning = bins.bin_centers;
    s.weight = bins.weights;
    s.noise_amp.assign(bins.bin_centers.size(), 0.0);
    s.label = "probe";
    p.systems.push_back(s);

    auto traj = propagate_trajectory(p, 0);
    const double e_in = pulse_energy(traj.records.front(), p.grid);
    const double e_out = pulse_energy(traj.records.back(), p.grid);
    if (e_out <= 0.0 || e_in <= 0.0)
        throw std::runtime_error("coupling_from_absorption: probe run lost the pulse");
    return std::log(e_in / e_out) / l_test;
}

} // namespace

CouplingSpec coupling_from_absorption(double alpha_target, double rho,
                                      const FrequencyGrid& bins,
                                      const RateSet& rates) {
    if (alpha_target <= 0.0)
        throw std::invalid_argument("coupling_from_absorption: alpha_target <= 0");
    if (rho <= 0.0)
        throw std::invalid_argument("coupling_from_absorption: rho <= 0");

    // analytic linear-response guess centers the bracket
    double resp = 0.0;
    for (std::size_t m = 0; m < bins.bin_centers.size(); ++m) {
        const double d = bins.bin_centers[m];
        resp += bins.weights[m] * rates.gamma_perp /
                (rates.gamma_perp * rates.gamma_perp + d * d);
    }
    if (resp <= 0.0)
        throw std::runtime_error("coupling_from_absorption: zero linear response");
    const double g_guess = alpha_target / (rho * resp);

    double lo = g_guess / 8.0, hi = g_guess * 8.0;
    double a_lo = probe_alpha(lo, rho, bins, rates, alpha_target);
    double a_hi = probe_alpha(hi, rho, bins, rates, alpha_target);
    if (!(a_lo < alpha_target && a_hi > alpha_target))
        throw std::runtime_error(
            "coupling_from_absorption: bracket failure, alpha(" + std::to_string(lo) +
            ") = " + std::to_string(a_lo) + ", alpha(" + std::to_string(hi) +
            ") = " + std::to_string(a_hi) + ", target " + std::to_string(alpha_target));

    double g_mid = g_guess, a_mid = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 48; ++iter) {
        g_mid = 0.5 * (lo + hi);
        a_mid = probe_alpha(g_mid, rho, bins, rates, alpha_target);
        if (std::fabs(a_mid - alpha_target) <= 0.005 * alpha_target) {
            converged = true;
            break;
        }
        (a_mid < alpha_target ? lo : hi) = g_mid;
    }
    if (!converged)
        throw std::runtime_error(
            "coupling_from_absorption: bisection did not converge; last alpha = " +
            std::to_string(a_mid) + " vs target " + std::to_string(alpha_target));

    CouplingSpec c;
    c.g = {g_mid};
    c.g_principal = g_mid;
    c.field_norm = 0.0;  // filled in by the caller with core area / v_g
    return c;
}

} // namespace sitsq
