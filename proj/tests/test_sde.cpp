#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "sitsq/errors.hpp"
#include "sitsq/measurement.hpp"
#include "sitsq/rng.hpp"
#include "sitsq/sde.hpp"

using namespace sitsq;
using doctest::Approx;

namespace {

RateSet no_damping() {
    RateSet r;
    r.sigma_ss = -1.0;  // irrelevant at gamma_par = 0
    return r;
}

// toy single-line medium in dimensionless units (tau_p = 1, A = 1)
SimParams toy_params(double source_coeff, double gamma_perp, double gamma_par,
                     double gamma_p, double n_cell, std::size_t n_z, double length,
                     std::size_t n_t = 1024, double amp = 1.0) {
    SimParams p;
    p.grid = make_grid(length, n_z, 32.0, n_t, 16);
    p.pulse.half_amplitude = amp;
    p.pulse.duration = 1.0;
    p.pulse.center = 16.0;
    p.zero_noise = true;
    SystemParams s;
    s.u = 1.0;
    s.source_coeff = source_coeff;
    s.rates.gamma_perp = gamma_perp;
    s.rates.gamma_par = gamma_par;
    s.rates.gamma_p = gamma_p;
    s.rates.sigma_ss = -1.0;
    s.detuning = {0.0};
    s.weight = {1.0};
    s.noise_amp = {n_cell > 0.0 ? 1.0 / std::sqrt(n_cell) : 0.0};
    s.label = "toy";
    p.systems.push_back(s);
    p.master_seed = 7;
    p.omega_divergence = 1e6 * 2.0 * amp;
    return p;
}

} // namespace

TEST_CASE("atomic drift: free precession and fixed point") {
    RateSet r = no_damping();
    BlochState s{cxd(0.3, -0.1), cxd(0.3, 0.1), cxd(-0.5, 0.0)};
    const double delta = 2.0;
    auto d = atomic_drift(s, 0.0, 0.0, 1.0, r, delta);
    CHECK(d.drm == cxd(0.0, -delta) * s.rm);
    CHECK(d.drp == cxd(0.0, delta) * s.rp);
    CHECK(std::abs(d.dr3) == 0.0);

    // steady state: omega = 0, R3 = sigma_ss, R- = 0 -> all derivatives vanish
    RateSet rd;
    rd.gamma_par = 1.0;
    rd.gamma_perp = 0.5;
    rd.sigma_ss = -1.0;
    BlochState ss{0.0, 0.0, cxd(-1.0, 0.0)};
    auto d2 = atomic_drift(ss, 0.0, 0.0, 1.0, rd, 0.0);
    CHECK(std::abs(d2.drm) == 0.0);
    CHECK(std::abs(d2.drp) == 0.0);
    CHECK(std::abs(d2.dr3) == 0.0);
}

TEST_CASE("step_atoms: free precession phase accuracy and norm conservation") {
    RateSet r = no_damping();
    const double delta = 1.0, dt = 0.01;
    BlochState s{cxd(0.25, 0.0), cxd(0.25, 0.0), cxd(-0.4, 0.0)};
    BlochState cur = s;
    for (int i = 0; i < 100; ++i)
        cur = step_atoms(cur, 0.0, 0.0, 1.0, r, delta, dt, 0.0, nullptr);
    const double t = 1.0;
    const cxd expect = s.rm * std::exp(cxd(0.0, -delta * t));
    CHECK(std::abs(cur.rm - expect) < 1e-5);
    CHECK(std::abs(cur.rm) == Approx(std::abs(s.rm)).epsilon(1e-10));
}

TEST_CASE("step_atoms: Rabi flopping against the closed form") {
    RateSet r = no_damping();
    const double omega = 1.0;
    const double dt = 2.0 * 3.14159265358979 / 16384.0;
    BlochState cur{0.0, 0.0, cxd(-0.5, 0.0)};
    double worst = 0.0;
    for (int i = 1; i <= 16384; ++i) {
        cur = step_atoms(cur, omega, omega, 1.0, r, 0.0, dt, 0.0, nullptr);
        const double t = i * dt;
        worst = std::max(worst, std::abs(cur.r3 - cxd(-0.5 * std::cos(omega * t), 0.0)));
        worst = std::max(worst, std::abs(cur.rm - cxd(-0.5 * std::sin(omega * t), 0.0)));
    }
    CHECK(worst < 1e-6);  // full cycle, R3 returns to -1/2
    CHECK(cur.r3.real() == Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("step_atoms: exponential relaxation to sigma_ss") {
    RateSet r;
    r.gamma_par = 1.0;
    r.gamma_perp = 0.5;
    r.sigma_ss = -1.0;
    const double dt = 0.01;
    BlochState cur{0.0, 0.0, cxd(-0.5, 0.0)};
    for (int i = 1; i <= 10; ++i) {
        cur = step_atoms(cur, 0.0, 0.0, 1.0, r, 0.0, dt, 0.0, nullptr);
        const double expect = -1.0 + 0.5 * std::exp(-r.gamma_par * i * dt);
        CHECK(std::fabs(cur.r3.real() - expect) < 1e-6);
    }
}

TEST_CASE("step_atoms: second-order convergence") {
    RateSet r = no_damping();
    const double omega = 1.0, t_end = 1.0;
    const auto integrate = [&](int n) {
        BlochState c{0.0, 0.0, cxd(-0.5, 0.0)};
        const double dt = t_end / n;
        for (int i = 0; i < n; ++i)
            c = step_atoms(c, omega, omega, 1.0, r, 0.3, dt, 0.0, nullptr);
        return c;
    };
    const BlochState ref = integrate(16384);
    const double e1 = std::abs(integrate(128).r3 - ref.r3);
    const double e2 = std::abs(integrate(256).r3 - ref.r3);
    CHECK(e1 / e2 > 3.3);
    CHECK(e1 / e2 < 4.7);
}

TEST_CASE("bloch length is conserved by the lossless midpoint step") {
    RateSet r = no_damping();
    const double dt = 0.03125;  // dt * |Omega| ~ 0.06 at the peak
    BlochState cur{0.0, 0.0, cxd(-0.5, 0.0)};
    double prev = 0.25;
    for (int i = 0; i < 2000; ++i) {
        const double tau = (i + 0.5) * dt - 16.0;
        const cxd om = 2.0 / std::cosh(tau);
        cur = step_atoms(cur, om, std::conj(om), 1.0, r, 0.0, dt, 0.0, nullptr);
        const double len = std::abs(cur.r3 * cur.r3 + cur.rp * cur.rm);
        CHECK(std::fabs(len - prev) < 1e-8);  // per-step drift
        prev = len;
    }
    CHECK(prev == Approx(0.25).epsilon(1e-6));
}

TEST_CASE("atomic noise: term-by-term structure") {
    RateSet r;
    r.gamma_par = 2.0;
    r.gamma_perp = 1.0;
    r.sigma_ss = -1.0;
    r.w12 = 0.0;
    r.gamma_p = 0.0;
    BlochState s{0.0, 0.0, cxd(-0.5, 0.0)};
    NoiseDraw d;
    d.xi_j = 1.3;
    d.xi_jd = -0.4;
    d.xi_z = 0.9;
    // W12 = 0, gamma_p = 0, Omega = 0, R- = 0: F^R = 0 and
    // F^z = xi_z sqrt(2 gamma_par (1 - sigma R3))
    auto f = atomic_noise(s, 0.0, 0.0, 1.0, r, 4.0, d);
    CHECK(std::abs(f.fr) == 0.0);
    CHECK(std::abs(f.frd) == 0.0);
    const double expect = 0.5 * 0.9 * std::sqrt(2.0 * 2.0 * (1.0 - (-1.0) * (-0.5)));
    CHECK(f.fz.real() == Approx(expect).epsilon(1e-12));
    CHECK(f.fz.imag() == 0.0);

    // all rates and field zero -> every term vanishes
    RateSet r0;
    auto f0 = atomic_noise(s, 0.0, 0.0, 1.0, r0, 4.0, d);
    CHECK(std::abs(f0.fr) == 0.0);
    CHECK(std::abs(f0.frd) == 0.0);
    CHECK(std::abs(f0.fz) == 0.0);

    // negative product under the square root: principal branch, imaginary noise
    BlochState se{cxd(-0.3, 0.0), cxd(-0.3, 0.0), cxd(-0.2, 0.0)};
    auto fe = atomic_noise(se, cxd(2.0, 0.0), cxd(2.0, 0.0), 1.0, r, 1.0, d);
    CHECK(fe.fr.real() == 0.0);
    CHECK(fe.fr.imag() == Approx(1.3 * std::sqrt(0.6)).epsilon(1e-12));
}

TEST_CASE("atomic noise: monte-carlo mean is zero") {
    RateSet r;
    r.gamma_par = 1.0;
    r.gamma_perp = 3.5;
    r.gamma_p = 3.0;
    r.w12 = 0.5;
    r.w21 = 1.5;
    r.sigma_ss = -0.5;
    BlochState s{cxd(0.2, 0.1), cxd(0.2, -0.1), cxd(-0.3, 0.05)};
    RngStream rng(5, 1);
    const int n = 100000;
    cxd mr = 0.0, mz = 0.0;
    double m2r = 0.0;
    for (int i = 0; i < n; ++i) {
        NoiseDraw d;
        d.xi_j = rng.normal();
        d.xi_jd = rng.normal();
        d.xi_z = rng.normal();
        d.xi_p = cxd(rng.normal(), rng.normal()) * 0.7071067811865476;
        d.xi_o = cxd(rng.normal(), rng.normal()) * 0.7071067811865476;
        auto f = atomic_noise(s, cxd(1.0, 0.5), cxd(1.0, -0.5), 1.0, r, 1.0, d);
        mr += f.fr;
        mz += f.fz;
        m2r += std::norm(f.fr);
    }
    mr /= n;
    mz /= n;
    const double se = std::sqrt(m2r / n / n);
    CHECK(std::abs(mr) < 3.5 * se);
    CHECK(std::abs(mz) < 0.05);
}

TEST_CASE("polarization source") {
    std::vector<cxd> r0 = {cxd(0.0, 0.0)};
    CHECK(std::abs(polarization_source(r0, {1.0}, 3.0)) == 0.0);
    std::vector<cxd> r1 = {cxd(0.2, -0.4)};
    CHECK(polarization_source(r1, {1.0}, 2.0) == cxd(0.4, -0.8));
    // linearity in density: two half-weight systems equal one full one
    std::vector<cxd> rr = {cxd(0.2, -0.4), cxd(0.2, -0.4)};
    const cxd two = polarization_source(rr, {0.3, 0.7}, 2.0);
    CHECK(two.real() == Approx(0.4).epsilon(1e-14));
    CHECK(two.imag() == Approx(-0.8).epsilon(1e-14));
}

TEST_CASE("step_field: Beer attenuation and free propagation") {
    Grid g = make_grid(1.0, 10, 32.0, 256, 2);
    PulseConfig p;
    p.half_amplitude = 1.0;
    p.duration = 1.0;
    p.center = 16.0;
    FieldSlice f = init_soliton(p, g);
    const double a0 = std::abs(f.omega[128]);
    std::vector<cxd> zero(g.n_t, 0.0);

    // kappa = 0, no source: unchanged
    FieldSlice f0 = f;
    step_field(f0, zero, zero, 0.0, 0.01, 0.0, nullptr);
    CHECK(std::abs(f0.omega[128]) == a0);

    // fine steps: |Omega| ~ exp(-kappa z / 2) within 1e-4
    const double kappa = 1.0, dz = 5e-4;
    for (int i = 0; i < 2000; ++i) step_field(f, zero, zero, kappa, dz, 0.0, nullptr);
    CHECK(std::abs(f.omega[128]) ==
          Approx(a0 * std::exp(-0.5 * kappa)).epsilon(1e-4));
}

TEST_CASE("zero-noise propagation: no atoms leaves the pulse untouched") {
    SimParams p = toy_params(0.0, 0.0, 0.0, 0.0, 0.0, 50, 1.0);
    p.systems.clear();
    auto tr = propagate_trajectory(p, 0);
    REQUIRE(!tr.diverged);
    const auto& in = tr.records.front();
    const auto& out = tr.records.back();
    for (std::size_t i = 0; i < in.omega.size(); i += 31)
        CHECK(std::abs(out.omega[i] - in.omega[i]) == 0.0);
}

TEST_CASE("zero-noise propagation keeps omega_dag conjugate") {
    SimParams p = toy_params(0.125, 0.0, 0.0, 0.0, 0.0, 100, 1.0);
    auto tr = propagate_trajectory(p, 0);
    REQUIRE(!tr.diverged);
    const auto& out = tr.records.back();
    for (std::size_t i = 0; i < out.omega.size(); i += 17)
        CHECK(std::abs(out.omega_dag[i] - std::conj(out.omega[i])) < 1e-10);
}

TEST_CASE("self-induced transparency: 2pi soliton survives the medium") {
    // alpha_eff * L ~ 2 in the impulsive sharp-line regime
    SimParams p = toy_params(0.125, 0.0, 0.0, 0.0, 0.0, 200, 1.0);
    auto tr = propagate_trajectory(p, 0);
    REQUIRE(!tr.diverged);
    const Grid& g = p.grid;
    const double area_in = pulse_area(tr.records.front(), g);
    const double area_out = pulse_area(tr.records.back(), g);
    const double e_in = pulse_energy(tr.records.front(), g);
    const double e_out = pulse_energy(tr.records.back(), g);
    CHECK(area_in == Approx(2.0 * 3.14159265358979).epsilon(1e-3));
    CHECK(area_out == Approx(area_in).epsilon(0.01));
    CHECK(e_out >= 0.99 * e_in);
}

TEST_CASE("small-area pulse obeys the area theorem") {
    // gamma_perp = 1 dephases the polarization inside the window;
    // alpha = C / gamma_perp = 3 per unit length
    const double gamma_perp = 1.0, coeff = 3.0, alpha = coeff / gamma_perp;
    SimParams p = toy_params(coeff, gamma_perp, 0.0, gamma_perp, 0.0, 400, 1.0);
    p.pulse.amplitude_scale = 0.1 / (2.0 * 3.14159265358979);  // area 0.1 rad
    auto tr = propagate_trajectory(p, 0);
    REQUIRE(!tr.diverged);
    const double theta0 = std::abs(complex_pulse_area(tr.records.front(), p.grid));
    CHECK(theta0 == Approx(0.1).epsilon(1e-3));
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
        const double z = p.grid.sample_z(k);
        const double theta = std::abs(complex_pulse_area(tr.records[k], p.grid));
        CHECK(theta == Approx(theta0 * std::exp(-0.5 * alpha * z)).epsilon(0.02));
    }
}

TEST_CASE("kernel matches the reference single-cell integrator") {
    // drive a one-bin system with the sech pulse and compare the final source
    // against an independent step_atoms walk through the same field history
    SimParams p = toy_params(0.125, 0.3, 0.2, 0.1, 0.0, 1, 1.0, 512);
    auto tr = propagate_trajectory(p, 0);
    REQUIRE(!tr.diverged);
    const auto& in = tr.records.front();
    const auto& out = tr.records[1];

    RateSet r;
    r.gamma_perp = 0.3;
    r.gamma_par = 0.2;
    r.gamma_p = 0.1;
    r.sigma_ss = -1.0;
    BlochState cur{0.0, 0.0, cxd(-0.5, 0.0)};
    std::vector<cxd> src(p.grid.n_t, 0.0);
    for (std::size_t it = 0; it + 1 < p.grid.n_t; ++it) {
        const cxd om = 0.5 * (in.omega[it] + in.omega[it + 1]);
        cur = step_atoms(cur, om, std::conj(om), 1.0, r, 0.0, p.grid.dt, 0.0, nullptr);
        src[it + 1] = 0.125 * cur.rm;
    }
    for (std::size_t i = 0; i < p.grid.n_t; i += 13) {
        const cxd expect = in.omega[i] + p.grid.dz * src[i];
        CHECK(std::abs(out.omega[i] - expect) < 1e-12);
    }
}

TEST_CASE("ensemble determinism across thread counts and reruns") {
    SimParams p = toy_params(0.5, 0.2, 0.1, 0.3, 50.0, 20, 1.0, 256);
    p.zero_noise = false;
    EnsembleOptions o;
    o.n_traj = 64;
    o.batch_count = 4;
    o.chunks_per_batch = 4;

    o.n_threads = 1;
    auto r1 = run_ensemble(p, o);
    o.n_threads = 2;
    auto r2 = run_ensemble(p, o);
    o.n_threads = 5;
    auto r3 = run_ensemble(p, o);
    REQUIRE(r1.batches.size() == r2.batches.size());
    for (std::size_t b = 0; b < r1.batches.size(); ++b)
        for (std::size_t k = 0; k < r1.batches[b].i1.size(); ++k) {
            CHECK(r1.batches[b].i1[k] == r2.batches[b].i1[k]);
            CHECK(r1.batches[b].i2[k] == r2.batches[b].i2[k]);
            CHECK(r1.batches[b].i1sq[k] == r3.batches[b].i1sq[k]);
            CHECK(r1.batches[b].i2sq[k] == r3.batches[b].i2sq[k]);
            CHECK(r1.batches[b].i1i2[k] == r2.batches[b].i1i2[k]);
        }
}

TEST_CASE("zero-noise ensembles are trajectory-identical") {
    SimParams p = toy_params(0.5, 0.2, 0.1, 0.3, 50.0, 10, 0.5, 256);
    p.zero_noise = true;
    auto a = propagate_trajectory(p, 0);
    auto b = propagate_trajectory(p, 1);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k)
        for (std::size_t i = 0; i < a.records[k].omega.size(); i += 7)
            CHECK(a.records[k].omega[i] == b.records[k].omega[i]);
}

TEST_CASE("noisy ensemble mean tracks the zero-noise trajectory") {
    SimParams p = toy_params(0.25, 0.0, 0.0, 0.0, 400.0, 25, 1.0, 512);
    p.zero_noise = false;
    EnsembleOptions o;
    o.n_traj = 400;
    o.batch_count = 10;
    o.chunks_per_batch = 4;
    auto res = run_ensemble(p, o);
    CHECK(res.n_discarded == 0);

    SimParams pz = p;
    pz.zero_noise = true;
    auto ref = propagate_trajectory(pz, 0);
    auto lo = make_matched_lo(p.pulse, p.grid);

    // compare the LO projection of the mean field at each sample; batch sums
    // are stored relative to the zero-noise reference overlaps
    for (std::size_t k = 0; k < res.n_samples; ++k) {
        cxd sum2 = 0.0, sumsq2 = 0.0;
        std::size_t n = 0;
        for (const auto& b : res.batches) {
            sum2 += b.i2[k];
            sumsq2 += b.i2sq[k];
            n += b.n;
        }
        const cxd mean = sum2 / static_cast<double>(n) + res.ref_i2[k];
        cxd i2_ref = 0.0;
        for (std::size_t i = 0; i < p.grid.n_t; ++i)
            i2_ref += std::conj(lo[i]) * ref.records[k].omega[i];
        i2_ref *= p.grid.dt;
        // batch-mean standard error of I2
        double bsum_re = 0.0, bsq_re = 0.0, bsum_im = 0.0, bsq_im = 0.0;
        for (const auto& b : res.batches) {
            const cxd mb = b.i2[k] / static_cast<double>(b.n);
            bsum_re += mb.real();
            bsq_re += mb.real() * mb.real();
            bsum_im += mb.imag();
            bsq_im += mb.imag() * mb.imag();
        }
        const double nb = static_cast<double>(res.batches.size());
        const double se_re =
            std::sqrt(std::max(0.0, bsq_re / nb - (bsum_re / nb) * (bsum_re / nb)) /
                      (nb - 1));
        const double se_im =
            std::sqrt(std::max(0.0, bsq_im / nb - (bsum_im / nb) * (bsum_im / nb)) /
                      (nb - 1));
        CHECK(std::fabs(mean.real() - i2_ref.real()) <=
              3.5 * se_re + 1e-9 * std::fabs(i2_ref.real()) + 1e-12);
        CHECK(std::fabs(mean.imag() - i2_ref.imag()) <= 3.5 * se_im + 1e-12);
    }
}

TEST_CASE("coupling calibration hits the target absorption") {
    RateSet r;
    r.gamma_perp = 1.0;
    r.gamma_par = 0.0;
    r.sigma_ss = -1.0;
    FrequencyGrid bins;
    bins.bin_centers = {0.0};
    bins.weights = {1.0};
    const double alpha = 3.0, rho = 2.0;
    auto c = coupling_from_absorption(alpha, rho, bins, r);
    // single sharp line: alpha = G rho / gamma_perp
    CHECK(c.g_principal == Approx(alpha * r.gamma_perp / rho).epsilon(0.02));

    // linearity: doubling the density halves the calibrated coupling
    auto c2 = coupling_from_absorption(alpha, 2.0 * rho, bins, r);
    CHECK(c2.g_principal == Approx(0.5 * c.g_principal).epsilon(0.02));
}

TEST_CASE("diverged trajectories are excluded and reported") {
    // absurd noise amplitude (N_cell ~ 1e-8) forces divergence
    SimParams p = toy_params(0.5, 0.2, 0.1, 3.0, 1e-8, 10, 1.0, 256);
    p.zero_noise = false;
    EnsembleOptions o;
    o.n_traj = 8;
    o.batch_count = 2;
    o.chunks_per_batch = 2;
    CHECK_THROWS_AS((void)run_ensemble(p, o), divergence_error);
}
