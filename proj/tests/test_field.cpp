#include <doctest.h>

#include <cmath>
#include <complex>

#include "sitsq/constants.hpp"
#include "sitsq/errors.hpp"
#include "sitsq/field.hpp"

using namespace sitsq;
using doctest::Approx;
namespace cn = sitsq::constants;

namespace {

PulseConfig soliton_pulse(double tau_p = 1.0, double delta = 0.0) {
    PulseConfig p;
    p.duration = tau_p;
    p.half_amplitude = 1.0 / tau_p;
    p.center = 16.0 * tau_p;
    p.detuning = delta;
    return p;
}

} // namespace

TEST_CASE("soliton shape, area, energy") {
    const Grid g = make_grid(1.0, 10, 32.0, 4096, 10);
    const PulseConfig p = soliton_pulse();
    const FieldSlice s = init_soliton(p, g);

    // peak 2A at the center (tau0 falls on a grid point)
    const std::size_t ic = 2048;
    CHECK(std::abs(s.omega[ic]) == Approx(2.0).epsilon(1e-12));
    // area 2 pi, A-independent
    CHECK(pulse_area(s, g) == Approx(2.0 * cn::pi).epsilon(1e-3));
    const PulseConfig p2 = [] {
        PulseConfig q = soliton_pulse();
        q.half_amplitude = 2.0;
        q.duration = 0.5;
        return q;
    }();
    CHECK(pulse_area(init_soliton(p2, g), g) == Approx(2.0 * cn::pi).epsilon(1e-3));
    // energy 8A
    CHECK(pulse_energy(s, g) == Approx(8.0).epsilon(1e-3));
    // omega_dag = conj(omega)
    for (std::size_t i = 0; i < g.n_t; i += 97)
        CHECK(std::abs(s.omega_dag[i] - std::conj(s.omega[i])) == 0.0);
}

TEST_CASE("detuning is a pure phase factor") {
    const Grid g = make_grid(1.0, 10, 32.0, 2048, 10);
    const FieldSlice a = init_soliton(soliton_pulse(), g);
    const FieldSlice b = init_soliton(soliton_pulse(1.0, 3.0), g);
    for (std::size_t i = 0; i < g.n_t; i += 61)
        CHECK(std::abs(b.omega[i]) == Approx(std::abs(a.omega[i])).epsilon(1e-12));
}

TEST_CASE("grid refinement leaves the area unchanged") {
    const Grid g1 = make_grid(1.0, 10, 32.0, 2048, 10);
    const Grid g2 = make_grid(1.0, 10, 32.0, 4096, 10);
    const double a1 = pulse_area(init_soliton(soliton_pulse(), g1), g1);
    const double a2 = pulse_area(init_soliton(soliton_pulse(), g2), g2);
    CHECK(a1 == Approx(a2).epsilon(1e-4));
}

TEST_CASE("truncated pulse is rejected") {
    const Grid g = make_grid(1.0, 10, 20.0, 1024, 10);
    PulseConfig p = soliton_pulse();
    p.center = 10.0;  // sech(10) ~ 9e-5 of the peak at the edges
    CHECK_THROWS_AS((void)init_soliton(p, g), config_error);
}

TEST_CASE("susceptibility limits") {
    const double lam = 365.5e-9, g0 = 1.3e8;
    // on resonance, weak field: purely imaginary i N 3 lam^3 / (4 pi^2)
    const auto chi0 = susceptibility(2.0, lam, g0, 0.0, 0.0);
    CHECK(chi0.real() == 0.0);
    CHECK(chi0.imag() ==
          Approx(2.0 * 3.0 * lam * lam * lam / (4.0 * cn::pi * cn::pi)).epsilon(1e-12));
    CHECK(std::abs(susceptibility(0.0, lam, g0, 1e9, 1e20)) == 0.0);

    // far-detuned asymptote Re chi -> -N 3 lam^3 g0 / (4 pi^2) / (2 delta)
    const double delta = 1e3 * g0;
    const auto chi = susceptibility(1.0, lam, g0, delta, 0.0);
    const double asym = -3.0 * lam * lam * lam * g0 / (4.0 * cn::pi * cn::pi) / (2.0 * delta);
    CHECK(chi.real() == Approx(asym).epsilon(1e-6));
    CHECK(std::fabs(chi.imag() / chi.real()) < 1e-3);

    // sign symmetry
    for (double d : {1e7, 1e8, 5e8}) {
        const auto cp = susceptibility(1.0, lam, g0, d, 1e15);
        const auto cm = susceptibility(1.0, lam, g0, -d, 1e15);
        CHECK(cp.real() == Approx(-cm.real()).epsilon(1e-14));
        CHECK(cp.imag() == Approx(cm.imag()).epsilon(1e-14));
    }
}

TEST_CASE("grid sampling includes input and output faces") {
    const Grid g = make_grid(0.05, 500, 32.0, 2048, 50);
    REQUIRE(!g.sample_iz.empty());
    CHECK(g.sample_iz.front() == 0);
    CHECK(g.sample_iz.back() == 500);
    CHECK(g.dz == Approx(1e-4));
    for (std::size_t i = 1; i < g.sample_iz.size(); ++i)
        CHECK(g.sample_iz[i] > g.sample_iz[i - 1]);
}
