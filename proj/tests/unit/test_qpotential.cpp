#include <doctest.h>

#include "oracles.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/guidance.hpp"
#include "pilotwave/qpotential.hpp"
#include "pilotwave/stepper.hpp"

using namespace pilotwave;

TEST_CASE("quantum potential of the oscillator ground state") {
    const Grid1D g(512, -10.0, 10.0);
    const double omega = 1.3, mass = 0.8;
    const auto psi = ho_ground_state(g, omega, mass);
    const auto v = Potential::harmonic(g, mass, omega);
    const auto q = quantum_potential(psi);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.x(i)) <= 3.0) CHECK(std::abs(q[i] + v.values[i] - 0.5 * omega) < 1e-7);
}

TEST_CASE("quantum potential of a spreading gaussian") {
    const Grid1D g(1024, -20.0, 20.0);
    const oracle::FreeGaussian ref{0.0, 1.0, 0.5};
    const auto tl = evolve_timeline(init_gaussian(g, 0.0, 1.0, 0.5), Potential::zero(g), 0.01, 100, 100);
    const auto q = quantum_potential(tl.back());
    const double w = ref.width(1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = g.x(i) - ref.centre(1.0);
        if (std::abs(u) > 3.0 * w) continue;
        const double expect = 1.0 / (4.0 * w * w) - u * u / (8.0 * w * w * w * w);
        CHECK(std::abs(q[i] - expect) < 1e-6);
    }
}

TEST_CASE("polar phase is unwrapped and reproduces the velocity") {
    const Grid1D g(512, -15.0, 15.0);
    const auto tl = evolve_timeline(init_gaussian(g, 0.0, 1.0, 3.0), Potential::zero(g), 0.01, 50, 50);
    const auto polar = polar_decompose(tl.back());
    const auto vp = phase_gradient_velocity(polar, 1.0);
    const auto vj = velocity_field(tl.back());
    const auto rho = density(tl.back());
    const double peak = *std::max_element(rho.begin(), rho.end());
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        if (rho[i] < 1e-6 * peak) continue;
        CHECK(std::abs(polar.S[i + 1] - polar.S[i]) < 1.0);  // no 2 pi jumps
        CHECK(std::abs(vp[i] - vj.v[i]) < 1e-3);
        CHECK(std::abs(polar.R[i] - std::sqrt(rho[i])) < 1e-14);
    }
}

TEST_CASE("Hamilton-Jacobi residual vanishes for an exact solution") {
    const Grid1D g(512, -10.0, 10.0);
    const auto psi0 = ho_ground_state(g, 1.0);
    const auto v = Potential::harmonic(g, 1.0, 1.0);
    const auto tl = evolve_timeline(psi0, v, 1e-3, 200, 100);
    const auto r = hj_residual(tl, 0.1, v);
    CHECK(r.max_abs < 1e-5);
    CHECK_THROWS_AS(hj_residual(tl, std::size_t{0}, v), PreconditionError);
}

TEST_CASE("Hamilton-Jacobi residual for a moving oscillator coherent state") {
    const Grid1D g(1024, -12.0, 12.0);
    const oracle::HoCoherent ref{1.0, 1.0, 1.0, 2.0, 0.5};
    GridWavefunction psi{g, std::vector<cplx>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = ref.psi(g.x(i), 0.0);
    const auto v = Potential::harmonic(g, 1.0, 1.0);
    const auto tl = evolve_timeline(psi, v, 5e-4, 2000, 1000);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(tl[1].amplitudes[i] - ref.psi(g.x(i), 0.5)));
    CHECK(err < 1e-6);
    const auto window = evolve_timeline(tl[1], v, 5e-4, 2, 1);
    CHECK(hj_residual(window, std::size_t{1}, v).max_abs < 1e-4);
}

TEST_CASE("polar fields of plane waves and real states") {
    const Grid1D g(256, 0.0, 20.0);
    const double k = 2.0 * oracle::pi * 3.0 / 20.0;
    const auto pw = plane_wave(g, k, cplx(0.2, 0.0));
    const auto polar = polar_decompose(pw);
    // Least-squares slope of S(x).
    double sx = 0.0, ss = 0.0, sxx = 0.0, sxs = 0.0;
    const double n = static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        sx += g.x(i);
        ss += polar.S[i];
        sxx += g.x(i) * g.x(i);
        sxs += g.x(i) * polar.S[i];
    }
    CHECK((n * sxs - sx * ss) / (n * sxx - sx * sx) == doctest::Approx(k).epsilon(1e-8));
    for (double q : quantum_potential(pw)) CHECK(std::abs(q) < 1e-8);

    const Grid1D r(256, -10.0, 10.0);
    const auto real = polar_decompose(ho_ground_state(r, 1.0));
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!real.node_mask[i] && !real.node_mask[i + 1]) CHECK(real.S[i + 1] == real.S[i]);

    const auto packet = init_gaussian(r, 0.5, 1.0, 1.7);
    const auto pp = polar_decompose(packet);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!pp.node_mask[i]) CHECK(std::abs(pp.R[i] * std::polar(1.0, pp.S[i]) - packet.amplitudes[i]) < 1e-10);
}

TEST_CASE("Hamilton-Jacobi residual of a free plane wave") {
    const Grid1D g(256, 0.0, 20.0);
    const double k = 2.0 * oracle::pi * 4.0 / 20.0;
    const auto pw = plane_wave(g, k, cplx(1.0 / std::sqrt(20.0), 0.0));
    const auto tl = evolve_timeline(pw, Potential::zero(g), 1e-3, 2, 1);
    CHECK(hj_residual(tl, std::size_t{1}, Potential::zero(g)).max_abs < 1e-6);
}

TEST_CASE("Hamilton-Jacobi residual converges under joint refinement") {
    const oracle::HoCoherent ref{1.0, 1.0, 1.0, 1.5, 0.5};
    auto residual = [&](std::size_t n, double dt) {
        const Grid1D g(n, -12.0, 12.0);
        GridWavefunction psi{g, std::vector<cplx>(g.size())};
        for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = ref.psi(g.x(i), 0.0);
        const auto v = Potential::harmonic(g, 1.0, 1.0);
        const auto steps = static_cast<std::size_t>(std::llround(0.4 / dt));
        const auto tl = evolve_timeline(psi, v, dt, steps + 1, 1);
        return hj_residual(tl, steps, v).max_abs;
    };
    const double a = residual(128, 0.04), b = residual(256, 0.02), c = residual(512, 0.01);
    CHECK(std::log2(a / b) >= 1.5);
    CHECK(std::log2(b / c) >= 1.5);
}
