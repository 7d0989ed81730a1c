#include <doctest.h>

#include "oracles.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/field.hpp"
#include "pilotwave/stepper.hpp"

using namespace pilotwave;

TEST_CASE("lattice modes are orthonormal with the lattice dispersion") {
    const auto m = lattice_modes(12, 0.5, 0.8);
    const Eigen::MatrixXd id = m.basis.transpose() * m.basis;
    CHECK((id - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-13);
    for (std::size_t j = 0; j < 12; ++j) {
        const double s = std::sin(oracle::pi * static_cast<double>(j) / 12.0) / 0.25;
        CHECK(m.omega[j] == doctest::Approx(std::sqrt(0.64 + s * s)));
        CHECK(m.zero_mode[j] == 0);
    }
    // Each basis vector is an eigenvector of the lattice operator -Laplacian + m^2.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(12, 12);
    for (int x = 0; x < 12; ++x) {
        k(x, x) = 2.0 / 0.25 + 0.64;
        k(x, (x + 1) % 12) = k(x, (x + 11) % 12) = -1.0 / 0.25;
    }
    for (std::size_t j = 0; j < 12; ++j) {
        const Eigen::VectorXd b = m.basis.col(static_cast<Eigen::Index>(j));
        CHECK((k * b - m.omega[j] * m.omega[j] * b).norm() < 1e-12);
    }
    const auto massless = lattice_modes(8, 1.0, 0.0);
    CHECK(massless.zero_mode[0] == 1);
}

TEST_CASE("mode evolution is periodic and preserves normalisation") {
    GaussianMode g{1.7, 0.5, {0.6, 0.2}, 0.3, -0.4, 0.1, false};
    const auto back = evolve_mode(g, 2.0 * oracle::pi / 1.7);
    CHECK(std::abs(back.width - g.width) < 1e-12);
    CHECK(back.q_center == doctest::Approx(g.q_center));
    CHECK(back.p_center == doctest::Approx(g.p_center));
    const auto later = evolve_mode(g, 0.37);
    const double norm = oracle::simpson([&](double q) { return std::norm(later.amplitude(q)); }, -10.0, 10.0);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("squeezed mode variance matches the analytic breathing") {
    const double omega = 1.3, mass = 0.7, a = 2.5;
    GaussianMode g{omega, mass, {a, 0.0}, 0.0, 0.0, 0.0, false};
    for (double t : {0.1, 0.5, 1.2, 2.9}) {
        const double c = std::cos(omega * t), s = std::sin(omega * t);
        const double expect = c * c / (2.0 * a * mass * omega) + a * s * s / (2.0 * mass * omega);
        CHECK(evolve_mode(g, t).position_variance() == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("mode evolution solves the Schrodinger equation") {
    // Check i dpsi/dt = -(1/2M) psi'' + M omega^2 q^2 / 2 psi by finite differences.
    GaussianMode g{1.1, 0.8, {1.4, 0.3}, 0.5, 0.7, 0.0, false};
    const double t = 0.6, h = 1e-4, dq = 1e-3;
    for (double q : {-0.8, 0.1, 0.9, 1.6}) {
        const auto m = evolve_mode(g, t);
        const auto dpsi_dt = (evolve_mode(g, t + h).amplitude(q) - evolve_mode(g, t - h).amplitude(q)) / (2.0 * h);
        const auto lap = (m.amplitude(q + dq) - 2.0 * m.amplitude(q) + m.amplitude(q - dq)) / (dq * dq);
        const auto hpsi = -lap / (2.0 * 0.8) + 0.5 * 0.8 * 1.1 * 1.1 * q * q * m.amplitude(q);
        CHECK(std::abs(std::complex<double>(0.0, 1.0) * dpsi_dt - hpsi) < 1e-5);
    }
}

TEST_CASE("ground-state beables are exactly static") {
    const auto modes = lattice_modes(10, 1.0, 0.5);
    const auto st = ground_state(modes);
    for (auto b : sample_field_beables(st, 20, 3)) {
        const auto start = b.phi;
        for (int s = 0; s < 100; ++s) b = field_guidance_step(b, evolve_wavefunctional(st, 0.05 * s), 0.05);
        CHECK(b.phi == start);
    }
}

TEST_CASE("coherent-state beable at the centre follows the classical orbit") {
    const auto modes = lattice_modes(8, 1.0, 1.0);
    std::vector<std::complex<double>> alpha(8, 0.0);
    alpha[2] = {1.5, -0.5};
    alpha[5] = {0.0, 0.8};
    const auto st0 = coherent_state(modes, alpha);
    Eigen::VectorXd qc(8);
    for (int j = 0; j < 8; ++j) qc(j) = st0.factors[j].q_center;
    LatticeField b{8, 1.0, 1.0, to_sites(modes, qc)};
    const double dt = 0.01;
    for (int s = 0; s < 500; ++s) b = field_guidance_step(b, evolve_wavefunctional(st0, s * dt), dt);
    const auto st = evolve_wavefunctional(st0, 5.0);
    const auto q = to_modes(modes, b.phi);
    for (int j = 0; j < 8; ++j) {
        const auto& f0 = st0.factors[j];
        const double w = f0.omega, m = f0.mode_mass;
        const double classical = f0.q_center * std::cos(w * 5.0) + f0.p_center / (m * w) * std::sin(w * 5.0);
        CHECK(std::abs(q(j) - classical) < 1e-8);
        CHECK(std::abs(st.factors[j].q_center - classical) < 1e-12);
    }
}

TEST_CASE("sampled field beables are mode-wise gaussian") {
    const auto modes = lattice_modes(6, 0.7, 1.2);
    std::vector<double> width{1.0, 2.0, 0.5, 1.0, 3.0, 1.0};
    const auto st = squeezed_state(modes, width);
    const auto beables = sample_field_beables(st, 4000, 8);
    for (std::size_t j = 0; j < 6; ++j) {
        std::vector<double> q;
        for (const auto& b : beables) q.push_back(to_modes(modes, b.phi)(static_cast<Eigen::Index>(j)));
        const double var = st.factors[j].position_variance();
        CHECK(ks_test(q, [&](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0 * var)); }).pass);
    }
}

TEST_CASE("single-site and two-site massless lattices") {
    const auto one = lattice_modes(1, 0.7, 1.3);
    REQUIRE(one.omega.size() == 1);
    CHECK(one.omega[0] == doctest::Approx(1.3));
    CHECK(std::abs(one.basis(0, 0)) == doctest::Approx(1.0));
    const auto two = lattice_modes(2, 0.5, 0.0);
    CHECK(two.omega[0] == 0.0);
    CHECK(two.omega[1] == doctest::Approx(2.0 / 0.5));
    CHECK(two.zero_mode[0] == 1);
    CHECK(two.zero_mode[1] == 0);
}

TEST_CASE("coherent amplitude rotates as exp(-i omega t)") {
    GaussianMode g{1.4, 0.6, {1.0, 0.0}, 0.8, -0.3, 0.0, false};
    const auto a0 = g.coherent_amplitude();
    for (double t : {0.3, 1.1, 4.0}) {
        const auto a = evolve_mode(g, t).coherent_amplitude();
        CHECK(std::abs(a - a0 * std::polar(1.0, -1.4 * t)) < 1e-13);
    }
}

TEST_CASE("squeezed mode agrees with a grid solution of the oscillator") {
    const double omega = 1.2, dx = 0.8, t = 1.5;
    GaussianMode mode{omega, dx, {2.0, 0.0}, 0.0, 0.0, 0.0, false};
    const Grid1D g(512, -10.0, 10.0);
    GridWavefunction psi{g, std::vector<cplx>(g.size()), dx};
    for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = mode.amplitude(g.x(i));
    const double dt = 2.5e-4;
    const auto out = evolve_timeline(psi, Potential::harmonic(g, dx, omega), dt, 6000, 6000).back();
    const auto later = evolve_mode(mode, t);
    double err = 0.0, var = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        err = std::max(err, std::abs(std::abs(out.amplitudes[i]) - std::abs(later.amplitude(g.x(i)))));
        var += g.x(i) * g.x(i) * std::norm(out.amplitudes[i]) * g.dx();
    }
    CHECK(err < 1e-6);
    CHECK(std::abs(var - later.position_variance()) < 1e-6);
}
