#include <doctest.h>

#include "oracles.hpp"
#include "pilotwave/dirac.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/errors.hpp"

using namespace pilotwave;

TEST_CASE("positive-energy plane wave matches the analytic spinor") {
    const Grid1D g(256, 0.0, 20.0);
    for (int n : {-7, 1, 4, 15}) {
        const double k = 2.0 * oracle::pi * n / 20.0;
        const oracle::DiracPlaneWave ref{k, 0.7, 1.3};
        const auto s = positive_energy_plane_wave(g, k, 0.7, 1.3);
        CHECK(squared_norm(s) == doctest::Approx(1.0).epsilon(1e-12));
        const auto [u1, u2] = ref.spinor();
        for (std::size_t i = 0; i < g.size(); i += 17) CHECK(std::abs(s.psi1[i] * u2 - s.psi2[i] * u1) < 1e-12);
        for (double v : dirac_velocity(s).v) CHECK(std::abs(v - ref.velocity()) < 1e-8 * std::abs(ref.velocity()));
        CHECK(dirac_energy(k, 0.7, 1.3) == doctest::Approx(ref.energy()));
    }
}

TEST_CASE("density and current definitions") {
    const Grid1D g(16, 0.0, 1.0);
    DiracSpinor s{g, std::vector<cplx>(16, cplx(0.3, 0.4)), std::vector<cplx>(16, cplx(0.0, 0.5)), 1.0, 2.0, 0.0};
    CHECK(dirac_density(s)[3] == doctest::Approx(0.5));
    // c (psi1* psi2 + psi2* psi1) = 2c Re(psi1* psi2) = 2 * 2 * 0.2
    CHECK(dirac_current(s)[3] == doctest::Approx(0.8));
}

TEST_CASE("speed never exceeds c on random spinor fields") {
    const Grid1D g(64, 0.0, 1.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (int r = 0; r < 2000; ++r) {
        const double scale = std::pow(10.0, n(rng) * 50.0 / 3.0);
        DiracSpinor s{g, {}, {}, 1.0, 0.5, 0.0};
        for (int i = 0; i < 64; ++i) {
            const cplx a(n(rng), n(rng));
            s.psi1.push_back(scale * a);
            // Nearly aligned components push |v| to c from below.
            s.psi2.push_back(r % 2 ? scale * a * cplx(1.0, 1e-14 * n(rng)) : scale * cplx(n(rng), n(rng)));
        }
        for (double v : dirac_velocity(s).v) CHECK(std::abs(v) <= 0.5);
    }
}

TEST_CASE("split-step evolution conserves norm and respects the CFL bound") {
    const Grid1D g(512, -40.0, 40.0);
    auto s = positive_energy_packet(g, 0.0, 2.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(DiracStepper(g, 1.0, 1.0, 1.1 * g.dx()), PreconditionError);
    DiracStepper st(g, 1.0, 1.0, 0.5 * g.dx());
    for (int i = 0; i < 2000; ++i) st.step_in_place(s);
    CHECK(squared_norm(s) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("positive-energy packet moves at the group velocity") {
    const Grid1D g(1024, -40.0, 40.0);
    const double k0 = 1.0, m = 1.0, c = 1.0;
    const auto s0 = positive_energy_packet(g, -5.0, 3.0, k0, m, c);
    const auto tl = evolve_dirac_timeline(s0, 0.01, 1000, 1000);
    auto mean = [&](const DiracSpinor& s) {
        const auto rho = dirac_density(s);
        double x = 0.0, w = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            x += g.x(i) * rho[i];
            w += rho[i];
        }
        return x / w;
    };
    // Mean velocity of a packet equals the k-space average of c^2 k / E.
    const double sig_k = 1.0 / (2.0 * 3.0);
    const double vg = oracle::simpson(
        [&](double k) {
            return c * c * k / std::sqrt(k * k * c * c + m * m * c * c * c * c) *
                   std::exp(-(k - k0) * (k - k0) / (2.0 * sig_k * sig_k)) / std::sqrt(2.0 * oracle::pi * sig_k * sig_k);
        },
        k0 - 10 * sig_k, k0 + 10 * sig_k);
    CHECK(mean(tl.snapshots.back()) - mean(tl.snapshots.front()) == doctest::Approx(10.0 * vg).epsilon(1e-4));
}

TEST_CASE("Dirac ensemble stays in equilibrium") {
    const Grid1D g(1024, -40.0, 40.0);
    const auto s0 = positive_energy_packet(g, 0.0, 2.0, 0.5, 1.0, 1.0);
    const auto tl = evolve_dirac_timeline(s0, 0.025, 400, 2);
    const auto q0 = sample_density(g, tl.flow.density.front(), 5000, 12).positions;
    const auto ens = integrate_trajectories(tl.flow, q0);
    for (double t : {2.0, 5.0}) CHECK(equivariance_check(ens, tl.flow, t).pass);
}

TEST_CASE("massless right-moving spinor translates at c") {
    const Grid1D g(400, 0.0, 40.0);
    DiracSpinor s{g, {}, {}, 0.0, 1.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i) - 15.0;
        const cplx a = std::exp(-x * x / 4.0) * std::polar(1.0, 0.8 * g.x(i));
        s.psi1.push_back(a);
        s.psi2.push_back(a);
    }
    DiracStepper st(g, 0.0, 1.0, 0.05);
    auto out = s;
    for (int k = 0; k < 200; ++k) st.step_in_place(out);
    // 200 steps of 0.05 move by 10 = 100 cells.
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t src = (i + g.size() - 100) % g.size();
        CHECK(std::abs(out.psi1[i] - s.psi1[src]) < 1e-10);
        CHECK(std::abs(out.psi2[i] - s.psi2[src]) < 1e-10);
    }
}

TEST_CASE("counter-propagating plane waves are at rest at the density maximum and dt = 0 is the identity") {
    const Grid1D g(256, 0.0, 20.0);
    const double k = 2.0 * oracle::pi * 3.0 / 20.0;
    const auto right = positive_energy_plane_wave(g, k, 1.0, 1.0);
    const auto left = positive_energy_plane_wave(g, -k, 1.0, 1.0);
    auto sum = right;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sum.psi1[i] += left.psi1[i];
        sum.psi2[i] += left.psi2[i];
    }
    const auto rho = dirac_density(sum);
    const auto imax = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
    CHECK(std::abs(dirac_velocity(sum).v[imax]) < 1e-12);

    const auto same = dirac_step(sum, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(same.psi1[i] == sum.psi1[i]);
        CHECK(same.psi2[i] == sum.psi2[i]);
    }
}
