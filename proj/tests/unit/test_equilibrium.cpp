#include <doctest.h>

#include "oracles.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/stepper.hpp"

using namespace pilotwave;

TEST_CASE("KS critical value agrees with the Kolmogorov tail") {
    CHECK(ks_critical_value(0.01) == doctest::Approx(1.6276).epsilon(1e-4));
    // The asymptotic form keeps only the leading term of the Kolmogorov series.
    CHECK(oracle::kolmogorov_tail(ks_critical_value(0.01)) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(oracle::kolmogorov_tail(ks_critical_value(0.05)) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("KS statistic of a small sample by hand") {
    // Uniform CDF on [0,1]; sample {0.1, 0.5, 0.9}: sup gap = max(1/3 - 0.1, 0.5 - 1/3, 2/3 - 0.5, 0.9 - 2/3, 1 - 0.9).
    const double d = ks_statistic({0.9, 0.1, 0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(d == doctest::Approx(0.2333333333333).epsilon(1e-10));
}

TEST_CASE("equilibrium sampling is deterministic and passes KS and chi-square") {
    const Grid1D g(512, -10.0, 10.0);
    const auto psi = init_gaussian(g, 1.0, 1.5, 0.0);
    const auto a = sample_density(psi, 10000, 17);
    const auto b = sample_density(psi, 10000, 17);
    CHECK(a.positions == b.positions);
    const oracle::FreeGaussian ref{1.0, 1.5, 0.0};
    const auto ks = ks_test(a.positions, [&](double x) { return ref.cdf(x, 0.0); });
    CHECK(ks.pass);
    const auto rho = density(psi);
    const auto chi = chi_square_test(g, rho, a.positions);
    CHECK(chi.pass);
    CHECK(chi.dof > 10);
}

TEST_CASE("KS false alarm rate is near alpha") {
    const Grid1D g(256, -8.0, 8.0);
    const auto psi = init_gaussian(g, 0.0, 1.0, 0.0);
    const auto rho = density(psi);
    const GridCdf cdf(g, rho);
    int fails = 0;
    const int trials = 400;
    for (int s = 0; s < trials; ++s) {
        const auto smp = sample_density(g, rho, 500, static_cast<std::uint64_t>(s));
        if (!ks_test(smp.positions, [&](double x) { return cdf(x); }, 0.05).pass) ++fails;
    }
    // Binomial(400, 0.05): mean 20, sd 4.4.
    CHECK(fails >= 5);
    CHECK(fails <= 36);
}

TEST_CASE("tests reject a displaced sample") {
    const Grid1D g(512, -10.0, 10.0);
    const auto rho = density(init_gaussian(g, 0.0, 1.0, 0.0));
    auto smp = sample_density(g, rho, 5000, 3).positions;
    for (auto& x : smp) x += 0.2;
    const GridCdf cdf(g, rho);
    CHECK_FALSE(ks_test(smp, [&](double x) { return cdf(x); }).pass);
    CHECK_FALSE(chi_square_test(g, rho, smp).pass);
}

TEST_CASE("grid CDF is piecewise linear and normalised") {
    const Grid1D g(8, 0.0, 8.0);
    std::vector<double> rho(8, 0.0);
    rho[2] = 1.0;
    rho[5] = 3.0;
    const GridCdf cdf(g, rho);
    CHECK(cdf(0.0) == 0.0);
    CHECK(cdf(2.5) == doctest::Approx(0.125));
    CHECK(cdf(3.0) == doctest::Approx(0.25));
    CHECK(cdf(5.5) == doctest::Approx(0.625));
    CHECK(cdf(8.0) == doctest::Approx(1.0));
    CHECK(cdf.total_mass() == doctest::Approx(4.0));
}

TEST_CASE("equivariance check holds along the flow and flags reliability") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto psi0 = init_gaussian(g, 0.0, 1.0, 1.0);
    const auto tl = make_timeline(evolve_timeline(psi0, Potential::zero(g), 0.01, 100, 1));
    const auto q0 = sample_density(psi0, 10000, 8).positions;
    const auto ens = integrate_trajectories(tl, q0);
    for (double t : {0.2, 0.6, 1.0}) {
        const auto r = equivariance_check(ens, tl, t);
        CHECK(r.pass);
        CHECK(r.reliable);
        CHECK(r.n_used == 10000);
    }
    CHECK_THROWS_AS(equivariance_check(ens, tl, 0.21), PreconditionError);
}

TEST_CASE("coarse graining partitions the domain") {
    const Grid1D g(64, 0.0, 1.0);
    const CoarseGraining cg(g, 16);
    CHECK(cg.cell_width() == doctest::Approx(1.0 / 16.0));
    CHECK(cg.cell_of(0.0) == 0);
    CHECK(cg.cell_of(0.999) == 15);
    const std::vector<double> rho(64, 1.0);
    for (double m : cg.cell_mass(rho)) CHECK(m == doctest::Approx(1.0 / 16.0));
    CHECK_THROWS(CoarseGraining(g, 40));
}

TEST_CASE("relaxation diagnostic vanishes up to noise in equilibrium and is large out of it") {
    const Grid1D g(512, -10.0, 10.0);
    const auto psi0 = init_gaussian(g, 0.0, 1.0, 0.0);
    const auto tl = make_timeline(evolve_timeline(psi0, Potential::zero(g), 0.01, 20, 1));
    const CoarseGraining cg(g, 16);
    const auto eq = integrate_trajectories(tl, sample_density(psi0, 20000, 1).positions);
    const auto series = relaxation_diagnostic(eq, tl, cg);
    CHECK(series.size() == eq.n_times());
    CHECK(series.front().l1 < 0.03);
    std::vector<double> shifted = sample_density(psi0, 20000, 1).positions;
    for (auto& x : shifted) x = 0.5 * x + 1.0;
    const auto off = relaxation_diagnostic(integrate_trajectories(tl, shifted), tl, cg);
    CHECK(off.front().l1 > 0.5);
    CHECK(off.front().relative_entropy > 0.1);
}

TEST_CASE("uniformly seeded ensemble fails equivariance under a gaussian flow") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto psi0 = init_gaussian(g, 0.0, 1.0, 0.0);
    const auto tl = make_timeline(evolve_timeline(psi0, Potential::zero(g), 0.01, 200, 1));
    std::vector<double> q0;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 10000; ++i) q0.push_back(u(rng));
    const auto ens = integrate_trajectories(tl, q0);
    const auto r = equivariance_check(ens, tl, 2.0);
    CHECK_FALSE(r.pass);
    CHECK(r.statistic > r.threshold);
    const auto ok = equivariance_check(integrate_trajectories(tl, sample_density(psi0, 10000, 8).positions), tl, 0.0);
    CHECK(ok.pass);
}

TEST_CASE("equilibrium control stays inside the sampling band at all times") {
    const Grid1D g(512, -10.0, 10.0);
    const auto psi0 = init_gaussian(g, 0.0, 1.0, 0.5);
    const auto tl = make_timeline(evolve_timeline(psi0, Potential::harmonic(g, 1.0, 1.0), 0.01, 200, 10));
    const CoarseGraining cg(g, 16);
    const std::size_t m = 10000;
    const auto series = relaxation_diagnostic(integrate_trajectories(tl, sample_density(psi0, m, 2).positions), tl, cg);
    const double band = 3.0 * std::sqrt(16.0 / static_cast<double>(m));
    for (const auto& p : series) CHECK(p.l1 < band);
}

TEST_CASE("stationary state keeps a non-equilibrium ensemble frozen") {
    const Grid1D g(256, 0.0, 3.0, Boundary::reflecting);
    GridWavefunction psi{g, std::vector<cplx>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i) psi.amplitudes[i] = std::sin(oracle::pi * g.x(i) / 3.0);
    normalize(psi);
    const auto tl = make_timeline(evolve_timeline(psi, Potential::zero(g), 1e-3, 500, 50));
    std::vector<double> q0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 2.9);
    for (int i = 0; i < 5000; ++i) q0.push_back(u(rng));
    const auto series = relaxation_diagnostic(integrate_trajectories(tl, q0), tl, CoarseGraining(g, 8));
    CHECK(series.front().l1 > 0.0);
    for (const auto& p : series) CHECK(std::abs(p.l1 - series.front().l1) < 1e-6);
}
