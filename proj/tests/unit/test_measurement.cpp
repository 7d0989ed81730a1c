#include <doctest.h>

#include "oracles.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/measurement.hpp"

using namespace pilotwave;

namespace {

double branch_mean(const BranchedState& s, const std::vector<cplx>& c) {
    double m = 0.0, w = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        m += s.pointer_grid.x(i) * std::norm(c[i]);
        w += std::norm(c[i]);
    }
    return m / w;
}

}  // namespace

TEST_CASE("branched state carries the coefficients") {
    const Grid1D g(512, -20.0, 20.0);
    const auto s = make_branched_state(g, std::sqrt(0.3), cplx(0.0, std::sqrt(0.7)), 1.0, 1.0);
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        n1 += std::norm(s.component1[i]) * g.dx();
        n2 += std::norm(s.component2[i]) * g.dx();
    }
    CHECK(n1 == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(n2 == doctest::Approx(0.7).epsilon(1e-10));
    CHECK_THROWS_AS(make_branched_state(g, 0.5, 0.5, 1.0, 1.0), PreconditionError);
}

TEST_CASE("branches drift apart at the coupling speed") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.5), std::sqrt(0.5), 1.0, 0.8);
    const auto states = evolve_measurement(s0, 5.0, 0.5);
    REQUIRE(states.size() == 11);
    CHECK(states.back().time == doctest::Approx(5.0));
    CHECK(branch_mean(states.back(), states.back().component1) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(branch_mean(states.back(), states.back().component2) == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("branch overlap agrees with quadrature of two gaussians") {
    const Grid1D g(2048, -20.0, 20.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.5), std::sqrt(0.5), 1.0, 1.0, 1e9);
    const auto s = evolve_measurement(s0, 3.0, 3.0).back();  // centres at +-3, width essentially frozen
    const double sigma = 1.0;
    const double quad = oracle::simpson(
        [&](double y) {
            const double a = std::exp(-(y - 3.0) * (y - 3.0) / (2 * sigma * sigma));
            const double b = std::exp(-(y + 3.0) * (y + 3.0) / (2 * sigma * sigma));
            return std::min(a, b) / std::sqrt(2.0 * oracle::pi * sigma * sigma);
        },
        -20.0, 20.0, 40000);
    CHECK(branch_overlap(s) == doctest::Approx(quad).epsilon(1e-6));
    CHECK(quad == doctest::Approx(std::erfc(3.0 / std::sqrt(2.0))).epsilon(1e-8));
    // |<Phi1|Phi2>|^2 at 6 sigma separation is exp(-9).
    CHECK(pointer_inner_overlap(s) == doctest::Approx(std::exp(-9.0)).epsilon(1e-8));
}

TEST_CASE("clipping by the pointer grid is reported") {
    const Grid1D g(256, -8.0, 8.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.5), std::sqrt(0.5), 0.5, 1.0);
    CHECK_THROWS_AS(evolve_measurement(s0, 10.0, 0.5), DomainError);
}

TEST_CASE("single-branch velocity is the drift plus spreading") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, 1.0, 0.0, 1.0, 1.5, 2.0);
    const auto s = evolve_measurement(s0, 2.0, 1.0).back();
    const auto v = measurement_velocity(s);
    // Component 1 is a free packet of mass 2 translated at speed g.
    const oracle::FreeGaussian ref{0.0, 1.0, 0.0, 2.0, 1.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = g.x(i);
        if (v.node_mask[i] || std::abs(y - 3.0) > 4.0) continue;
        CHECK(v.v[i] == doctest::Approx(1.5 + ref.velocity(y - 3.0, 2.0)).epsilon(1e-8));
    }
}

TEST_CASE("after separation the empty branch is dynamically irrelevant") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.4), std::sqrt(0.6), 1.0, 1.0);
    const auto s = evolve_measurement(s0, 7.0, 7.0).back();
    REQUIRE(branch_overlap(s) < 1e-8);
    for (double q : {5.0, 6.5, 7.0, 8.3, 9.0, -5.5, -7.0, -8.8})
        CHECK(dynamical_irrelevance_check(s, q) < 1e-6);
    CHECK_THROWS_AS(dynamical_irrelevance_check(s, 0.0), PreconditionError);
    const auto early = evolve_measurement(s0, 1.0, 1.0).back();
    CHECK_THROWS_AS(dynamical_irrelevance_check(early, 1.0), PreconditionError);
}

TEST_CASE("outcome statistics follow the branch weights") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.3), std::sqrt(0.7), 1.0, 1.0);
    const auto tl = make_measurement_timeline(evolve_measurement(s0, 8.0, 0.05));
    const auto a = run_measurement_ensemble(tl, 4000, 21);
    const auto b = run_measurement_ensemble(tl, 4000, 21, 1e-6, Execution::serial);
    CHECK(a.count1 == b.count1);
    CHECK(a.born_pass);
    CHECK(a.undecided_pass);
    CHECK(a.permanence_violations == 0);
    CHECK(a.count1 + a.count2 + a.undecided == 4000);
    CHECK(a.band == doctest::Approx(3.0 * std::sqrt(0.21 / 4000.0)));
    for (const auto& r : a.records) {
        if (r.outcome == 1) CHECK(r.final_pointer > 0.0);
        if (r.outcome == 2) CHECK(r.final_pointer < 0.0);
    }
}

TEST_CASE("single branch moves rigidly and its velocity is the occupied one") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, 1.0, 0.0, 1.0, 0.9);
    CHECK(branch_overlap(s0) == 0.0);
    const auto states = evolve_measurement(s0, 6.0, 3.0);
    CHECK(branch_mean(states.back(), states.back().component1) == doctest::Approx(0.9 * 6.0).epsilon(1e-6 / 5.4));
    CHECK(dynamical_irrelevance_check(states.back(), 5.4) == 0.0);

    const auto tl = make_measurement_timeline(evolve_measurement(s0, 4.0, 0.05));
    const auto sum = run_measurement_ensemble(tl, 500, 3);
    CHECK(sum.count1 == 500);
}

TEST_CASE("identical ready states overlap fully and separated pointers by exp(-9)") {
    const Grid1D g(2048, -30.0, 30.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.5), std::sqrt(0.5), 1.0, 1.0);
    CHECK(branch_overlap(s0) == doctest::Approx(1.0).epsilon(1e-10));
    // Branches drift at +-g, so 6 sigma separation is reached at t = 3.
    const auto s = evolve_measurement(s0, 3.0, 3.0).back();
    const double inner = pointer_inner_overlap(s);
    CHECK(inner > 0.5 * std::exp(-9.0));
    CHECK(inner < 2.0 * std::exp(-9.0));

    BranchedState disjoint = s0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        disjoint.component1[i] = g.x(i) < 0.0 ? s0.component1[i] : 0.0;
        disjoint.component2[i] = g.x(i) < 0.0 ? 0.0 : s0.component2[i];
    }
    CHECK(branch_overlap(disjoint) == 0.0);
}

TEST_CASE("no-crossing maps the lower half of the pointer to the lower branch") {
    const Grid1D g(1024, -20.0, 20.0);
    const auto s0 = make_branched_state(g, std::sqrt(0.5), std::sqrt(0.5), 1.0, 1.0);
    const auto tl = make_measurement_timeline(evolve_measurement(s0, 8.0, 0.05));
    std::vector<double> q0;
    for (int i = 0; i < 40; ++i) q0.push_back(-3.0 + 0.07 * i);
    for (int i = 0; i < 40; ++i) q0.push_back(0.2 + 0.07 * i);
    const auto sum = run_measurement_ensemble(tl, q0, 1);
    for (const auto& r : sum.records) {
        // Branch 1 drifts to +g t, branch 2 to -g t.
        CHECK(r.outcome == (r.initial_pointer < 0.0 ? 2 : 1));
    }
}
