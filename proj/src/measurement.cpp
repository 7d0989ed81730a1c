#include "pilotwave/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/errors.hpp"

namespace pilotwave {
namespace {

constexpr double branch_sign(int branch) { return branch == 1 ? 1.0 : -1.0; }

// Linear interpolation of a cell-centred field.
double sample_linear(const Grid1D& grid, const std::vector<double>& f, double x) {
    const double u = (x - grid.x_min()) / grid.dx() - 0.5;
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    auto at = [&](std::ptrdiff_t i) {
        if (grid.periodic()) {
            i %= n;
            if (i < 0) i += n;
        } else {
            i = std::clamp<std::ptrdiff_t>(i, 0, n - 1);
        }
        return f[static_cast<std::size_t>(i)];
    };
    const double fl = std::floor(u);
    const auto i0 = static_cast<std::ptrdiff_t>(fl);
    const double w = u - fl;
    return (1.0 - w) * at(i0) + w * at(i0 + 1);
}

std::vector<double> abs2(const std::vector<cplx>& a) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::norm(a[i]);
    return r;
}

void check_clipping(const BranchedState& s) {
    const std::size_t n = s.pointer_grid.size();
    const std::size_t edge = std::max<std::size_t>(1, n / 16);
    double outer = 0.0;
    for (std::size_t i = 0; i < edge; ++i)
        outer += std::norm(s.component1[i]) + std::norm(s.component2[i]) + std::norm(s.component1[n - 1 - i]) +
                 std::norm(s.component2[n - 1 - i]);
    outer *= s.pointer_grid.dx();
    if (outer > 1e-8)
        throw DomainError("pointer branch clipped by the pointer grid at t = " + std::to_string(s.time) +
                          " (edge mass " + std::to_string(outer) + ")");
}

}  // namespace

BranchedState make_branched_state(const Grid1D& grid, cplx c1, cplx c2, double pointer_sigma, double coupling,
                                  double pointer_mass, double hbar) {
    const double w = std::norm(c1) + std::norm(c2);
    if (std::abs(w - 1.0) > 1e-10)
        throw PreconditionError("|c1|^2 + |c2|^2 = " + std::to_string(w) + ", expected 1");
    if (!(pointer_mass > 0.0) || !(hbar > 0.0)) throw PreconditionError("pointer mass and hbar must be positive");
    const auto phi0 = init_gaussian(grid, 0.0, pointer_sigma, 0.0, pointer_mass, hbar);
    BranchedState s{grid, phi0.amplitudes, phi0.amplitudes, c1, c2, coupling, pointer_mass, hbar, 0.0};
    for (auto& z : s.component1) z *= c1;
    for (auto& z : s.component2) z *= c2;
    check_clipping(s);
    return s;
}

std::vector<BranchedState> evolve_measurement(const BranchedState& state, double duration, double dt) {
    if (!(dt > 0.0) || !(duration >= 0.0)) throw PreconditionError("need dt > 0 and duration >= 0");
    if (!state.pointer_grid.periodic()) throw PreconditionError("measurement evolution needs a periodic pointer grid");
    const std::size_t n = state.pointer_grid.size();
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    if (std::abs(static_cast<double>(steps) * dt - duration) > 1e-9 * std::max(1.0, duration))
        throw PreconditionError("duration must be a whole number of steps");
    const auto k = detail::fft_wavenumbers(n, state.pointer_grid.length());
    detail::FftPlan fft(n);

    auto to_k = [&](const std::vector<cplx>& a) {
        std::copy(a.begin(), a.end(), fft.data());
        fft.forward();
        return std::vector<cplx>(fft.data(), fft.data() + n);
    };
    const auto a1 = to_k(state.component1);
    const auto a2 = to_k(state.component2);

    std::vector<BranchedState> out;
    out.reserve(steps + 1);
    out.push_back(state);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t s = 1; s <= steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        BranchedState next = state;
        next.time = state.time + t;
        for (int branch = 1; branch <= 2; ++branch) {
            const auto& ak = branch == 1 ? a1 : a2;
            const double sgn = branch_sign(branch);
            cplx* buf = fft.data();
            for (std::size_t i = 0; i < n; ++i) {
                const double omega = state.hbar * k[i] * k[i] / (2.0 * state.pointer_mass) + state.coupling * sgn * k[i];
                buf[i] = ak[i] * std::polar(inv_n, -omega * t);
            }
            fft.backward();
            auto& dst = branch == 1 ? next.component1 : next.component2;
            std::copy(buf, buf + n, dst.begin());
        }
        check_clipping(next);
        out.push_back(std::move(next));
    }
    return out;
}

double branch_overlap(const BranchedState& s) {
    const double w1 = std::norm(s.c1), w2 = std::norm(s.c2);
    if (w1 == 0.0 || w2 == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.component1.size(); ++i)
        acc += std::min(std::norm(s.component1[i]), std::norm(s.component2[i]));
    return std::min(1.0, acc * s.pointer_grid.dx() / std::min(w1, w2));
}

double pointer_inner_overlap(const BranchedState& s) {
    const double w1 = std::norm(s.c1), w2 = std::norm(s.c2);
    if (w1 == 0.0 || w2 == 0.0) return 0.0;
    cplx acc{};
    for (std::size_t i = 0; i < s.component1.size(); ++i) acc += std::conj(s.component1[i]) * s.component2[i];
    acc *= s.pointer_grid.dx();
    return std::norm(acc) / (w1 * w2);
}

VelocityField branch_velocity(const BranchedState& s, int branch, double node_eps) {
    if (branch != 1 && branch != 2) throw PreconditionError("branch must be 1 or 2");
    const auto& a = branch == 1 ? s.component1 : s.component2;
    auto j = kinetic_current(s.pointer_grid, a, s.pointer_mass, s.hbar);
    const auto rho = abs2(a);
    const double drift = s.coupling * branch_sign(branch);
    for (std::size_t i = 0; i < j.size(); ++i) j[i] += drift * rho[i];
    return velocity_from_current(s.pointer_grid, j, rho, node_eps);
}

VelocityField measurement_velocity(const BranchedState& s, double node_eps) {
    const auto j1 = kinetic_current(s.pointer_grid, s.component1, s.pointer_mass, s.hbar);
    const auto j2 = kinetic_current(s.pointer_grid, s.component2, s.pointer_mass, s.hbar);
    const std::size_t n = j1.size();
    std::vector<double> j(n), rho(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r1 = std::norm(s.component1[i]);
        const double r2 = std::norm(s.component2[i]);
        rho[i] = r1 + r2;
        j[i] = (j1[i] + s.coupling * r1) + (j2[i] - s.coupling * r2);
    }
    return velocity_from_current(s.pointer_grid, j, rho, node_eps);
}

MeasurementTimeline make_measurement_timeline(std::vector<BranchedState> states) {
    if (states.empty()) throw PreconditionError("empty measurement timeline");
    MeasurementTimeline tl{{}, FlowTimeline{states.front().pointer_grid, {}, {}, {}}, {}, {}, {}};
    for (const auto& s : states) {
        auto r1 = abs2(s.component1);
        auto r2 = abs2(s.component2);
        std::vector<double> rho(r1.size());
        for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = r1[i] + r2[i];
        append_snapshot(tl.flow, s.time, std::move(rho), measurement_velocity(s));
        tl.rho1.push_back(std::move(r1));
        tl.rho2.push_back(std::move(r2));
        tl.overlap.push_back(branch_overlap(s));
    }
    tl.states = std::move(states);
    return tl;
}

MeasurementSummary run_measurement_ensemble(const MeasurementTimeline& tl, std::span<const double> q0,
                                            std::uint64_t seed, double collapse_eps, Execution exec) {
    if (tl.states.size() < 3) throw PreconditionError("measurement timeline needs at least 3 snapshots");
    IntegratorOptions opts;
    opts.seed = seed;
    opts.execution = exec;
    MeasurementSummary out;
    out.ensemble = integrate_trajectories(tl.flow, q0, opts);
    const auto& ens = out.ensemble;
    const Grid1D& grid = tl.flow.grid;
    const std::size_t m = ens.n_trajectories();

    std::vector<std::size_t> snap(ens.n_times());
    for (std::size_t k = 0; k < ens.n_times(); ++k) snap[k] = tl.flow.index_of(ens.times[k]);

    out.records.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        OutcomeRecord& rec = out.records[i];
        rec.trajectory_id = i;
        rec.initial_pointer = ens.at(i, 0);
        rec.final_pointer = ens.at(i, ens.n_times() - 1);
        for (std::size_t k = 0; k < ens.n_times(); ++k) {
            const std::size_t s = snap[k];
            if (rec.outcome == 0 && tl.overlap[s] >= collapse_eps) continue;
            const double q = ens.at(i, k);
            const double r1 = sample_linear(grid, tl.rho1[s], q);
            const double r2 = sample_linear(grid, tl.rho2[s], q);
            const int lead = r1 >= r2 ? 1 : 2;
            if (rec.outcome == 0) {
                const double hi = std::max(r1, r2), lo = std::min(r1, r2);
                if (hi > 0.0 && lo <= collapse_eps * hi) {
                    rec.outcome = lead;
                    rec.decided_at = ens.times[k];
                }
            } else if (lead != rec.outcome) {
                ++out.permanence_violations;
                break;
            }
        }
        if (rec.outcome == 1) ++out.count1;
        else if (rec.outcome == 2) ++out.count2;
        else ++out.undecided;
    }
    const auto& s0 = tl.states.front();
    out.weight1 = std::norm(s0.c1);
    const double w2 = std::norm(s0.c2);
    const auto md = static_cast<double>(m);
    out.frequency1 = static_cast<double>(out.count1) / md;
    out.band = 3.0 * std::sqrt(out.weight1 * w2 / md);
    out.born_pass = std::abs(out.frequency1 - out.weight1) <= out.band;
    out.undecided_pass = static_cast<double>(out.undecided) < 0.005 * md;
    return out;
}

MeasurementSummary run_measurement_ensemble(const MeasurementTimeline& tl, std::size_t m, std::uint64_t seed,
                                            double collapse_eps, Execution exec) {
    const auto samples = sample_density(tl.flow.grid, tl.flow.density.front(), m, seed, tl.flow.times.front());
    return run_measurement_ensemble(tl, samples.positions, seed, collapse_eps, exec);
}

double dynamical_irrelevance_check(const BranchedState& state, double q, double collapse_eps, double v_floor) {
    const double overlap = branch_overlap(state);
    const bool single = std::norm(state.c1) == 0.0 || std::norm(state.c2) == 0.0;
    if (!single && !(overlap < collapse_eps))
        throw PreconditionError("branches still overlap (" + std::to_string(overlap) + " >= collapse_eps)");
    const Grid1D& grid = state.pointer_grid;
    const auto r1 = abs2(state.component1);
    const auto r2 = abs2(state.component2);
    const double d1 = sample_linear(grid, r1, q);
    const double d2 = sample_linear(grid, r2, q);
    const int occupied = d1 >= d2 ? 1 : 2;
    const double d_occ = std::max(d1, d2), d_other = std::min(d1, d2);
    if (!(d_occ > 0.0) || d_other > collapse_eps * d_occ)
        throw PreconditionError("beable position lies in the branch overlap region");

    const auto j1 = kinetic_current(grid, state.component1, state.pointer_mass, state.hbar);
    const auto j2 = kinetic_current(grid, state.component2, state.pointer_mass, state.hbar);
    std::vector<double> jt1(j1.size()), jt2(j2.size());
    for (std::size_t i = 0; i < j1.size(); ++i) {
        jt1[i] = j1[i] + state.coupling * r1[i];
        jt2[i] = j2[i] - state.coupling * r2[i];
    }
    const double cur1 = sample_linear(grid, jt1, q);
    const double cur2 = sample_linear(grid, jt2, q);
    const double v_full = (cur1 + cur2) / (d1 + d2);
    const double v_occ = occupied == 1 ? cur1 / d1 : cur2 / d2;
    return std::abs(v_full - v_occ) / (std::abs(v_occ) + v_floor);
}

}  // namespace pilotwave
