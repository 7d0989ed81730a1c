#include "pilotwave/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pilotwave/errors.hpp"

namespace pilotwave {

double default_node_eps(std::span<const double> rho) {
    const double peak = rho.empty() ? 0.0 : *std::max_element(rho.begin(), rho.end());
    return 1e-12 * peak;
}

VelocityField velocity_from_current(const Grid1D& grid, std::span<const double> j, std::span<const double> rho,
                                    double node_eps) {
    if (node_eps <= 0.0) node_eps = default_node_eps(rho);
    VelocityField out{grid, std::vector<double>(rho.size(), 0.0), std::vector<std::uint8_t>(rho.size(), 0)};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] >= node_eps && rho[i] > 0.0)
            out.v[i] = j[i] / rho[i];
        else
            out.node_mask[i] = 1;
    }
    return out;
}

VelocityField velocity_field(const GridWavefunction& psi, double node_eps) {
    const auto rho = density(psi);
    const auto j = probability_current(psi);
    return velocity_from_current(psi.grid, j, rho, node_eps);
}

double squared_norm(const SpinorWavefunction& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.psi1.size(); ++i) acc += std::norm(s.psi1[i]) + std::norm(s.psi2[i]);
    return acc * s.grid.dx();
}

VelocityField pauli_velocity(const SpinorWavefunction& s, double node_eps) {
    const std::size_t n = s.grid.size();
    if (s.psi1.size() != n || s.psi2.size() != n || s.vector_potential.size() != n)
        throw PreconditionError("spinor component sizes do not match the grid");
    const auto j1 = kinetic_current(s.grid, s.psi1, s.mass, s.hbar);
    const auto j2 = kinetic_current(s.grid, s.psi2, s.mass, s.hbar);
    const double coupling = s.charge / (s.mass * s.c);
    std::vector<double> j(n), rho(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r1 = std::norm(s.psi1[i]);
        const double r2 = std::norm(s.psi2[i]);
        rho[i] = r1 + r2;
        j[i] = (j1[i] - coupling * s.vector_potential[i] * r1) + (j2[i] - coupling * s.vector_potential[i] * r2);
    }
    return velocity_from_current(s.grid, j, rho, node_eps);
}

std::size_t FlowTimeline::index_of(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol)
        throw PreconditionError("no snapshot at t = " + std::to_string(t));
    return static_cast<std::size_t>(it - times.begin());
}

void append_snapshot(FlowTimeline& tl, double t, std::vector<double> rho, VelocityField v) {
    if (!tl.times.empty() && !(t > tl.times.back()))
        throw PreconditionError("snapshot times must be strictly increasing");
    if (rho.size() != tl.grid.size() || v.v.size() != tl.grid.size())
        throw PreconditionError("snapshot size does not match timeline grid");
    tl.times.push_back(t);
    tl.density.push_back(std::move(rho));
    tl.velocity.push_back(std::move(v));
}

FlowTimeline make_timeline(std::span<const GridWavefunction> snapshots, double node_eps) {
    if (snapshots.empty()) throw PreconditionError("timeline needs at least one snapshot");
    FlowTimeline tl{snapshots.front().grid, {}, {}, {}};
    for (const auto& psi : snapshots) append_snapshot(tl, psi.time, density(psi), velocity_field(psi, node_eps));
    return tl;
}

std::vector<double> TrajectoryEnsemble::column(std::size_t k) const {
    std::vector<double> out(n_trajectories());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, k);
    return out;
}

std::size_t TrajectoryEnsemble::flagged_count() const noexcept {
    return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), std::uint8_t{1}));
}

VelocityInterpolator::VelocityInterpolator(const FlowTimeline& timeline) : tl_(&timeline) {
    if (timeline.size() == 0) throw PreconditionError("empty timeline");
    guarded_.reserve(timeline.size());
    for (const auto& vf : timeline.velocity) {
        const std::size_t n = vf.v.size();
        std::vector<double> g = vf.v;
        // Nearest live neighbour by index distance; left wins ties.
        std::vector<std::ptrdiff_t> left(n, -1), right(n, -1);
        std::ptrdiff_t last = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!vf.node_mask[i]) last = static_cast<std::ptrdiff_t>(i);
            left[i] = last;
        }
        last = -1;
        for (std::size_t i = n; i-- > 0;) {
            if (!vf.node_mask[i]) last = static_cast<std::ptrdiff_t>(i);
            right[i] = last;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!vf.node_mask[i]) continue;
            const auto ii = static_cast<std::ptrdiff_t>(i);
            const std::ptrdiff_t l = left[i], r = right[i];
            if (l < 0 && r < 0) g[i] = 0.0;
            else if (l < 0) g[i] = vf.v[static_cast<std::size_t>(r)];
            else if (r < 0) g[i] = vf.v[static_cast<std::size_t>(l)];
            else g[i] = (ii - l <= r - ii) ? vf.v[static_cast<std::size_t>(l)] : vf.v[static_cast<std::size_t>(r)];
        }
        guarded_.push_back(std::move(g));
    }
}

double VelocityInterpolator::spatial(std::size_t s, double x, bool& hit_node) const {
    const Grid1D& grid = tl_->grid;
    const auto& g = guarded_[s];
    const auto n = static_cast<std::ptrdiff_t>(g.size());
    const double u = (x - grid.x_min()) / grid.dx() - 0.5;
    const double fl = std::floor(u);
    const auto i0 = static_cast<std::ptrdiff_t>(fl);
    const double f = u - fl;

    auto value = [&](std::ptrdiff_t i) -> double {
        if (grid.periodic()) {
            i %= n;
            if (i < 0) i += n;
            return g[static_cast<std::size_t>(i)];
        }
        // v = j / rho is odd under the reflecting-wall mirror.
        if (i < 0) {
            const std::ptrdiff_t j = std::min<std::ptrdiff_t>(-1 - i, n - 1);
            return -g[static_cast<std::size_t>(j)];
        }
        if (i >= n) {
            const std::ptrdiff_t j = std::max<std::ptrdiff_t>(2 * n - 1 - i, 0);
            return -g[static_cast<std::size_t>(j)];
        }
        return g[static_cast<std::size_t>(i)];
    };

    std::ptrdiff_t nearest = i0 + (f >= 0.5 ? 1 : 0);
    if (grid.periodic()) {
        nearest %= n;
        if (nearest < 0) nearest += n;
    } else {
        nearest = std::clamp<std::ptrdiff_t>(nearest, 0, n - 1);
    }
    if (tl_->velocity[s].node_mask[static_cast<std::size_t>(nearest)]) hit_node = true;

    const double wm = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return wm * value(i0 - 1) + w0 * value(i0) + w1 * value(i0 + 1) + w2 * value(i0 + 2);
}

double VelocityInterpolator::operator()(double x, double t, bool& hit_node) const {
    const auto& times = tl_->times;
    if (times.size() == 1 || t <= times.front()) return spatial(0, x, hit_node);
    if (t >= times.back()) return spatial(times.size() - 1, x, hit_node);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto k1 = static_cast<std::size_t>(it - times.begin());
    const std::size_t k0 = k1 - 1;
    const double w = (t - times[k0]) / (times[k1] - times[k0]);
    constexpr double snap = 1e-12;
    if (w < snap) return spatial(k0, x, hit_node);
    if (w > 1.0 - snap) return spatial(k1, x, hit_node);
    return (1.0 - w) * spatial(k0, x, hit_node) + w * spatial(k1, x, hit_node);
}

namespace {

struct StepPlan {
    double t0;
    double h;
    std::size_t n_steps;
    double t_end;
};

StepPlan plan_steps(const FlowTimeline& tl, const IntegratorOptions& opts) {
    StepPlan p{};
    p.t0 = tl.times.front();
    p.t_end = opts.t_end < 0.0 ? tl.times.back() : opts.t_end;
    if (p.t_end < p.t0) throw PreconditionError("t_end precedes the first snapshot");
    p.h = opts.step;
    if (p.h <= 0.0) {
        if (tl.size() < 2) throw PreconditionError("cannot infer a step from a single snapshot");
        p.h = 2.0 * (tl.times[1] - tl.times[0]);
    }
    const double span = p.t_end - p.t0;
    p.n_steps = static_cast<std::size_t>(std::ceil(span / p.h - 1e-9));
    return p;
}

void integrate_one(const VelocityInterpolator& vel, const Grid1D& grid, const StepPlan& plan,
                   const IntegratorOptions& opts, double q, std::span<double> row, std::uint32_t& events,
                   std::uint8_t& flagged) {
    std::size_t k = 0;
    row[k++] = q;
    bool wall = false;
    for (std::size_t s = 0; s < plan.n_steps; ++s) {
        const double t = plan.t0 + static_cast<double>(s) * plan.h;
        const double t_next = std::min(plan.t0 + static_cast<double>(s + 1) * plan.h, plan.t_end);
        const double h = t_next - t;
        bool n1 = false, n2 = false, n3 = false, n4 = false;
        const double k1 = vel(q, t, n1);
        const double k2 = vel(q + 0.5 * h * k1, t + 0.5 * h, n2);
        const double k3 = vel(q + 0.5 * h * k2, t + 0.5 * h, n3);
        const double k4 = vel(q + h * k3, t_next, n4);
        events += static_cast<std::uint32_t>(n1) + n2 + n3 + n4;
        q += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        if (grid.periodic()) {
            q = grid.wrap(q);
        } else if (q < grid.x_min() || q > grid.x_max()) {
            q = std::clamp(q, grid.x_min(), grid.x_max());
            wall = true;
        }
        if ((s + 1) % opts.record_every == 0 || s + 1 == plan.n_steps) row[k++] = q;
    }
    flagged = (wall || events > opts.max_node_events) ? 1 : 0;
}

}  // namespace

TrajectoryEnsemble integrate_trajectories(const FlowTimeline& timeline, std::span<const double> q0,
                                          const IntegratorOptions& opts) {
    if (q0.empty()) throw PreconditionError("need at least one initial position");
    if (opts.record_every == 0) throw PreconditionError("record_every must be >= 1");
    const Grid1D& grid = timeline.grid;
    for (double q : q0)
        if (!std::isfinite(q) || !grid.contains(q))
            throw PreconditionError("initial position " + std::to_string(q) + " lies outside the grid");
    const StepPlan plan = plan_steps(timeline, opts);

    TrajectoryEnsemble ens;
    ens.seed = opts.seed;
    ens.times.push_back(plan.t0);
    for (std::size_t s = 0; s < plan.n_steps; ++s)
        if ((s + 1) % opts.record_every == 0 || s + 1 == plan.n_steps)
            ens.times.push_back(std::min(plan.t0 + static_cast<double>(s + 1) * plan.h, plan.t_end));
    const std::size_t m = q0.size();
    const std::size_t nt = ens.times.size();
    ens.positions.assign(m * nt, 0.0);
    ens.node_events.assign(m, 0);
    ens.flagged.assign(m, 0);

    const VelocityInterpolator vel(timeline);
    const auto mm = static_cast<std::ptrdiff_t>(m);
    if (opts.execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t i = 0; i < mm; ++i) {
            const auto u = static_cast<std::size_t>(i);
            integrate_one(vel, grid, plan, opts, q0[u], std::span<double>(ens.positions).subspan(u * nt, nt),
                          ens.node_events[u], ens.flagged[u]);
        }
    } else {
        for (std::size_t u = 0; u < m; ++u)
            integrate_one(vel, grid, plan, opts, q0[u], std::span<double>(ens.positions).subspan(u * nt, nt),
                          ens.node_events[u], ens.flagged[u]);
    }
    return ens;
}

std::size_t ordering_violations(const TrajectoryEnsemble& ens) {
    const std::size_t m = ens.n_trajectories();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < m; ++i)
        if (!ens.flagged[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ens.at(a, 0) < ens.at(b, 0); });
    std::size_t bad = 0;
    for (std::size_t p = 1; p < order.size(); ++p) {
        const std::size_t a = order[p - 1], b = order[p];
        if (!(ens.at(a, 0) < ens.at(b, 0))) continue;  // identical starts carry no ordering
        for (std::size_t k = 1; k < ens.n_times(); ++k)
            if (!(ens.at(a, k) < ens.at(b, k))) {
                ++bad;
                break;
            }
    }
    return bad;
}

}  // namespace pilotwave
