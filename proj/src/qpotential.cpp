#include "pilotwave/qpotential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pilotwave/errors.hpp"
#include "pilotwave/guidance.hpp"

namespace pilotwave {
namespace {

double wrap_pi(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return a - two_pi * std::round(a / two_pi);
}

}  // namespace

PolarFields polar_decompose(const GridWavefunction& psi, double node_eps) {
    const std::size_t n = psi.size();
    const auto rho = density(psi);
    if (node_eps <= 0.0) node_eps = default_node_eps(rho);
    PolarFields out{psi.grid, std::vector<double>(n), std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        out.R[i] = std::abs(psi.amplitudes[i]);
        out.node_mask[i] = (rho[i] < node_eps || rho[i] == 0.0) ? 1 : 0;
    }
    std::size_t i = 0;
    while (i < n) {
        if (out.node_mask[i]) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < n && !out.node_mask[end]) ++end;
        std::size_t anchor = i;
        for (std::size_t k = i; k < end; ++k)
            if (rho[k] > rho[anchor]) anchor = k;
        std::vector<double>& s = out.S;
        s[anchor] = std::arg(psi.amplitudes[anchor]);
        for (std::size_t k = anchor + 1; k < end; ++k)
            s[k] = s[k - 1] + wrap_pi(std::arg(psi.amplitudes[k]) - std::arg(psi.amplitudes[k - 1]));
        for (std::size_t k = anchor; k-- > i;)
            s[k] = s[k + 1] + wrap_pi(std::arg(psi.amplitudes[k]) - std::arg(psi.amplitudes[k + 1]));
        i = end;
    }
    for (auto& s : out.S) s *= psi.hbar;
    return out;
}

std::vector<double> phase_gradient_velocity(const PolarFields& polar, double mass) {
    const std::size_t n = polar.S.size();
    std::vector<double> v(n, 0.0);
    const double h = polar.grid.dx();
    auto live = [&](std::size_t k) { return !polar.node_mask[k]; };
    for (std::size_t i = 0; i < n; ++i) {
        if (!live(i)) continue;
        const bool l = i > 0 && live(i - 1);
        const bool r = i + 1 < n && live(i + 1);
        if (l && r) v[i] = (polar.S[i + 1] - polar.S[i - 1]) / (2.0 * h);
        else if (r) v[i] = (polar.S[i + 1] - polar.S[i]) / h;
        else if (l) v[i] = (polar.S[i] - polar.S[i - 1]) / h;
        v[i] /= mass;
    }
    return v;
}

std::vector<double> quantum_potential(const GridWavefunction& psi, double node_eps) {
    const std::size_t n = psi.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(psi.amplitudes[i]);
    const auto rho = density(psi);
    if (node_eps <= 0.0) node_eps = default_node_eps(rho);
    const auto r2 = second_derivative(psi.grid, r, Parity::odd);
    std::vector<double> q(n, 0.0);
    const double scale = -psi.hbar * psi.hbar / (2.0 * psi.mass);
    for (std::size_t i = 0; i < n; ++i)
        if (rho[i] >= node_eps && r[i] > 0.0) q[i] = scale * r2[i] / r[i];
    return q;
}

HjResidual hj_residual(std::span<const GridWavefunction> timeline, std::size_t index, const Potential& v) {
    if (timeline.size() < 3 || index == 0 || index + 1 >= timeline.size())
        throw PreconditionError("HJ residual needs snapshots on both sides of the probe time");
    const auto& prev = timeline[index - 1];
    const auto& cur = timeline[index];
    const auto& next = timeline[index + 1];
    const double h_back = cur.time - prev.time;
    const double h_fwd = next.time - cur.time;
    if (!(h_back > 0.0) || std::abs(h_back - h_fwd) > 1e-9 * std::max(h_back, h_fwd))
        throw PreconditionError("HJ residual needs uniformly spaced snapshots");
    const std::size_t n = cur.size();
    if (v.values.size() != n) throw PreconditionError("potential size does not match grid");

    const auto rho = density(cur);
    const double peak = *std::max_element(rho.begin(), rho.end());
    const auto j = probability_current(cur);
    const auto q = quantum_potential(cur, 1e-3 * peak);

    HjResidual out{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        if (!(rho[i] > 1e-3 * peak)) continue;
        out.bulk[i] = 1;
        const double ds_dt = cur.hbar * std::arg(next.amplitudes[i] * std::conj(prev.amplitudes[i])) / (2.0 * h_fwd);
        const double grad_s = cur.mass * j[i] / rho[i];
        const double res = ds_dt + grad_s * grad_s / (2.0 * cur.mass) + v.values[i] + q[i];
        out.residual[i] = res;
        out.max_abs = std::max(out.max_abs, std::abs(res));
    }
    return out;
}

HjResidual hj_residual(std::span<const GridWavefunction> timeline, double t, const Potential& v) {
    for (std::size_t k = 0; k < timeline.size(); ++k)
        if (std::abs(timeline[k].time - t) <= 1e-9 * std::max(1.0, std::abs(t))) return hj_residual(timeline, k, v);
    throw PreconditionError("no snapshot at t = " + std::to_string(t));
}

}  // namespace pilotwave
