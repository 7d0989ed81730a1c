#include "pilotwave/wavefunction.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pilotwave/errors.hpp"

namespace pilotwave {

Potential Potential::zero(const Grid1D& grid) { return Potential{std::vector<double>(grid.size(), 0.0)}; }

Potential Potential::sampled(const Grid1D& grid, const std::function<double(double)>& v) {
    Potential p{std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        p.values[i] = v(grid.x(i));
        if (!std::isfinite(p.values[i]))
            throw PreconditionError("potential is not finite at x = " + std::to_string(grid.x(i)));
    }
    return p;
}

Potential Potential::harmonic(const Grid1D& grid, double mass, double omega, double x0) {
    return sampled(grid, [=](double x) { return 0.5 * mass * omega * omega * (x - x0) * (x - x0); });
}

double squared_norm(const GridWavefunction& psi) {
    double s = 0.0;
    for (const auto& a : psi.amplitudes) s += std::norm(a);
    return s * psi.grid.dx();
}

void normalize(GridWavefunction& psi) {
    const double n2 = squared_norm(psi);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError("cannot normalise a zero or non-finite state");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amplitudes) a *= scale;
}

GridWavefunction init_gaussian(const Grid1D& grid, double x0, double sigma, double k0, double mass,
                               double hbar) {
    if (!(sigma >= 4.0 * grid.dx()))
        throw ResolutionError("gaussian sigma " + std::to_string(sigma) + " is below 4 dx = " +
                              std::to_string(4.0 * grid.dx()));
    const double s = std::sqrt(2.0) * sigma;
    const double outside = 0.5 * std::erfc((x0 - grid.x_min()) / s) +
                           0.5 * std::erfc((grid.x_max() - x0) / s);
    if (outside > 1e-8)
        throw DomainError("gaussian packet clipped by the domain: mass outside = " +
                          std::to_string(outside));
    GridWavefunction psi{grid, std::vector<cplx>(grid.size()), mass, hbar, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const double u = x - x0;
        psi.amplitudes[i] = std::exp(-u * u / (4.0 * sigma * sigma)) * std::polar(1.0, k0 * x);
    }
    normalize(psi);
    return psi;
}

GridWavefunction plane_wave(const Grid1D& grid, double k, cplx amplitude, double mass, double hbar) {
    GridWavefunction psi{grid, std::vector<cplx>(grid.size()), mass, hbar, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) psi.amplitudes[i] = amplitude * std::polar(1.0, k * grid.x(i));
    return psi;
}

GridWavefunction ho_ground_state(const Grid1D& grid, double omega, double mass, double hbar) {
    const double a = mass * omega / hbar;
    const double norm = std::pow(a / std::numbers::pi, 0.25);
    GridWavefunction psi{grid, std::vector<cplx>(grid.size()), mass, hbar, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        psi.amplitudes[i] = norm * std::exp(-0.5 * a * x * x);
    }
    return psi;
}

std::vector<double> density(const GridWavefunction& psi) {
    std::vector<double> rho(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi.amplitudes[i]);
    return rho;
}

std::vector<double> kinetic_current(const Grid1D& grid, std::span<const cplx> amplitudes, double mass,
                                    double hbar) {
    const auto dpsi = first_derivative(grid, amplitudes);
    std::vector<double> j(amplitudes.size());
    const double scale = hbar / mass;
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
        j[i] = scale * (std::conj(amplitudes[i]) * dpsi[i]).imag();
    return j;
}

std::vector<double> probability_current(const GridWavefunction& psi) {
    return kinetic_current(psi.grid, psi.amplitudes, psi.mass, psi.hbar);
}

}  // namespace pilotwave
