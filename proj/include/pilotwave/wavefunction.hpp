#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "pilotwave/differentiate.hpp"
#include "pilotwave/grid.hpp"

namespace pilotwave {

/// Complex amplitudes on a grid plus the physical constants needed to
/// interpret them. Units default to hbar = m = 1.
struct GridWavefunction {
    Grid1D grid;
    std::vector<cplx> amplitudes;
    double mass = 1.0;
    double hbar = 1.0;
    double time = 0.0;

    std::size_t size() const noexcept { return amplitudes.size(); }
};

/// Real potential sampled on the grid.
struct Potential {
    std::vector<double> values;

    static Potential zero(const Grid1D& grid);
    static Potential sampled(const Grid1D& grid, const std::function<double(double)>& v);
    static Potential harmonic(const Grid1D& grid, double mass, double omega, double x0 = 0.0);
};

double squared_norm(const GridWavefunction& psi);
void normalize(GridWavefunction& psi);

/// psi(x) ~ exp(-(x-x0)^2 / (4 sigma^2)) exp(i k0 x), L2-normalised on the grid.
/// Throws ResolutionError if sigma < 4 dx and DomainError if more than 1e-8
/// of the analytic packet mass lies outside the domain.
GridWavefunction init_gaussian(const Grid1D& grid, double x0, double sigma, double k0,
                               double mass = 1.0, double hbar = 1.0);

/// amplitude * exp(i k x). Periodic grids need k = 2 pi n / L for a smooth wave.
GridWavefunction plane_wave(const Grid1D& grid, double k, cplx amplitude, double mass = 1.0,
                            double hbar = 1.0);

/// Harmonic-oscillator ground state (m omega / pi hbar)^(1/4) exp(-m omega x^2 / 2 hbar).
GridWavefunction ho_ground_state(const Grid1D& grid, double omega, double mass = 1.0,
                                 double hbar = 1.0);

std::vector<double> density(const GridWavefunction& psi);

/// j = (hbar / m) Im(psi* d psi / dx), eighth-order centred derivative.
std::vector<double> probability_current(const GridWavefunction& psi);

/// Same current for a bare amplitude array; used by multi-component states.
std::vector<double> kinetic_current(const Grid1D& grid, std::span<const cplx> amplitudes,
                                    double mass, double hbar);

}  // namespace pilotwave
