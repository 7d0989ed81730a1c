#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

/// psi = R exp(i S / hbar). S is unwrapped along each node-free segment,
/// starting from the segment's density maximum; masked cells hold S = 0.
struct PolarFields {
    Grid1D grid;
    std::vector<double> R;
    std::vector<double> S;
    std::vector<std::uint8_t> node_mask;
};

PolarFields polar_decompose(const GridWavefunction& psi, double node_eps = 0.0);

/// dS/dx / m from the unwrapped phase (centred differences inside each
/// node-free segment). Cross-check for the j/rho velocity only.
std::vector<double> phase_gradient_velocity(const PolarFields& polar, double mass);

/// Q = -hbar^2 R'' / (2 m R); zero on masked cells.
std::vector<double> quantum_potential(const GridWavefunction& psi, double node_eps = 0.0);

struct HjResidual {
    std::vector<double> residual;      ///< dS/dt + (dS/dx)^2/2m + V + Q, zero outside the bulk
    std::vector<std::uint8_t> bulk;    ///< cells with rho > 1e-3 max rho
    double max_abs = 0.0;              ///< max over the bulk
};

/// Quantum Hamilton-Jacobi residual at snapshot `index` of a uniformly spaced
/// timeline. dS/dt comes from the phase of psi(t+h) conj(psi(t-h)), so no
/// temporal unwrapping is needed. Needs a snapshot on each side.
HjResidual hj_residual(std::span<const GridWavefunction> timeline, std::size_t index, const Potential& v);

/// Looks up the snapshot at time t; throws PreconditionError without a bracketing pair.
HjResidual hj_residual(std::span<const GridWavefunction> timeline, double t, const Potential& v);

}  // namespace pilotwave
