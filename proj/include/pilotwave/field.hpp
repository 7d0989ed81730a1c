#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace pilotwave {

/// Normal modes of the periodic lattice Hamiltonian
///   H = sum_x dx [ pi_x^2 / 2 + ((phi_{x+1} - phi_x)/dx)^2 / 2 + m^2 phi_x^2 / 2 ],
/// pi_x = -i (1/dx) d/dphi_x, hbar = c = 1. Column j of `basis` is mode j;
/// phi = basis * q. Mode j is a harmonic oscillator of mass dx and frequency
/// omega_j^2 = m^2 + (2/dx)^2 sin^2(pi j / n).
struct LatticeModes {
    std::size_t n_sites = 0;
    double dx = 1.0;
    double mass_param = 0.0;
    Eigen::MatrixXd basis;
    std::vector<double> omega;
    std::vector<std::uint8_t> zero_mode;  ///< omega == 0: frozen, excluded from dynamics and statistics
};

LatticeModes lattice_modes(std::size_t n_sites, double dx, double mass_param);

/// Per-mode gaussian factor
///   psi(q) = (2 Re A / pi)^(1/4) exp(-A (q - q_c)^2 + i p_c (q - q_c) + i phase),
/// with A = width * mode_mass * omega / 2. width = 1 is the coherent family;
/// real width != 1 is squeezed.
struct GaussianMode {
    double omega = 1.0;
    double mode_mass = 1.0;
    std::complex<double> width{1.0, 0.0};
    double q_center = 0.0;
    double p_center = 0.0;
    double phase = 0.0;
    bool frozen = false;

    std::complex<double> width_coefficient() const { return width * (0.5 * mode_mass * omega); }
    /// Coherent amplitude alpha = sqrt(M omega / 2) (q_c + i p_c / (M omega)).
    std::complex<double> coherent_amplitude() const;
    std::complex<double> amplitude(double q) const;
    /// Bohmian mode velocity (1/M) dS/dq = (p_c - 2 Im A (q - q_c)) / M.
    double velocity(double q) const;
    double position_variance() const { return 0.25 / width_coefficient().real(); }
};

/// Gaussian wavefunctional: a product of independent mode factors.
struct GaussianWavefunctional {
    LatticeModes modes;
    std::vector<GaussianMode> factors;
    double time = 0.0;
};

GaussianWavefunctional ground_state(const LatticeModes& modes);
/// Coherent state with amplitudes alpha_k (zero modes ignored).
GaussianWavefunctional coherent_state(const LatticeModes& modes, const std::vector<std::complex<double>>& alpha);
/// Centred squeezed state with real width factors (1 = ground width).
GaussianWavefunctional squeezed_state(const LatticeModes& modes, const std::vector<double>& width);

/// Closed-form evolution of a single mode by time t.
GaussianMode evolve_mode(const GaussianMode& mode, double t);

/// Exact evolution of every mode by t; the returned state's time is state.time + t.
GaussianWavefunctional evolve_wavefunctional(const GaussianWavefunctional& state, double t);

/// Field beable configuration phi(x) on the lattice.
struct LatticeField {
    std::size_t n_sites = 0;
    double dx = 1.0;
    double mass_param = 0.0;
    std::vector<double> phi;
};

Eigen::VectorXd to_modes(const LatticeModes& modes, const std::vector<double>& phi);
std::vector<double> to_sites(const LatticeModes& modes, const Eigen::VectorXd& q);

/// One RK4 step of dphi/dt = delta S / delta phi in mode coordinates, with the
/// wavefunctional evaluated exactly at the stage times. The site update is
/// phi + basis * dq, so a zero velocity leaves phi bit-identical.
LatticeField field_guidance_step(const LatticeField& beable, const GaussianWavefunctional& state, double dt);

/// Equilibrium configurations: independent normal draws per live mode.
std::vector<LatticeField> sample_field_beables(const GaussianWavefunctional& state, std::size_t m,
                                               std::uint64_t seed);

}  // namespace pilotwave
