#pragma once

#include <memory>
#include <vector>

#include "pilotwave/guidance.hpp"

namespace pilotwave {

/// 1+1D Dirac spinor in the representation alpha = sigma_1, beta = sigma_3,
/// hbar = 1: H = c sigma_1 p + sigma_3 m c^2.
struct DiracSpinor {
    Grid1D grid;
    std::vector<cplx> psi1;
    std::vector<cplx> psi2;
    double mass = 1.0;
    double c = 1.0;
    double time = 0.0;
};

double squared_norm(const DiracSpinor& s);
std::vector<double> dirac_density(const DiracSpinor& s);
/// c psi^dagger alpha psi.
std::vector<double> dirac_current(const DiracSpinor& s);

/// Positive-energy eigen-spinor of momentum k (periodic grid: k = 2 pi n / L), unit norm.
DiracSpinor positive_energy_plane_wave(const Grid1D& grid, double k, double mass, double c);

/// Gaussian packet built from positive-energy spinors only, unit norm.
DiracSpinor positive_energy_packet(const Grid1D& grid, double x0, double sigma, double k0, double mass, double c);

/// E(p) = sqrt(p^2 c^2 + m^2 c^4).
double dirac_energy(double p, double mass, double c);

/// Strang split step: half mass rotation in position space, kinetic rotation
/// exp(-i c k dt sigma_1) in momentum space, half mass rotation. Requires a
/// periodic grid and c dt <= dx.
class DiracStepper {
public:
    DiracStepper(const Grid1D& grid, double mass, double c, double dt);
    ~DiracStepper();
    DiracStepper(DiracStepper&&) noexcept;
    DiracStepper& operator=(DiracStepper&&) noexcept;

    double dt() const noexcept;
    void step_in_place(DiracSpinor& psi);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

DiracSpinor dirac_step(const DiracSpinor& psi, double dt);

/// v = c psi^dagger sigma_1 psi / psi^dagger psi off the node mask. The ratio is
/// clamped to [-1, 1] (round-off only), so |v| <= c holds exactly.
VelocityField dirac_velocity(const DiracSpinor& psi, double node_eps = 0.0);

struct DiracTimeline {
    std::vector<DiracSpinor> snapshots;
    FlowTimeline flow;
};

DiracTimeline evolve_dirac_timeline(const DiracSpinor& psi0, double dt, std::size_t n_steps,
                                    std::size_t save_every = 1);

}  // namespace pilotwave
