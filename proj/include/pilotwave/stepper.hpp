#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

enum class Scheme { split_operator, crank_nicolson };
std::string_view to_string(Scheme s);

/// Default step 0.1 m dx^2 / hbar.
double default_dt(const Grid1D& grid, double mass, double hbar);

/// Unitary Schrodinger propagator for a fixed grid, potential and step.
/// Periodic grids use Strang-split spectral stepping (FFTW); reflecting grids
/// use Crank-Nicolson with a tridiagonal Laplacian. Every step is checked:
/// non-finite output or a relative norm drift above `max_norm_drift` raises
/// NumericalError.
class SchrodingerStepper {
public:
    static constexpr double max_norm_drift = 1e-10;

    SchrodingerStepper(const Grid1D& grid, Potential potential, double dt, double mass = 1.0,
                       double hbar = 1.0);
    ~SchrodingerStepper();
    SchrodingerStepper(SchrodingerStepper&&) noexcept;
    SchrodingerStepper& operator=(SchrodingerStepper&&) noexcept;

    Scheme scheme() const noexcept;
    double dt() const noexcept;

    /// Returns psi(t + dt). dt == 0 is the identity.
    GridWavefunction step(const GridWavefunction& psi);
    void step_in_place(GridWavefunction& psi);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper; builds a stepper per call.
GridWavefunction step_schrodinger(const GridWavefunction& psi, const Potential& v, double dt);

/// Snapshots at t0, t0 + save_every*dt, ... (n_steps / save_every + 1 entries).
std::vector<GridWavefunction> evolve_timeline(const GridWavefunction& psi0, const Potential& v,
                                              double dt, std::size_t n_steps,
                                              std::size_t save_every = 1);

}  // namespace pilotwave
