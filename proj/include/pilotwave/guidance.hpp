#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

/// Beable velocity on the grid. Cells where the density falls below the node
/// threshold are masked and carry no meaningful velocity.
struct VelocityField {
    Grid1D grid;
    std::vector<double> v;
    std::vector<std::uint8_t> node_mask;
};

/// Default node threshold: 1e-12 of the peak density.
double default_node_eps(std::span<const double> rho);

/// v = j / rho off the node mask. node_eps <= 0 selects default_node_eps.
VelocityField velocity_field(const GridWavefunction& psi, double node_eps = 0.0);

/// Builds a masked velocity field from a current and a density.
VelocityField velocity_from_current(const Grid1D& grid, std::span<const double> j,
                                    std::span<const double> rho, double node_eps);

/// Two-component (Pauli) state in one spatial dimension with a vector potential.
struct SpinorWavefunction {
    Grid1D grid;
    std::vector<cplx> psi1;
    std::vector<cplx> psi2;
    std::vector<double> vector_potential;
    double charge = 1.0;
    double mass = 1.0;
    double c = 1.0;
    double hbar = 1.0;
};

double squared_norm(const SpinorWavefunction& s);

/// j = sum_a [(hbar/m) Im(psi_a* d psi_a) - (e/mc) A |psi_a|^2],  v = j / sum_a |psi_a|^2.
VelocityField pauli_velocity(const SpinorWavefunction& spinor, double node_eps = 0.0);

/// Immutable density/velocity history consumed by trajectory integration and
/// the equivariance statistics. Entries share one grid; times strictly increase.
struct FlowTimeline {
    Grid1D grid;
    std::vector<double> times;
    std::vector<std::vector<double>> density;
    std::vector<VelocityField> velocity;

    std::size_t size() const noexcept { return times.size(); }
    /// Index of the snapshot at time t (within 1e-9 relative), or throws PreconditionError.
    std::size_t index_of(double t) const;
};

FlowTimeline make_timeline(std::span<const GridWavefunction> snapshots, double node_eps = 0.0);

/// Appends one snapshot; time must exceed the last one.
void append_snapshot(FlowTimeline& tl, double t, std::vector<double> rho, VelocityField v);

enum class Execution { serial, parallel };

struct IntegratorOptions {
    double step = 0.0;                 ///< RK4 step; 0 selects twice the first snapshot spacing
    std::size_t record_every = 1;      ///< record positions every n RK4 steps
    double t_end = -1.0;               ///< < 0 integrates to the last snapshot
    std::size_t max_node_events = 100; ///< flag a trajectory above this many guard activations
    std::uint64_t seed = 0;            ///< seed of the initial sampling, carried through
    Execution execution = Execution::parallel;
};

/// M trajectories sampled at shared output times. positions is row-major M x T.
struct TrajectoryEnsemble {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<std::uint32_t> node_events;
    std::vector<std::uint8_t> flagged;  ///< node-guard saturation or wall contact
    std::uint64_t seed = 0;

    std::size_t n_trajectories() const noexcept { return node_events.size(); }
    std::size_t n_times() const noexcept { return times.size(); }
    double at(std::size_t trajectory, std::size_t time_index) const noexcept {
        return positions[trajectory * times.size() + time_index];
    }
    std::vector<double> column(std::size_t time_index) const;
    std::size_t flagged_count() const noexcept;
};

/// Evaluates the guided velocity at (x, t): cubic Lagrange interpolation in
/// space on the guarded field, linear interpolation between snapshots.
class VelocityInterpolator {
public:
    explicit VelocityInterpolator(const FlowTimeline& timeline);

    /// Returns v(x, t); sets `hit_node` when x lies in a masked cell.
    double operator()(double x, double t, bool& hit_node) const;

private:
    double spatial(std::size_t snapshot, double x, bool& hit_node) const;
    const FlowTimeline* tl_;
    std::vector<std::vector<double>> guarded_;  // masked cells filled from the nearest live cell
};

/// Integrates dQ/dt = v(Q, t) with classical RK4 from the first snapshot.
/// Trajectories leaving a reflecting grid are clamped and flagged; periodic
/// grids wrap positions.
TrajectoryEnsemble integrate_trajectories(const FlowTimeline& timeline, std::span<const double> q0,
                                          const IntegratorOptions& opts = {});

/// Counts adjacent pairs (in initial order) that fail to keep strict order at any
/// recorded time, ignoring flagged trajectories.
std::size_t ordering_violations(const TrajectoryEnsemble& ens);

}  // namespace pilotwave
