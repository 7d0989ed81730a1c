#pragma once

#include <cstdint>
#include <vector>

#include "pilotwave/guidance.hpp"

namespace pilotwave {

/// c1 psi1 (x) Phi1 + c2 psi2 (x) Phi2 over the pointer coordinate y. The system
/// states psi_a are eigenvectors of S with eigenvalues s_1 = +1, s_2 = -1 and
/// are orthogonal, so the state is the pair of weighted pointer branches.
/// Each component carries its coefficient: int |component_a|^2 dy = |c_a|^2.
struct BranchedState {
    Grid1D pointer_grid;
    std::vector<cplx> component1;
    std::vector<cplx> component2;
    cplx c1{1.0, 0.0};
    cplx c2{0.0, 0.0};
    double coupling = 1.0;       ///< g in H = g S (x) p
    double pointer_mass = 100.0; ///< free pointer kinetic term p^2 / 2M
    double hbar = 1.0;
    double time = 0.0;
};

/// Ready state Phi0 (gaussian of width pointer_sigma at y = 0) times (c1, c2).
/// |c1|^2 + |c2|^2 must equal 1 within 1e-10.
BranchedState make_branched_state(const Grid1D& pointer_grid, cplx c1, cplx c2, double pointer_sigma,
                                  double coupling, double pointer_mass = 100.0, double hbar = 1.0);

/// Exact evolution under H = p^2/2M + g S (x) p, diagonal in pointer momentum.
/// Snapshots at 0, dt, 2dt, ..., T. Throws DomainError when a branch reaches
/// the outer sixteenth of the pointer grid with more than 1e-8 of its mass.
std::vector<BranchedState> evolve_measurement(const BranchedState& state, double duration, double dt);

/// int min(rho1, rho2) dy / min(|c1|^2, |c2|^2); 0 when a coefficient vanishes.
double branch_overlap(const BranchedState& state);

/// |<Phi1|Phi2>|^2 of the normalised pointer branches; 0 when a coefficient vanishes.
double pointer_inner_overlap(const BranchedState& state);

/// Two-component guidance velocity over y:
/// v = sum_a [(hbar/M) Im(phi_a* phi_a') + g s_a |phi_a|^2] / sum_a |phi_a|^2.
VelocityField measurement_velocity(const BranchedState& state, double node_eps = 0.0);

/// Velocity generated by one branch alone (branch = 1 or 2).
VelocityField branch_velocity(const BranchedState& state, int branch, double node_eps = 0.0);

struct MeasurementTimeline {
    std::vector<BranchedState> states;
    FlowTimeline flow;
    std::vector<std::vector<double>> rho1;
    std::vector<std::vector<double>> rho2;
    std::vector<double> overlap;
};

MeasurementTimeline make_measurement_timeline(std::vector<BranchedState> states);

struct OutcomeRecord {
    std::size_t trajectory_id = 0;
    int outcome = 0;            ///< 1, 2, or 0 when undecided at the final time
    double final_pointer = 0.0;
    double decided_at = -1.0;
    double initial_pointer = 0.0;
};

struct MeasurementSummary {
    std::vector<OutcomeRecord> records;
    std::size_t count1 = 0;
    std::size_t count2 = 0;
    std::size_t undecided = 0;
    std::size_t permanence_violations = 0;
    double weight1 = 0.0;        ///< |c1|^2
    double frequency1 = 0.0;     ///< count1 / M
    double band = 0.0;           ///< 3 sqrt(|c1|^2 |c2|^2 / M)
    bool born_pass = false;
    bool undecided_pass = false;
    TrajectoryEnsemble ensemble;
};

/// Samples M pointer beables from |Phi0|^2, guides them through the timeline
/// and assigns an outcome once the branch overlap drops below collapse_eps and
/// the beable sits where the other branch's density is below collapse_eps
/// times its own.
MeasurementSummary run_measurement_ensemble(const MeasurementTimeline& timeline, std::size_t m, std::uint64_t seed,
                                            double collapse_eps = 1e-6, Execution exec = Execution::parallel);

/// Same, from explicit initial pointer positions.
MeasurementSummary run_measurement_ensemble(const MeasurementTimeline& timeline, std::span<const double> q0,
                                            std::uint64_t seed, double collapse_eps = 1e-6,
                                            Execution exec = Execution::parallel);

/// |v_full(Q) - v_occupied(Q)| / (|v_occupied(Q)| + v_floor). Requires the
/// branch overlap below collapse_eps and Q outside the residual overlap
/// region (other-branch density at most collapse_eps of the occupied one);
/// otherwise PreconditionError.
double dynamical_irrelevance_check(const BranchedState& state, double q, double collapse_eps = 1e-6,
                                   double v_floor = 1e-9);

}  // namespace pilotwave
