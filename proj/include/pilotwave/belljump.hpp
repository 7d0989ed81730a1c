#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "pilotwave/guidance.hpp"

namespace pilotwave {

/// Fermion-number configuration (F(1), ..., F(L)).
struct BeableConfig {
    std::vector<int> occupation;
    auto operator<=>(const BeableConfig&) const = default;
    std::string label() const;  ///< e.g. "101"; multi-digit counts are dot-separated
};

struct BasisLabel {
    BeableConfig n;
    int q = 0;
};

/// Basis |n, q> of a finite Hilbert space partitioned into configuration blocks.
/// Configurations are indexed in order of first appearance.
class FockBasis {
public:
    explicit FockBasis(std::vector<BasisLabel> labels);

    std::size_t dim() const noexcept { return labels_.size(); }
    std::size_t n_configs() const noexcept { return configs_.size(); }
    const BasisLabel& label(std::size_t i) const { return labels_.at(i); }
    const BeableConfig& config(std::size_t c) const { return configs_.at(c); }
    std::size_t block_of(std::size_t basis_state) const { return block_of_.at(basis_state); }
    const std::vector<std::size_t>& block(std::size_t c) const { return blocks_.at(c); }
    std::size_t config_index(const BeableConfig& n) const;

private:
    std::vector<BasisLabel> labels_;
    std::vector<BeableConfig> configs_;
    std::vector<std::size_t> block_of_;
    std::vector<std::vector<std::size_t>> blocks_;
};

/// State vector plus Hamiltonian (hbar = 1).
struct QuantumState {
    Eigen::VectorXcd amplitudes;
    Eigen::MatrixXcd hamiltonian;
};

/// Checks unit norm (1e-12) and hermiticity (1e-12); throws PreconditionError.
void validate(const QuantumState& state, const FockBasis& basis);

/// psi(t) = U exp(-i E t) U^dagger psi(0) from one dense eigendecomposition.
class ExactEvolution {
public:
    explicit ExactEvolution(const QuantumState& state);
    Eigen::VectorXcd at(double t) const;
    const Eigen::VectorXd& energies() const noexcept { return energies_; }
    const Eigen::MatrixXcd& hamiltonian() const noexcept { return hamiltonian_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(energies_.size()); }

private:
    Eigen::MatrixXcd hamiltonian_;
    Eigen::MatrixXcd vectors_;
    Eigen::VectorXd energies_;
    Eigen::VectorXcd coefficients_;  // U^dagger psi(0)
};

/// P_n = sum_q |<n,q|psi>|^2.
Eigen::VectorXd marginal_P(const Eigen::VectorXcd& psi, const FockBasis& basis);

/// J_nm = sum_{q,p} 2 Re <psi|n,q><n,q| -iH |m,p><m,p|psi>; dP_n/dt = sum_m J_nm.
Eigen::MatrixXd current_J(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& h, const FockBasis& basis);

inline constexpr double default_rate_floor = 1e-12;

/// T_nm = J_nm / P_m if J_nm > 0 and P_m > rate_floor, else 0. The diagonal is
/// left at zero; the stay probability follows from normalisation.
Eigen::MatrixXd jump_rates(const Eigen::VectorXd& p, const Eigen::MatrixXd& j, double rate_floor = default_rate_floor);

/// T_nn dt = 1 - sum_{m != n} T_mn dt.
double stay_probability(const Eigen::MatrixXd& rates, std::size_t n, double dt);

/// Rate matrices on a shared adaptive time mesh. Step sizes satisfy
/// dt <= dt_max, (max exit rate) dt <= 0.1 at the start of a step and <= 0.2 at its end.
struct RateTable {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> rates;      ///< T(t) per mesh point
    std::vector<Eigen::VectorXd> exit_rate;  ///< column sums of T per mesh point
    double rate_floor = default_rate_floor;
};

RateTable build_rate_table(const ExactEvolution& evo, const FockBasis& basis, double t_end, double dt_max = 0.01,
                           double rate_floor = default_rate_floor);

struct JumpEvent {
    double time = 0.0;
    std::size_t from = 0;  ///< configuration indices into the FockBasis
    std::size_t to = 0;
};

struct JumpTrajectory {
    std::size_t initial = 0;
    std::vector<JumpEvent> events;
    std::uint64_t seed = 0;
    std::size_t run_id = 0;

    /// Configuration occupied at time t (events at exactly t have happened).
    std::size_t config_at(double t) const;
};

/// One path of the jump process on [0, t_end] from configuration n0.
/// Waiting times invert the integrated exit rate (trapezoid on the mesh, exact
/// quadratic root inside the final step); targets are drawn from the
/// interpolated rate column at the jump time.
JumpTrajectory simulate_jump_process(const RateTable& table, std::size_t n0, double t_end, std::uint64_t seed,
                                     std::size_t run_id = 0);

/// Convenience form: builds the evolution and rate table first.
JumpTrajectory simulate_jump_process(const QuantumState& state0, const FockBasis& basis, const BeableConfig& n0,
                                     double t_end, std::uint64_t seed, double dt_max = 0.01);

/// M runs with n0 drawn from P_n(0) using the run's own stream.
std::vector<JumpTrajectory> simulate_jump_ensemble(const RateTable& table, const Eigen::VectorXd& p0, std::size_t m,
                                                   double t_end, std::uint64_t seed,
                                                   Execution exec = Execution::parallel);

struct OccupationCheck {
    double t = 0.0;
    Eigen::VectorXd empirical;
    Eigen::VectorXd exact;
    double total_variation = 0.0;
    double band = 0.0;  ///< (3/2) sum_n sqrt(P_n (1 - P_n) / M)
    bool pass = false;
};

/// Total-variation distance between empirical configuration frequencies and
/// P_n(t) at each probe time, against the summed 3-sigma multinomial band.
std::vector<OccupationCheck> ensemble_vs_marginal(const std::vector<JumpTrajectory>& ensemble,
                                                  const ExactEvolution& evo, const FockBasis& basis,
                                                  const std::vector<double>& probe_times);

struct BellModel {
    std::string name;
    FockBasis basis;
    QuantumState state;
};

/// H = sigma_x on {|0>, |1>}, one site, psi(0) = |0>.
BellModel two_level_model();

/// Three-site open chain of spinless fermions (Jordan-Wigner) with hopping,
/// nearest-neighbour pair creation/annihilation and site energies, plus an
/// auxiliary two-level mode coupled to site 1 that supplies the extra quantum
/// number q. dim = 16, eight configurations.
BellModel fermion_chain_model();

}  // namespace pilotwave
