#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pilotwave/guidance.hpp"

namespace pilotwave {

struct SampleSet {
    std::vector<double> positions;
    double source_time = 0.0;
    std::uint64_t seed = 0;
};

/// M iid draws from the piecewise-constant density rho*dx: inverse CDF over the
/// cells plus uniform jitter inside the chosen cell. Deterministic in seed.
SampleSet sample_density(const Grid1D& grid, std::span<const double> rho, std::size_t m, std::uint64_t seed,
                         double source_time = 0.0);

/// As above for |psi|^2. Throws PreconditionError if |norm^2 - 1| > 1e-6.
SampleSet sample_density(const GridWavefunction& psi, std::size_t m, std::uint64_t seed);

/// CDF of the piecewise-constant density on the grid (normalised to its total mass).
class GridCdf {
public:
    GridCdf(const Grid1D& grid, std::span<const double> rho);
    double operator()(double x) const;
    double total_mass() const noexcept { return total_; }

private:
    Grid1D grid_;
    std::vector<double> rho_;
    std::vector<double> cumulative_;  // mass left of cell i
    double total_;
};

/// Asymptotic two-sided Kolmogorov critical value c(alpha) = sqrt(-ln(alpha/2) / 2).
double ks_critical_value(double alpha);

/// sup |F_emp - F| for the given sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool reliable = true;  ///< false when more than 1% of trajectories were flagged
    std::size_t n_used = 0;
};

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha = 0.01);

/// KS distance between the ensemble at time t and |psi(t)|^2 from the timeline.
KsResult equivariance_check(const TrajectoryEnsemble& ens, const FlowTimeline& timeline, double t,
                            double alpha = 0.01);

struct ChiSquareResult {
    double statistic = 0.0;
    double critical = 0.0;
    std::size_t dof = 0;
    bool pass = false;
};

/// Pearson chi-square of a sample histogram over the grid cells against rho*dx.
/// Adjacent cells are pooled until every bin expects at least 5 counts.
ChiSquareResult chi_square_test(const Grid1D& grid, std::span<const double> rho, std::span<const double> sample,
                                double alpha = 0.01);

/// Equal-width partition of [x_min, x_max].
class CoarseGraining {
public:
    CoarseGraining(const Grid1D& grid, std::size_t n_cells);
    std::size_t size() const noexcept { return n_cells_; }
    double cell_width() const noexcept { return width_; }
    std::size_t cell_of(double x) const noexcept;
    /// Mass of the piecewise-constant grid density inside each coarse cell.
    std::vector<double> cell_mass(std::span<const double> rho) const;

private:
    Grid1D grid_;
    std::size_t n_cells_;
    double width_;
};

struct RelaxationPoint {
    double t = 0.0;
    double l1 = 0.0;
    double relative_entropy = 0.0;  ///< sum f_emp ln(f_emp / f_psi), auxiliary
};

/// Coarse-grained L1 distance between the ensemble and |psi(t)|^2 at every
/// recorded ensemble time. Throws if the cells are narrower than 2 dx.
std::vector<RelaxationPoint> relaxation_diagnostic(const TrajectoryEnsemble& ens, const FlowTimeline& timeline,
                                                   const CoarseGraining& cg);

}  // namespace pilotwave
