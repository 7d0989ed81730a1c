#include "pilotwave/equilibrium.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "pilotwave/errors.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

SampleSet sample_density(const Grid1D& grid, std::span<const double> rho, std::size_t m, std::uint64_t seed,
                         double source_time) {
    if (m == 0) throw PreconditionError("sample count must be >= 1");
    if (rho.size() != grid.size()) throw PreconditionError("density size does not match grid");
    std::vector<double> cdf(rho.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] >= 0.0)) throw PreconditionError("density must be non-negative");
        acc += rho[i];
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw PreconditionError("density has zero mass");

    std::mt19937_64 rng{mix64(seed)};
    SampleSet out{std::vector<double>(m), source_time, seed};
    for (std::size_t s = 0; s < m; ++s) {
        const double u = uniform01(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        // upper_bound never lands on a zero-mass cell unless u hits its left edge exactly
        while (rho[static_cast<std::size_t>(it - cdf.begin())] == 0.0 && it != cdf.begin()) --it;
        const auto cell = static_cast<std::size_t>(it - cdf.begin());
        const double jitter = uniform01(rng);
        out.positions[s] = grid.x_min() + (static_cast<double>(cell) + jitter) * grid.dx();
    }
    return out;
}

SampleSet sample_density(const GridWavefunction& psi, std::size_t m, std::uint64_t seed) {
    const double n2 = squared_norm(psi);
    if (std::abs(n2 - 1.0) > 1e-6)
        throw PreconditionError("wavefunction not normalised (norm^2 = " + std::to_string(n2) + ")");
    return sample_density(psi.grid, density(psi), m, seed, psi.time);
}

GridCdf::GridCdf(const Grid1D& grid, std::span<const double> rho)
    : grid_(grid), rho_(rho.begin(), rho.end()), cumulative_(rho.size() + 1, 0.0) {
    if (rho.size() != grid.size()) throw PreconditionError("density size does not match grid");
    for (std::size_t i = 0; i < rho.size(); ++i) cumulative_[i + 1] = cumulative_[i] + rho[i];
    total_ = cumulative_.back();
    if (!(total_ > 0.0)) throw PreconditionError("density has zero mass");
}

double GridCdf::operator()(double x) const {
    if (x <= grid_.x_min()) return 0.0;
    if (x >= grid_.x_max()) return 1.0;
    const double u = (x - grid_.x_min()) / grid_.dx();
    auto cell = static_cast<std::size_t>(u);
    if (cell >= rho_.size()) cell = rho_.size() - 1;
    const double frac = u - static_cast<double>(cell);
    return (cumulative_[cell] + frac * rho_[cell]) / total_;
}

double ks_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
    return std::sqrt(-0.5 * std::log(0.5 * alpha));
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw PreconditionError("KS statistic of an empty sample");
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha) {
    KsResult r;
    r.n_used = sample.size();
    r.statistic = ks_statistic(std::move(sample), cdf);
    r.threshold = ks_critical_value(alpha) / std::sqrt(static_cast<double>(r.n_used));
    r.pass = r.statistic < r.threshold;
    return r;
}

KsResult equivariance_check(const TrajectoryEnsemble& ens, const FlowTimeline& timeline, double t, double alpha) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    auto it = std::find_if(ens.times.begin(), ens.times.end(), [&](double x) { return std::abs(x - t) <= tol; });
    if (it == ens.times.end()) throw PreconditionError("ensemble has no record at t = " + std::to_string(t));
    const auto k = static_cast<std::size_t>(it - ens.times.begin());
    const auto s = timeline.index_of(t);
    const GridCdf cdf(timeline.grid, timeline.density[s]);
    std::vector<double> sample;
    sample.reserve(ens.n_trajectories());
    for (std::size_t i = 0; i < ens.n_trajectories(); ++i)
        if (!ens.flagged[i]) sample.push_back(ens.at(i, k));
    if (sample.empty()) throw PreconditionError("every trajectory is flagged");
    KsResult r = ks_test(std::move(sample), [&](double x) { return cdf(x); }, alpha);
    r.reliable = static_cast<double>(ens.flagged_count()) <= 0.01 * static_cast<double>(ens.n_trajectories());
    return r;
}

ChiSquareResult chi_square_test(const Grid1D& grid, std::span<const double> rho, std::span<const double> sample,
                                double alpha) {
    if (sample.empty()) throw PreconditionError("chi-square test of an empty sample");
    const double total = std::accumulate(rho.begin(), rho.end(), 0.0);
    std::vector<double> counts(grid.size(), 0.0);
    for (double x : sample) counts[grid.cell_of(x)] += 1.0;
    const auto m = static_cast<double>(sample.size());

    std::vector<double> expected, observed;
    double exp_acc = 0.0, obs_acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        exp_acc += m * rho[i] / total;
        obs_acc += counts[i];
        if (exp_acc >= 5.0) {
            expected.push_back(exp_acc);
            observed.push_back(obs_acc);
            exp_acc = obs_acc = 0.0;
        }
    }
    if (expected.empty()) throw PreconditionError("sample too small for a chi-square test");
    // underfilled tail joins the last bin
    expected.back() += exp_acc;
    observed.back() += obs_acc;

    double stat = 0.0;
    for (std::size_t b = 0; b < expected.size(); ++b)
        stat += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
    const std::size_t bins = expected.size();
    ChiSquareResult r;
    r.statistic = stat;
    r.dof = bins > 1 ? bins - 1 : 1;
    const boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.critical = boost::math::quantile(boost::math::complement(dist, alpha));
    r.pass = stat < r.critical;
    return r;
}

CoarseGraining::CoarseGraining(const Grid1D& grid, std::size_t n_cells) : grid_(grid), n_cells_(n_cells) {
    if (n_cells == 0) throw PreconditionError("coarse graining needs at least one cell");
    width_ = grid.length() / static_cast<double>(n_cells);
    if (width_ < 2.0 * grid.dx())
        throw PreconditionError("coarse cell width " + std::to_string(width_) + " is below 2 dx");
}

std::size_t CoarseGraining::cell_of(double x) const noexcept {
    const double u = std::floor((x - grid_.x_min()) / width_);
    if (!(u > 0.0)) return 0;
    if (u >= static_cast<double>(n_cells_ - 1)) return n_cells_ - 1;
    return static_cast<std::size_t>(u);
}

std::vector<double> CoarseGraining::cell_mass(std::span<const double> rho) const {
    std::vector<double> mass(n_cells_, 0.0);
    const double dx = grid_.dx();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        // grid cell i spans [a, b); split it across coarse cells it straddles
        double a = grid_.x_min() + static_cast<double>(i) * dx;
        const double b = a + dx;
        while (a < b) {
            const std::size_t c = cell_of(a + 1e-12 * dx);
            const double edge = std::min(b, grid_.x_min() + static_cast<double>(c + 1) * width_);
            const double len = (c + 1 == n_cells_) ? b - a : std::max(edge - a, 0.0);
            mass[c] += rho[i] * len;
            if (c + 1 == n_cells_ || edge <= a) break;
            a = edge;
        }
    }
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (auto& v : mass) v /= total;
    return mass;
}

std::vector<RelaxationPoint> relaxation_diagnostic(const TrajectoryEnsemble& ens, const FlowTimeline& timeline,
                                                   const CoarseGraining& cg) {
    if (cg.cell_width() < 2.0 * timeline.grid.dx()) throw PreconditionError("coarse cells narrower than 2 dx");
    std::vector<RelaxationPoint> out;
    const std::size_t m = ens.n_trajectories();
    for (std::size_t k = 0; k < ens.n_times(); ++k) {
        const double t = ens.times[k];
        const auto s = timeline.index_of(t);
        const auto f_psi = cg.cell_mass(timeline.density[s]);
        std::vector<double> f_emp(cg.size(), 0.0);
        for (std::size_t i = 0; i < m; ++i) f_emp[cg.cell_of(ens.at(i, k))] += 1.0;
        RelaxationPoint p{t, 0.0, 0.0};
        for (std::size_t c = 0; c < cg.size(); ++c) {
            f_emp[c] /= static_cast<double>(m);
            p.l1 += std::abs(f_emp[c] - f_psi[c]);
            if (f_emp[c] > 0.0)
                p.relative_entropy += f_emp[c] * std::log(f_emp[c] / std::max(f_psi[c], 1e-300));
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace pilotwave
