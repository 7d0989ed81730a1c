#include "pilotwave/belljump.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

#include "pilotwave/errors.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

std::string BeableConfig::label() const {
    std::string out;
    const bool wide = std::any_of(occupation.begin(), occupation.end(), [](int f) { return f > 9; });
    for (std::size_t l = 0; l < occupation.size(); ++l) {
        if (wide && l > 0) out += '.';
        out += std::to_string(occupation[l]);
    }
    return out;
}

FockBasis::FockBasis(std::vector<BasisLabel> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw PreconditionError("basis must not be empty");
    std::map<std::pair<BeableConfig, int>, std::size_t> seen;
    std::map<BeableConfig, std::size_t> index;
    block_of_.resize(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const auto& lab = labels_[i];
        for (int f : lab.n.occupation)
            if (f < 0) throw PreconditionError("occupation numbers must be non-negative");
        if (!seen.emplace(std::make_pair(lab.n, lab.q), i).second)
            throw PreconditionError("duplicate basis label " + lab.n.label() + "/" + std::to_string(lab.q));
        auto [it, inserted] = index.emplace(lab.n, configs_.size());
        if (inserted) {
            configs_.push_back(lab.n);
            blocks_.emplace_back();
        }
        block_of_[i] = it->second;
        blocks_[it->second].push_back(i);
    }
}

std::size_t FockBasis::config_index(const BeableConfig& n) const {
    const auto it = std::find(configs_.begin(), configs_.end(), n);
    if (it == configs_.end()) throw PreconditionError("unknown configuration " + n.label());
    return static_cast<std::size_t>(it - configs_.begin());
}

void validate(const QuantumState& s, const FockBasis& basis) {
    const auto d = static_cast<Eigen::Index>(basis.dim());
    if (s.amplitudes.size() != d || s.hamiltonian.rows() != d || s.hamiltonian.cols() != d)
        throw PreconditionError("state/Hamiltonian dimensions do not match the basis");
    if (std::abs(s.amplitudes.squaredNorm() - 1.0) > 1e-12) throw PreconditionError("state is not normalised");
    if ((s.hamiltonian - s.hamiltonian.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw PreconditionError("Hamiltonian is not Hermitian");
}

ExactEvolution::ExactEvolution(const QuantumState& s) : hamiltonian_(s.hamiltonian) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(s.hamiltonian);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    vectors_ = solver.eigenvectors();
    energies_ = solver.eigenvalues();
    coefficients_ = vectors_.adjoint() * s.amplitudes;
}

Eigen::VectorXcd ExactEvolution::at(double t) const {
    Eigen::VectorXcd c = coefficients_;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -energies_(k) * t);
    return vectors_ * c;
}

Eigen::VectorXd marginal_P(const Eigen::VectorXcd& psi, const FockBasis& basis) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.n_configs()));
    for (std::size_t i = 0; i < basis.dim(); ++i)
        p(static_cast<Eigen::Index>(basis.block_of(i))) += std::norm(psi(static_cast<Eigen::Index>(i)));
    return p;
}

Eigen::MatrixXd current_J(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& h, const FockBasis& basis) {
    const auto nc = static_cast<Eigen::Index>(basis.n_configs());
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(nc, nc);
    const auto d = static_cast<Eigen::Index>(basis.dim());
    // 2 Re[conj(psi_a) (-i H_ab) psi_b] = 2 Im[conj(psi_a) H_ab psi_b]
    for (Eigen::Index b = 0; b < d; ++b) {
        const auto m = static_cast<Eigen::Index>(basis.block_of(static_cast<std::size_t>(b)));
        for (Eigen::Index a = 0; a < d; ++a) {
            const std::complex<double> hab = h(a, b);
            if (hab == 0.0) continue;
            const auto n = static_cast<Eigen::Index>(basis.block_of(static_cast<std::size_t>(a)));
            j(n, m) += 2.0 * (std::conj(psi(a)) * hab * psi(b)).imag();
        }
    }
    return j;
}

Eigen::MatrixXd jump_rates(const Eigen::VectorXd& p, const Eigen::MatrixXd& j, double rate_floor) {
    const Eigen::Index nc = p.size();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nc, nc);
    for (Eigen::Index m = 0; m < nc; ++m) {
        if (!(p(m) > rate_floor)) continue;
        for (Eigen::Index n = 0; n < nc; ++n)
            if (n != m && j(n, m) > 0.0) t(n, m) = j(n, m) / p(m);
    }
    return t;
}

double stay_probability(const Eigen::MatrixXd& rates, std::size_t n, double dt) {
    const auto nn = static_cast<Eigen::Index>(n);
    double out = 0.0;
    for (Eigen::Index m = 0; m < rates.rows(); ++m)
        if (m != nn) out += rates(m, nn);
    return 1.0 - out * dt;
}

namespace {

struct RatePoint {
    Eigen::MatrixXd rates;
    Eigen::VectorXd exit;
    double max_exit = 0.0;
};

RatePoint rates_at(const ExactEvolution& evo, const FockBasis& basis, double t, double floor) {
    const auto psi = evo.at(t);
    RatePoint r;
    r.rates = jump_rates(marginal_P(psi, basis), current_J(psi, evo.hamiltonian(), basis), floor);
    r.exit = r.rates.colwise().sum().transpose();
    r.max_exit = r.exit.size() ? r.exit.maxCoeff() : 0.0;
    if (r.max_exit > 1.0 / floor) throw NumericalError("jump rate overflow at t = " + std::to_string(t));
    return r;
}

constexpr double max_rate_step = 0.1;

}  // namespace

RateTable build_rate_table(const ExactEvolution& evo, const FockBasis& basis, double t_end, double dt_max,
                           double rate_floor) {
    if (!(t_end >= 0.0) || !(dt_max > 0.0)) throw PreconditionError("need t_end >= 0 and dt_max > 0");
    if (evo.dim() != basis.dim()) throw PreconditionError("evolution and basis dimensions differ");
    RateTable table;
    table.rate_floor = rate_floor;
    double t = 0.0;
    RatePoint cur = rates_at(evo, basis, t, rate_floor);
    auto push = [&](double time, const RatePoint& p) {
        table.times.push_back(time);
        table.rates.push_back(p.rates);
        table.exit_rate.push_back(p.exit);
    };
    push(t, cur);
    constexpr double min_step = 1e-12;
    while (t < t_end) {
        double h = std::min(dt_max, t_end - t);
        if (cur.max_exit > 0.0) h = std::min(h, max_rate_step / cur.max_exit);
        RatePoint next;
        for (;;) {
            next = rates_at(evo, basis, t + h, rate_floor);
            if (next.max_exit * h <= 2.0 * max_rate_step || h <= min_step) break;
            h *= 0.5;
        }
        t = (t_end - (t + h) < min_step) ? t_end : t + h;
        push(t, next);
        cur = std::move(next);
    }
    return table;
}

std::size_t JumpTrajectory::config_at(double t) const {
    std::size_t c = initial;
    for (const auto& e : events) {
        if (e.time > t) break;
        c = e.to;
    }
    return c;
}

JumpTrajectory simulate_jump_process(const RateTable& table, std::size_t n0, double t_end, std::uint64_t seed,
                                     std::size_t run_id) {
    if (table.times.empty()) throw PreconditionError("empty rate table");
    if (t_end > table.times.back() + 1e-12) throw PreconditionError("rate table does not reach t_end");
    const auto nc = static_cast<std::size_t>(table.exit_rate.front().size());
    if (n0 >= nc) throw PreconditionError("initial configuration out of range");
    auto rng = stream_rng(seed, run_id);
    JumpTrajectory traj{n0, {}, seed, run_id};

    std::size_t cur = n0;
    double target = -std::log1p(-uniform01(rng));
    double hazard = 0.0;
    double t = 0.0;
    std::size_t seg = 0;  // mesh interval [times[seg], times[seg+1]]
    while (seg + 1 < table.times.size() && t < t_end) {
        const double a = table.times[seg], b = std::min(table.times[seg + 1], t_end);
        if (b <= t) {
            ++seg;
            continue;
        }
        const auto c = static_cast<Eigen::Index>(cur);
        const double la = table.exit_rate[seg](c);
        const double lb = table.exit_rate[seg + 1](c);
        const double span = table.times[seg + 1] - a;
        auto lambda = [&](double s) { return la + (lb - la) * (s - a) / span; };
        const double l_start = lambda(t), l_end = lambda(b);
        const double piece = 0.5 * (l_start + l_end) * (b - t);
        if (hazard + piece < target) {
            hazard += piece;
            t = b;
            ++seg;
            continue;
        }
        // Solve hazard + l_start u + slope u^2 / 2 = target for u in [0, b - t].
        const double need = target - hazard;
        const double slope = (l_end - l_start) / (b - t);
        double u;
        if (std::abs(slope) * need < 1e-14 * l_start * l_start || slope == 0.0) {
            u = need / l_start;
        } else {
            const double disc = std::max(l_start * l_start + 2.0 * slope * need, 0.0);
            u = 2.0 * need / (l_start + std::sqrt(disc));
        }
        u = std::clamp(u, 0.0, b - t);
        const double tj = t + u;
        const double w = (tj - a) / span;
        Eigen::VectorXd column = (1.0 - w) * table.rates[seg].col(c) + w * table.rates[seg + 1].col(c);
        column(c) = 0.0;
        double total = column.sum();
        if (!(total > 0.0)) {
            // kink at an endpoint: fall back to the endpoint with the larger exit rate
            column = (la >= lb ? table.rates[seg] : table.rates[seg + 1]).col(c);
            column(c) = 0.0;
            total = column.sum();
        }
        double pick = uniform01(rng) * total;
        std::size_t dest = cur;
        for (Eigen::Index n = 0; n < column.size(); ++n) {
            if (column(n) <= 0.0) continue;
            dest = static_cast<std::size_t>(n);
            if (pick < column(n)) break;
            pick -= column(n);
        }
        traj.events.push_back({tj, cur, dest});
        cur = dest;
        t = tj;
        hazard = 0.0;
        target = -std::log1p(-uniform01(rng));
    }
    return traj;
}

JumpTrajectory simulate_jump_process(const QuantumState& state0, const FockBasis& basis, const BeableConfig& n0,
                                     double t_end, std::uint64_t seed, double dt_max) {
    validate(state0, basis);
    const ExactEvolution evo(state0);
    const std::size_t c = basis.config_index(n0);
    if (!(marginal_P(state0.amplitudes, basis)(static_cast<Eigen::Index>(c)) > 0.0))
        throw PreconditionError("initial configuration has zero probability");
    const auto table = build_rate_table(evo, basis, t_end, dt_max);
    return simulate_jump_process(table, c, t_end, seed);
}

std::vector<JumpTrajectory> simulate_jump_ensemble(const RateTable& table, const Eigen::VectorXd& p0, std::size_t m,
                                                   double t_end, std::uint64_t seed, Execution exec) {
    std::vector<JumpTrajectory> out(m);
    const double total = p0.sum();
    // Initial draws use a stream disjoint from the path streams.
    const std::uint64_t init_seed = mix64(seed ^ 0xa0761d6478bd642fULL);
    auto run = [&](std::size_t r) {
        auto rng = stream_rng(init_seed, r);
        double u = uniform01(rng) * total;
        std::size_t n0 = 0;
        for (Eigen::Index n = 0; n < p0.size(); ++n) {
            if (p0(n) <= 0.0) continue;
            n0 = static_cast<std::size_t>(n);
            if (u < p0(n)) break;
            u -= p0(n);
        }
        out[r] = simulate_jump_process(table, n0, t_end, seed, r);
    };
    const auto mm = static_cast<std::ptrdiff_t>(m);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t r = 0; r < mm; ++r) run(static_cast<std::size_t>(r));
    } else {
        for (std::size_t r = 0; r < m; ++r) run(r);
    }
    return out;
}

std::vector<OccupationCheck> ensemble_vs_marginal(const std::vector<JumpTrajectory>& ensemble,
                                                  const ExactEvolution& evo, const FockBasis& basis,
                                                  const std::vector<double>& probe_times) {
    if (ensemble.empty()) throw PreconditionError("empty jump ensemble");
    const auto nc = static_cast<Eigen::Index>(basis.n_configs());
    const auto m = static_cast<double>(ensemble.size());
    std::vector<OccupationCheck> out;
    for (double t : probe_times) {
        OccupationCheck chk;
        chk.t = t;
        chk.exact = marginal_P(evo.at(t), basis);
        chk.empirical = Eigen::VectorXd::Zero(nc);
        for (const auto& tr : ensemble) chk.empirical(static_cast<Eigen::Index>(tr.config_at(t))) += 1.0;
        chk.empirical /= m;
        chk.total_variation = 0.5 * (chk.empirical - chk.exact).cwiseAbs().sum();
        for (Eigen::Index n = 0; n < nc; ++n) {
            const double p = std::clamp(chk.exact(n), 0.0, 1.0);
            chk.band += 1.5 * std::sqrt(p * (1.0 - p) / m);
        }
        chk.pass = chk.total_variation <= chk.band;
        out.push_back(std::move(chk));
    }
    return out;
}

BellModel two_level_model() {
    FockBasis basis({BasisLabel{BeableConfig{{0}}, 0}, BasisLabel{BeableConfig{{1}}, 0}});
    Eigen::MatrixXcd h(2, 2);
    h << 0.0, 1.0, 1.0, 0.0;
    Eigen::VectorXcd psi(2);
    psi << 1.0, 0.0;
    return BellModel{"two_level", std::move(basis), QuantumState{psi, h}};
}

namespace {

constexpr int chain_sites = 3;

// Jordan-Wigner sign for acting on `site` of occupation bit pattern `occ`.
double jw_sign(unsigned occ, int site) {
    int count = 0;
    for (int s = 0; s < site; ++s) count += (occ >> s) & 1U;
    return (count % 2 == 0) ? 1.0 : -1.0;
}

// c_dag(site) |occ>: returns false when the site is already filled.
bool create(unsigned& occ, int site, double& sign) {
    if ((occ >> site) & 1U) return false;
    sign *= jw_sign(occ, site);
    occ |= 1U << site;
    return true;
}

bool annihilate(unsigned& occ, int site, double& sign) {
    if (!((occ >> site) & 1U)) return false;
    sign *= jw_sign(occ, site);
    occ &= ~(1U << site);
    return true;
}

}  // namespace

BellModel fermion_chain_model() {
    constexpr double hopping = 1.0;
    constexpr double pairing = 0.7;
    constexpr double site_energy[chain_sites] = {0.3, -0.2, 0.5};
    constexpr double aux_splitting = 0.9;
    constexpr double aux_coupling = 0.4;

    std::vector<BasisLabel> labels;
    const unsigned n_occ = 1U << chain_sites;
    auto index = [&](unsigned occ, int aux) { return static_cast<Eigen::Index>(2 * occ + static_cast<unsigned>(aux)); };
    for (unsigned occ = 0; occ < n_occ; ++occ)
        for (int aux = 0; aux < 2; ++aux) {
            BeableConfig cfg;
            for (int s = 0; s < chain_sites; ++s) cfg.occupation.push_back(static_cast<int>((occ >> s) & 1U));
            labels.push_back({cfg, aux});
        }
    const auto dim = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

    for (unsigned occ = 0; occ < n_occ; ++occ) {
        for (int aux = 0; aux < 2; ++aux) {
            const auto col = index(occ, aux);
            for (int s = 0; s < chain_sites; ++s)
                if ((occ >> s) & 1U) h(col, col) += site_energy[s];
            h(col, col) += aux_splitting * aux;
            if (occ & 1U) h(index(occ, 1 - aux), col) += aux_coupling;  // n_1 sigma_x
            for (int s = 0; s + 1 < chain_sites; ++s) {
                // -t (c_s^dag c_{s+1} + c_{s+1}^dag c_s)
                for (auto [to, from] : {std::pair{s, s + 1}, std::pair{s + 1, s}}) {
                    unsigned o = occ;
                    double sign = 1.0;
                    if (annihilate(o, from, sign) && create(o, to, sign)) h(index(o, aux), col) += -hopping * sign;
                }
                // Delta (c_s^dag c_{s+1}^dag + h.c.)
                {
                    unsigned o = occ;
                    double sign = 1.0;
                    if (create(o, s + 1, sign) && create(o, s, sign)) h(index(o, aux), col) += pairing * sign;
                }
                {
                    unsigned o = occ;
                    double sign = 1.0;
                    if (annihilate(o, s, sign) && annihilate(o, s + 1, sign)) h(index(o, aux), col) += pairing * sign;
                }
            }
        }
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(index(0b000, 0)) = 0.8;
    psi(index(0b011, 1)) = std::complex<double>(0.0, 0.45);
    psi(index(0b110, 0)) = 0.3;
    psi(index(0b101, 1)) = std::complex<double>(0.2, -0.15);
    psi.normalize();
    return BellModel{"fermion_chain", FockBasis(std::move(labels)), QuantumState{psi, h}};
}

}  // namespace pilotwave
