#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "pilotwave/belljump.hpp"
#include "pilotwave/dirac.hpp"
#include "pilotwave/equilibrium.hpp"
#include "pilotwave/field.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/qpotential.hpp"
#include "pilotwave/rng.hpp"
#include "pilotwave/scenario.hpp"
#include "pilotwave/stepper.hpp"

namespace pilotwave {

using nlohmann::json;
using io::CsvWriter;
using io::format_number;

namespace {

struct Context {
    const ScenarioConfig& cfg;
    io::OutputDir out;
    std::vector<CheckResult> checks;
    json meta = json::object();

    double num(const char* k) const { return cfg.params.at(k).get<double>(); }
    std::size_t count(const char* k) const { return cfg.params.at(k).get<std::size_t>(); }
    std::string text(const char* k) const { return cfg.params.at(k).get<std::string>(); }

    void check(std::string name, bool pass, double value, double threshold, std::string detail = {}) {
        checks.push_back({std::move(name), pass, value, threshold, std::move(detail)});
    }
};

std::size_t whole_steps(double total, double step) { return static_cast<std::size_t>(std::llround(total / step)); }

// Largest dt <= target that divides `interval`, as (dt, substeps).
std::pair<double, std::size_t> fit_step(double interval, double requested, double target) {
    if (requested > 0.0) return {requested, whole_steps(interval, requested)};
    const auto sub = static_cast<std::size_t>(std::ceil(interval / target - 1e-9));
    return {interval / static_cast<double>(sub), std::max<std::size_t>(sub, 1)};
}

std::string probe_name(const char* what, double t) { return fmt::format("{}@t={:.6g}", what, t); }

json grid_json(const Grid1D& g) {
    return {{"n_points", g.size()},
            {"x_min", g.x_min()},
            {"x_max", g.x_max()},
            {"dx", g.dx()},
            {"boundary", std::string(to_string(g.boundary()))},
            {"cell_centred", true}};
}

std::string snapshot_csv(const GridWavefunction& psi) {
    const auto rho = density(psi);
    const auto j = probability_current(psi);
    CsvWriter w({"x", "re_psi", "im_psi", "rho", "j"});
    for (std::size_t i = 0; i < psi.size(); ++i)
        w.row({psi.grid.x(i), psi.amplitudes[i].real(), psi.amplitudes[i].imag(), rho[i], j[i]});
    return w.str();
}

std::string trajectories_csv(const TrajectoryEnsemble& ens, std::size_t limit) {
    CsvWriter w({"trajectory_id", "t", "Q", "flagged"});
    const std::size_t n = std::min(limit, ens.n_trajectories());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < ens.n_times(); ++k)
            w.row({static_cast<double>(i), ens.times[k], ens.at(i, k), static_cast<double>(ens.flagged[i])});
    return w.str();
}

// KS checks at the probe times; writes equivariance.csv.
void equivariance_probes(Context& ctx, const TrajectoryEnsemble& ens, const FlowTimeline& tl,
                         const std::vector<double>& probes, double alpha) {
    CsvWriter w({"t", "statistic", "threshold", "pass"});
    for (double t : probes) {
        const auto ks = equivariance_check(ens, tl, t, alpha);
        const bool pass = ks.pass && ks.reliable;
        w.row({t, ks.statistic, ks.threshold, pass ? 1.0 : 0.0});
        ctx.check(probe_name("equivariance", t), pass, ks.statistic, ks.threshold,
                  ks.reliable ? "" : "more than 1% of trajectories flagged");
    }
    ctx.out.write("equivariance.csv", w.str());
}

std::vector<double> probe_times(double t_end, std::size_t probes) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= probes; ++k) out.push_back(t_end * static_cast<double>(k) / static_cast<double>(probes));
    return out;
}

Potential make_potential(const Context& ctx, const Grid1D& grid) {
    if (ctx.text("potential") == "harmonic") return Potential::harmonic(grid, ctx.num("mass"), ctx.num("omega"));
    return Potential::zero(grid);
}

void run_evolve(Context& ctx) {
    const Grid1D grid(ctx.count("n_points"), ctx.num("x_min"), ctx.num("x_max"),
                      boundary_from_string(ctx.text("boundary")));
    const double mass = ctx.num("mass"), hbar = ctx.num("hbar");
    const auto v = make_potential(ctx, grid);
    GridWavefunction psi = ctx.text("initial") == "ho_ground"
                               ? ho_ground_state(grid, ctx.num("omega"), mass, hbar)
                               : init_gaussian(grid, ctx.num("x0"), ctx.num("sigma"), ctx.num("k0"), mass, hbar);
    const double snap = ctx.num("snapshot_dt");
    const auto [dt, sub] = fit_step(snap, ctx.num("dt"), default_dt(grid, mass, hbar));
    const std::size_t n_snap = whole_steps(ctx.num("t_end"), snap);
    SchrodingerStepper stepper(grid, v, dt, mass, hbar);

    const double norm0 = squared_norm(psi);
    double worst_drift = 0.0;
    json snapshots = json::array();
    auto save = [&](std::size_t s) {
        const std::string name = fmt::format("psi_{:04}.csv", s);
        ctx.out.write(name, snapshot_csv(psi));
        snapshots.push_back({{"file", name}, {"t", static_cast<double>(s) * snap}});
        worst_drift = std::max(worst_drift, std::abs(squared_norm(psi) - norm0));
    };
    save(0);
    GridWavefunction prev = psi;
    for (std::size_t s = 1; s <= n_snap; ++s) {
        for (std::size_t k = 0; k < sub; ++k) {
            prev = psi;
            stepper.step_in_place(psi);
        }
        psi.time = static_cast<double>(s) * snap;
        save(s);
    }
    GridWavefunction next = stepper.step(psi);
    next.time = psi.time + dt;
    prev.time = psi.time - dt;
    const std::vector<GridWavefunction> window{prev, psi, next};
    const auto hj = hj_residual(window, std::size_t{1}, v);
    const auto polar = polar_decompose(psi);
    const auto q = quantum_potential(psi);
    CsvWriter w({"x", "R", "S", "Q", "residual"});
    for (std::size_t i = 0; i < grid.size(); ++i) w.row({grid.x(i), polar.R[i], polar.S[i], q[i], hj.residual[i]});
    ctx.out.write("qpotential.csv", w.str());

    ctx.check("norm_conservation", worst_drift < 1e-8, worst_drift, 1e-8);
    if (ctx.text("potential") == "harmonic" && ctx.text("initial") == "ho_ground") {
        const double energy = 0.5 * hbar * ctx.num("omega");
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(grid.x(i)) <= 3.0) worst = std::max(worst, std::abs(q[i] + v.values[i] - energy));
        ctx.check("hj_residual", hj.max_abs < 1e-5, hj.max_abs, 1e-5);
        ctx.check("q_plus_v_minus_e", worst < 1e-5, worst, 1e-5, "|x| <= 3");
    }
    ctx.meta["grid"] = grid_json(grid);
    ctx.meta["scheme"] = std::string(to_string(stepper.scheme()));
    ctx.meta["dt"] = dt;
    ctx.meta["time"] = psi.time;
    ctx.meta["snapshots"] = snapshots;
    ctx.meta["hj_residual_max"] = hj.max_abs;
}

void run_trajectories(Context& ctx) {
    const Grid1D grid(ctx.count("n_points"), ctx.num("x_min"), ctx.num("x_max"),
                      boundary_from_string(ctx.text("boundary")));
    const double mass = ctx.num("mass"), hbar = ctx.num("hbar");
    const double x0 = ctx.num("x0"), sigma = ctx.num("sigma"), k0 = ctx.num("k0");
    const auto v = make_potential(ctx, grid);
    const GridWavefunction psi0 = init_gaussian(grid, x0, sigma, k0, mass, hbar);
    const double snap = ctx.num("snapshot_dt"), t_end = ctx.num("t_end");
    const auto [dt, sub] = fit_step(snap, ctx.num("dt"), default_dt(grid, mass, hbar));
    const auto states = evolve_timeline(psi0, v, dt, sub * whole_steps(t_end, snap), sub);
    const auto tl = make_timeline(states, ctx.num("node_eps"));

    const auto samples = sample_density(psi0, ctx.count("m"), ctx.cfg.seed);
    IntegratorOptions opts;
    opts.seed = ctx.cfg.seed;
    const auto ens = integrate_trajectories(tl, samples.positions, opts);
    ctx.out.write("trajectories.csv", trajectories_csv(ens, ctx.count("export_trajectories")));
    equivariance_probes(ctx, ens, tl, probe_times(t_end, ctx.count("probes")), ctx.num("alpha"));

    if (ctx.text("potential") == "free") {
        // Free gaussian: Q(t) - x_c(t) = (Q0 - x0) sigma(t) / sigma0.
        const double tau = hbar * t_end / (2.0 * mass * sigma * sigma);
        const double spread = std::sqrt(1.0 + tau * tau);
        const double centre = x0 + hbar * k0 * t_end / mass;
        double worst = 0.0;
        std::size_t used = 0;
        const std::size_t last = ens.n_times() - 1;
        for (std::size_t i = 0; i < ens.n_trajectories(); ++i) {
            const double d0 = ens.at(i, 0) - x0;
            if (ens.flagged[i] || std::abs(d0) < 0.1 * sigma) continue;
            const double expect = d0 * spread;
            worst = std::max(worst, std::abs(ens.at(i, last) - centre - expect) / std::abs(expect));
            ++used;
        }
        ctx.check("analytic_spreading", used > 0 && worst < 1e-3, worst, 1e-3,
                  fmt::format("{} trajectories with |Q0 - x0| >= 0.1 sigma at t = {}", used, format_number(t_end)));
    }
    ctx.meta["grid"] = grid_json(grid);
    ctx.meta["scheme"] = std::string(to_string(grid.periodic() ? Scheme::split_operator : Scheme::crank_nicolson));
    ctx.meta["dt"] = dt;
    ctx.meta["integrator"] = {{"method", "rk4"},
                              {"step", 2.0 * snap},
                              {"record_every", opts.record_every},
                              {"max_node_events", opts.max_node_events},
                              {"node_eps", ctx.num("node_eps") > 0.0 ? ctx.num("node_eps") : -1.0},
                              {"node_eps_rule", "1e-12 * max rho when node_eps = 0"}};
    ctx.meta["flagged"] = ens.flagged_count();
}

void run_measure(Context& ctx) {
    const Grid1D grid(ctx.count("n_points"), ctx.num("y_min"), ctx.num("y_max"), Boundary::periodic);
    const double w1 = ctx.num("weight1");
    const auto initial = make_branched_state(grid, std::sqrt(w1), std::sqrt(1.0 - w1), ctx.num("pointer_sigma"),
                                             ctx.num("coupling"), ctx.num("pointer_mass"), ctx.num("hbar"));
    auto states = evolve_measurement(initial, ctx.num("t_end"), ctx.num("snapshot_dt"));
    const auto tl = make_measurement_timeline(std::move(states));
    const double eps = ctx.num("collapse_eps");
    const auto summary = run_measurement_ensemble(tl, ctx.count("m"), ctx.cfg.seed, eps);

    CsvWriter outcomes({"trajectory_id", "outcome", "decided_at", "final_pointer"});
    for (const auto& r : summary.records)
        outcomes.row({static_cast<double>(r.trajectory_id), static_cast<double>(r.outcome), r.decided_at,
                      r.final_pointer});
    ctx.out.write("outcomes.csv", outcomes.str());

    CsvWriter overlap({"t", "branch_overlap", "inner_overlap"});
    for (std::size_t s = 0; s < tl.states.size(); ++s)
        overlap.row({tl.flow.times[s], tl.overlap[s], pointer_inner_overlap(tl.states[s])});
    ctx.out.write("overlap.csv", overlap.str());

    CsvWriter branches({"t", "y", "rho1", "rho2"});
    const std::size_t nb = ctx.count("branch_snapshots");
    for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t s = nb == 1 ? tl.states.size() - 1 : k * (tl.states.size() - 1) / (nb - 1);
        for (std::size_t i = 0; i < grid.size(); ++i)
            branches.row({tl.flow.times[s], grid.x(i), tl.rho1[s][i], tl.rho2[s][i]});
    }
    ctx.out.write("branches.csv", branches.str());

    const auto& final_state = tl.states.back();
    const double final_overlap = tl.overlap.back();
    double worst = 0.0;
    std::size_t tested = 0, skipped = 0;
    const bool separated = final_overlap < ctx.num("irrelevance_overlap");
    if (separated) {
        for (const auto& r : summary.records) {
            if (r.outcome == 0) continue;
            try {
                worst = std::max(worst, dynamical_irrelevance_check(final_state, r.final_pointer, eps));
                ++tested;
            } catch (const PreconditionError&) {
                ++skipped;
            }
        }
    }
    const double tol = ctx.num("irrelevance_tol");
    ctx.check("born_rule", summary.born_pass, std::abs(summary.frequency1 - summary.weight1), summary.band,
              fmt::format("frequency1 = {}, |c1|^2 = {}", format_number(summary.frequency1), format_number(w1)));
    const double undecided_frac = static_cast<double>(summary.undecided) / static_cast<double>(summary.records.size());
    ctx.check("undecided_fraction", summary.undecided_pass, undecided_frac, 0.005);
    ctx.check("outcome_permanence", summary.permanence_violations == 0,
              static_cast<double>(summary.permanence_violations), 0.0);
    ctx.check("dynamical_irrelevance", separated && tested > 0 && worst < tol, worst, tol,
              separated ? fmt::format("{} positions tested, {} inside the residual overlap region", tested, skipped)
                        : fmt::format("final branch overlap {} not below {}", format_number(final_overlap),
                                      format_number(ctx.num("irrelevance_overlap"))));

    json summary_json = {{"weight1", summary.weight1},
                         {"count1", summary.count1},
                         {"count2", summary.count2},
                         {"undecided", summary.undecided},
                         {"frequency1", summary.frequency1},
                         {"frequency2", static_cast<double>(summary.count2) / static_cast<double>(summary.records.size())},
                         {"band", summary.band},
                         {"born_pass", summary.born_pass},
                         {"undecided_pass", summary.undecided_pass},
                         {"permanence_violations", summary.permanence_violations},
                         {"final_branch_overlap", final_overlap}};
    ctx.out.write("summary.json", summary_json.dump(2) + "\n");
    ctx.meta["grid"] = grid_json(grid);
    ctx.meta["hamiltonian"] = "p^2/2M + g S p, exact in pointer momentum space";
}

void run_dirac(Context& ctx) {
    const Grid1D grid(ctx.count("n_points"), ctx.num("x_min"), ctx.num("x_max"), Boundary::periodic);
    const double mass = ctx.num("mass"), c = ctx.num("c");
    const auto psi0 = positive_energy_packet(grid, ctx.num("x0"), ctx.num("sigma"), ctx.num("k0"), mass, c);
    const double snap = ctx.num("snapshot_dt"), t_end = ctx.num("t_end");
    const auto [dt, sub] = fit_step(snap, ctx.num("dt"), 0.5 * grid.dx() / c);
    const auto tl = evolve_dirac_timeline(psi0, dt, sub * whole_steps(t_end, snap), sub);

    double max_speed = 0.0;
    for (const auto& v : tl.flow.velocity)
        for (double x : v.v) max_speed = std::max(max_speed, std::abs(x));
    // Random spinor fields, including badly scaled and nearly empty ones.
    const std::size_t n_random = ctx.count("random_fields");
    const Grid1D small(64, 0.0, 1.0, Boundary::periodic);
    for (std::size_t r = 0; r < n_random; ++r) {
        auto rng = stream_rng(ctx.cfg.seed ^ 0x5ca1ab1eULL, r);
        std::normal_distribution<double> normal;
        const double scale = std::pow(10.0, -30.0 + 60.0 * uniform01(rng));
        DiracSpinor s{small, std::vector<cplx>(64), std::vector<cplx>(64), mass, c, 0.0};
        for (std::size_t i = 0; i < 64; ++i) {
            s.psi1[i] = scale * cplx(normal(rng), normal(rng));
            s.psi2[i] = (r % 3 == 0 ? s.psi1[i] * (1.0 - 1e-15 * normal(rng)) : scale * cplx(normal(rng), normal(rng)));
        }
        for (double x : dirac_velocity(s).v) max_speed = std::max(max_speed, std::abs(x));
    }
    ctx.check("speed_bound", max_speed <= c, max_speed, c,
              fmt::format("{} snapshots and {} random fields", tl.flow.size(), n_random));

    const double k = 2.0 * std::numbers::pi * 5.0 / grid.length();
    const auto plane = positive_energy_plane_wave(grid, k, mass, c);
    const double expect = c * c * k / dirac_energy(k, mass, c);
    double plane_err = 0.0;
    for (double x : dirac_velocity(plane).v) plane_err = std::max(plane_err, std::abs(x - expect) / std::abs(expect));
    ctx.check("plane_wave_velocity", plane_err < 1e-8, plane_err, 1e-8);

    const auto samples = sample_density(grid, tl.flow.density.front(), ctx.count("m"), ctx.cfg.seed);
    IntegratorOptions opts;
    opts.seed = ctx.cfg.seed;
    const auto ens = integrate_trajectories(tl.flow, samples.positions, opts);
    ctx.out.write("trajectories.csv", trajectories_csv(ens, ctx.count("export_trajectories")));
    equivariance_probes(ctx, ens, tl.flow, probe_times(t_end, ctx.count("probes")), ctx.num("alpha"));

    const auto& fin = tl.snapshots.back();
    const auto rho = dirac_density(fin);
    const auto vel = dirac_velocity(fin);
    CsvWriter w({"x", "re_psi1", "im_psi1", "re_psi2", "im_psi2", "rho", "v"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        w.row({grid.x(i), fin.psi1[i].real(), fin.psi1[i].imag(), fin.psi2[i].real(), fin.psi2[i].imag(), rho[i],
               vel.v[i]});
    ctx.out.write("dirac.csv", w.str());
    ctx.meta["grid"] = grid_json(grid);
    ctx.meta["dt"] = dt;
    ctx.meta["representation"] = "alpha = sigma_1, beta = sigma_3";
    ctx.meta["time"] = fin.time;
}

double normal_cdf(double x, double mean, double var) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

// Classical lattice equation phi'' = lattice Laplacian phi - m^2 phi, RK4.
struct ClassicalLattice {
    std::vector<double> phi, pi;
    double dx, m2;

    std::vector<double> accel(const std::vector<double>& f) const {
        const std::size_t n = f.size();
        std::vector<double> a(n);
        for (std::size_t x = 0; x < n; ++x) {
            const double l = f[(x + n - 1) % n], r = f[(x + 1) % n];
            a[x] = (l - 2.0 * f[x] + r) / (dx * dx) - m2 * f[x];
        }
        return a;
    }
    void step(double h) {
        const std::size_t n = phi.size();
        auto axpy = [n](const std::vector<double>& a, double s, const std::vector<double>& b) {
            std::vector<double> o(n);
            for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + s * b[i];
            return o;
        };
        const auto k1f = pi;
        const auto k1p = accel(phi);
        const auto k2f = axpy(pi, 0.5 * h, k1p);
        const auto k2p = accel(axpy(phi, 0.5 * h, k1f));
        const auto k3f = axpy(pi, 0.5 * h, k2p);
        const auto k3p = accel(axpy(phi, 0.5 * h, k2f));
        const auto k4f = axpy(pi, h, k3p);
        const auto k4p = accel(axpy(phi, h, k3f));
        for (std::size_t i = 0; i < n; ++i) {
            phi[i] += h * (k1f[i] + 2.0 * k2f[i] + 2.0 * k3f[i] + k4f[i]) / 6.0;
            pi[i] += h * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]) / 6.0;
        }
    }
};

void run_field(Context& ctx) {
    const std::size_t n = ctx.count("n_sites");
    const auto modes = lattice_modes(n, ctx.num("dx"), ctx.num("mass_param"));
    const std::string kind = ctx.text("state");
    const std::size_t mode = ctx.count("mode");
    GaussianWavefunctional state0 = ground_state(modes);
    if (kind == "coherent") {
        std::vector<std::complex<double>> alpha(n, 0.0);
        alpha[mode] = {ctx.num("amplitude_re"), ctx.num("amplitude_im")};
        state0 = coherent_state(modes, alpha);
    } else if (kind == "squeezed") {
        std::vector<double> width(n, 1.0);
        width[mode] = ctx.num("squeeze");
        state0 = squeezed_state(modes, width);
    }
    const std::size_t m = ctx.count("m");
    auto beables = sample_field_beables(state0, m, ctx.cfg.seed);
    // Beable 0 starts on the classical configuration (the packet centre).
    Eigen::VectorXd centre(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) centre(static_cast<Eigen::Index>(j)) = state0.factors[j].q_center;
    beables[0].phi = to_sites(modes, centre);
    const auto initial = beables;

    ClassicalLattice classical{beables[0].phi, {}, modes.dx, modes.mass_param * modes.mass_param};
    {
        Eigen::VectorXd p(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            p(static_cast<Eigen::Index>(j)) = state0.factors[j].frozen ? 0.0 : state0.factors[j].p_center / modes.dx;
        classical.pi = to_sites(modes, p);
    }

    const double dt = ctx.num("dt"), t_end = ctx.num("t_end");
    const std::size_t steps = whole_steps(t_end, dt);
    const std::size_t probe_every = steps / ctx.count("probes");
    const std::size_t record_every = ctx.count("record_every");
    constexpr std::size_t classical_sub = 10;
    const double alpha = ctx.num("alpha");

    CsvWriter field_csv({"t", "site", "phi"});
    CsvWriter modes_csv({"t", "mode", "omega", "q_center", "variance", "ks_statistic", "ks_threshold", "pass"});
    auto record = [&](double t) {
        for (std::size_t x = 0; x < n; ++x) field_csv.row({t, static_cast<double>(x), beables[0].phi[x]});
    };
    bool ks_all = true;
    double ks_worst = 0.0;
    auto probe = [&](double t, const GaussianWavefunctional& st) {
        std::vector<Eigen::VectorXd> q(m);
        for (std::size_t r = 0; r < m; ++r) q[r] = to_modes(modes, beables[r].phi);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& f = st.factors[j];
            if (f.frozen) continue;
            std::vector<double> sample(m);
            for (std::size_t r = 0; r < m; ++r) sample[r] = q[r](static_cast<Eigen::Index>(j));
            const double var = f.position_variance();
            const auto ks = ks_test(std::move(sample), [&](double q) { return normal_cdf(q, f.q_center, var); }, alpha);
            modes_csv.row({t, static_cast<double>(j), f.omega, f.q_center, var, ks.statistic, ks.threshold,
                           ks.pass ? 1.0 : 0.0});
            ks_all = ks_all && ks.pass;
            ks_worst = std::max(ks_worst, ks.statistic / ks.threshold);
        }
    };
    record(0.0);
    probe(0.0, state0);
    double track_err = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        const auto st = evolve_wavefunctional(state0, t);
        const auto mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t r = 0; r < mm; ++r)
            beables[static_cast<std::size_t>(r)] = field_guidance_step(beables[static_cast<std::size_t>(r)], st, dt);
        for (std::size_t k = 0; k < classical_sub; ++k) classical.step(dt / classical_sub);
        for (std::size_t x = 0; x < n; ++x) track_err = std::max(track_err, std::abs(beables[0].phi[x] - classical.phi[x]));
        const double t1 = static_cast<double>(s + 1) * dt;
        if ((s + 1) % record_every == 0) record(t1);
        if ((s + 1) % probe_every == 0) probe(t1, evolve_wavefunctional(state0, t1));
    }
    ctx.out.write("field.csv", field_csv.str());
    ctx.out.write("modes.csv", modes_csv.str());

    if (kind == "ground") {
        double moved = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t x = 0; x < n; ++x) moved = std::max(moved, std::abs(beables[r].phi[x] - initial[r].phi[x]));
        ctx.check("ground_state_static", moved == 0.0, moved, 0.0);
    }
    if (kind == "coherent") {
        const double tol = ctx.num("tracking_tol");
        ctx.check("classical_tracking", track_err < tol, track_err, tol, "centre beable vs classical lattice RK4");
    }
    ctx.check("modewise_equivariance", ks_all, ks_worst, 1.0, "worst statistic / threshold over modes and probes");
    ctx.meta["lattice"] = {{"n_sites", n}, {"dx", modes.dx}, {"mass_param", modes.mass_param}, {"periodic", true}};
    ctx.meta["omega"] = modes.omega;
    ctx.meta["units"] = "hbar = c = 1";
}

BellModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"belljump.hamiltonian_file: cannot open " + path});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("{}: syntax error at byte {}: {}", path, e.byte, e.what())});
    }
    std::vector<std::string> bad;
    try {
        const auto dim = doc.at("dim").get<std::size_t>();
        const auto& hre = doc.at("hamiltonian").at("re");
        const auto& him = doc.at("hamiltonian").at("im");
        const auto& sre = doc.at("initial_state").at("re");
        const auto& sim = doc.at("initial_state").at("im");
        const auto& labs = doc.at("labels");
        if (hre.size() != dim || him.size() != dim || sre.size() != dim || sim.size() != dim || labs.size() != dim)
            throw ConfigError({path + ": every array must have length dim = " + std::to_string(dim)});
        Eigen::MatrixXcd h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        Eigen::VectorXcd psi(static_cast<Eigen::Index>(dim));
        std::vector<BasisLabel> labels;
        for (std::size_t a = 0; a < dim; ++a) {
            if (hre[a].size() != dim || him[a].size() != dim)
                throw ConfigError({fmt::format("{}: hamiltonian row {} must have length {}", path, a, dim)});
            for (std::size_t b = 0; b < dim; ++b)
                h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = {hre[a][b].get<double>(),
                                                                                   him[a][b].get<double>()};
            psi(static_cast<Eigen::Index>(a)) = {sre[a].get<double>(), sim[a].get<double>()};
            labels.push_back({BeableConfig{labs[a].at("n").get<std::vector<int>>()}, labs[a].value("q", 0)});
        }
        BellModel model{"file", FockBasis(std::move(labels)), QuantumState{psi, h}};
        validate(model.state, model.basis);
        return model;
    } catch (const json::exception& e) {
        throw ConfigError({path + ": " + e.what()});
    } catch (const PreconditionError& e) {
        throw ConfigError({path + ": " + e.what()});
    }
}

void run_belljump(Context& ctx) {
    const std::string name = ctx.text("model");
    const BellModel model = name == "two_level"       ? two_level_model()
                            : name == "fermion_chain" ? fermion_chain_model()
                                                      : load_model(ctx.text("hamiltonian_file"));
    validate(model.state, model.basis);
    const ExactEvolution evo(model.state);
    const double t_end = ctx.num("t_end"), floor = ctx.num("rate_floor");
    const auto table = build_rate_table(evo, model.basis, t_end, ctx.num("dt_max"), floor);
    const auto p0 = marginal_P(model.state.amplitudes, model.basis);
    const auto ens = simulate_jump_ensemble(table, p0, ctx.count("m"), t_end, ctx.cfg.seed);

    const auto& basis = model.basis;
    CsvWriter events({"run_id", "t", "from", "to"});
    for (const auto& run : ens)
        for (const auto& e : run.events)
            events.row_text({std::to_string(run.run_id), format_number(e.time), basis.config(e.from).label(),
                             basis.config(e.to).label()});
    ctx.out.write("events.csv", events.str());

    const auto probes = probe_times(t_end, ctx.count("probes"));
    const auto occ = ensemble_vs_marginal(ens, evo, basis, probes);
    CsvWriter occupation({"t", "config", "empirical", "exact", "total_variation", "band"});
    double flux_worst = 0.0;
    for (const auto& chk : occ) {
        for (std::size_t c = 0; c < basis.n_configs(); ++c) {
            const auto ci = static_cast<Eigen::Index>(c);
            occupation.row_text({format_number(chk.t), basis.config(c).label(), format_number(chk.empirical(ci)),
                                 format_number(chk.exact(ci)), format_number(chk.total_variation),
                                 format_number(chk.band)});
        }
        ctx.check(probe_name("jump_equivariance", chk.t), chk.pass, chk.total_variation, chk.band);
        const auto psi = evo.at(chk.t);
        const auto p = marginal_P(psi, basis);
        const auto j = current_J(psi, evo.hamiltonian(), basis);
        const auto rates = jump_rates(p, j, floor);
        for (Eigen::Index a = 0; a < p.size(); ++a)
            for (Eigen::Index b = 0; b < p.size(); ++b)
                if (a != b && p(a) > floor && p(b) > floor)
                    flux_worst = std::max(flux_worst, std::abs(j(a, b) - (rates(a, b) * p(b) - rates(b, a) * p(a))));
    }
    ctx.out.write("occupation.csv", occupation.str());
    ctx.check("flux_identity", flux_worst < 1e-10, flux_worst, 1e-10);

    CsvWriter exact({"t", "config", "P"});
    const std::size_t ns = ctx.count("exact_samples");
    for (std::size_t k = 0; k < ns; ++k) {
        const double t = t_end * static_cast<double>(k) / static_cast<double>(ns - 1);
        const auto p = marginal_P(evo.at(t), basis);
        for (std::size_t c = 0; c < basis.n_configs(); ++c)
            exact.row_text({format_number(t), basis.config(c).label(), format_number(p(static_cast<Eigen::Index>(c)))});
    }
    ctx.out.write("exact.csv", exact.str());

    std::size_t n_events = 0;
    for (const auto& r : ens) n_events += r.events.size();
    json configs = json::array();
    for (std::size_t c = 0; c < basis.n_configs(); ++c) configs.push_back(basis.config(c).label());
    ctx.meta["model"] = model.name;
    ctx.meta["dim"] = basis.dim();
    ctx.meta["configurations"] = configs;
    ctx.meta["rate_mesh_points"] = table.times.size();
    ctx.meta["events"] = n_events;
    ctx.meta["units"] = "hbar = 1";
}

void run_relax(Context& ctx) {
    const double length = ctx.num("box_length");
    const Grid1D grid(ctx.count("n_points"), 0.0, length, Boundary::reflecting);
    const double mass = ctx.num("mass"), hbar = ctx.num("hbar");
    GridWavefunction psi{grid, std::vector<cplx>(grid.size()), mass, hbar, 0.0};
    auto rng = stream_rng(ctx.cfg.seed, 0x7e1a7ULL);
    const std::size_t n_modes = ctx.count("n_modes");
    std::vector<double> phases(n_modes);
    for (auto& ph : phases) ph = 2.0 * std::numbers::pi * uniform01(rng);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t k = 1; k <= n_modes; ++k)
            psi.amplitudes[i] += std::polar(1.0, phases[k - 1]) *
                                 std::sin(static_cast<double>(k) * std::numbers::pi * grid.x(i) / length);
    normalize(psi);

    const double dt = ctx.num("dt"), snap = ctx.num("snapshot_dt"), t_end = ctx.num("t_end");
    const std::size_t sub = whole_steps(snap, dt);
    const auto states = evolve_timeline(psi, Potential::zero(grid), dt, sub * whole_steps(t_end, snap), sub);
    const auto tl = make_timeline(states);

    const std::vector<double> flat(grid.size(), 1.0);
    const auto q0 = sample_density(grid, flat, ctx.count("m"), ctx.cfg.seed);
    IntegratorOptions opts;
    opts.seed = ctx.cfg.seed;
    opts.record_every = ctx.count("record_every");
    const auto ens = integrate_trajectories(tl, q0.positions, opts);
    const CoarseGraining cg(grid, ctx.count("cells"));
    const auto series = relaxation_diagnostic(ens, tl, cg);

    CsvWriter w({"t", "l1", "entropy"});
    for (const auto& p : series) w.row({p.t, p.l1, p.relative_entropy});
    ctx.out.write("relaxation.csv", w.str());
    ctx.out.write("trajectories.csv", trajectories_csv(ens, ctx.count("export_trajectories")));
    ctx.check("relaxation_decrease", series.back().l1 < series.front().l1, series.back().l1, series.front().l1,
              "coarse-grained L1 at t_end must fall below its initial value");
    ctx.meta["grid"] = grid_json(grid);
    ctx.meta["scheme"] = "crank_nicolson";
    ctx.meta["phases"] = phases;
    ctx.meta["flagged"] = ens.flagged_count();
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    RunResult result;
    result.output_dir = cfg.output_dir;
    const auto start = std::chrono::steady_clock::now();
    Context ctx{cfg, io::OutputDir(cfg.output_dir), {}, json::object()};
    json error = nullptr;
    try {
        switch (cfg.scenario) {
        case ScenarioKind::evolve: run_evolve(ctx); break;
        case ScenarioKind::trajectories: run_trajectories(ctx); break;
        case ScenarioKind::measure: run_measure(ctx); break;
        case ScenarioKind::dirac: run_dirac(ctx); break;
        case ScenarioKind::field: run_field(ctx); break;
        case ScenarioKind::belljump: run_belljump(ctx); break;
        case ScenarioKind::relax: run_relax(ctx); break;
        }
        const bool ok = std::all_of(ctx.checks.begin(), ctx.checks.end(), [](const CheckResult& c) { return c.pass; });
        result.exit_code = ok ? 0 : 1;
    } catch (const ConfigError& e) {
        error = {{"kind", "config"}, {"message", e.what()}, {"violations", e.violations()}};
        result.exit_code = 2;
    } catch (const std::exception& e) {
        error = {{"kind", "runtime"}, {"message", fmt::format("{} scenario: {}", to_string(cfg.scenario), e.what())}};
        result.exit_code = 3;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json checks = json::array();
    for (const auto& c : ctx.checks)
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"detail", c.detail}});
    json files = json::array();
    for (const auto& f : ctx.out.files()) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    json units = {{"hbar", cfg.params.value("hbar", 1.0)}};
    if (cfg.params.contains("mass")) units["mass"] = cfg.params.at("mass");
    result.manifest = {{"tool", "pilotwave"},
                       {"version", std::string(tool_version)},
                       {"scenario", std::string(to_string(cfg.scenario))},
                       {"seed", cfg.seed},
                       {"config", cfg.echo()},
                       {"units", units},
                       {"wall_clock_seconds", seconds},
                       {"checks", checks},
                       {"pass", result.exit_code == 0},
                       {"exit_code", result.exit_code},
                       {"metadata", ctx.meta},
                       {"files", files}};
    if (!error.is_null()) result.manifest["error"] = error;
    io::write_file_atomic(ctx.out.root() / "manifest.json", result.manifest.dump(2) + "\n");
    result.checks = std::move(ctx.checks);
    result.files = ctx.out.files();
    return result;
}

RunResult run_selftest(const std::filesystem::path& output_dir, std::uint64_t seed) {
    const std::map<ScenarioKind, json> reduced = {
        {ScenarioKind::evolve, {{"n_points", 256}, {"t_end", 0.5}}},
        {ScenarioKind::trajectories, {{"n_points", 512}, {"m", 2000}, {"t_end", 1.0}, {"export_trajectories", 20}}},
        {ScenarioKind::measure, {{"m", 2000}, {"weight1", 0.5}, {"n_points", 512}}},
        {ScenarioKind::dirac, {{"m", 2000}, {"t_end", 4.0}, {"n_points", 512}, {"random_fields", 100}}},
        {ScenarioKind::field, {{"n_sites", 8}, {"m", 500}, {"t_end", 2.0}}},
        {ScenarioKind::belljump, {{"m", 2000}}},
        {ScenarioKind::relax, {{"n_points", 256}, {"m", 4000}, {"dt", 1e-4}}},
    };
    RunResult total;
    total.output_dir = output_dir;
    json runs = json::array();
    for (const auto& [kind, block] : reduced) {
        ScenarioConfig cfg;
        cfg.scenario = kind;
        cfg.seed = seed;
        cfg.output_dir = (output_dir / std::string(to_string(kind))).string();
        cfg.params = block;
        validate(cfg);
        const auto r = run_scenario(cfg);
        total.exit_code = std::max(total.exit_code, r.exit_code);
        for (auto c : r.checks) {
            c.name = std::string(to_string(kind)) + "/" + c.name;
            total.checks.push_back(std::move(c));
        }
        runs.push_back({{"scenario", std::string(to_string(kind))},
                        {"exit_code", r.exit_code},
                        {"manifest", std::string(to_string(kind)) + "/manifest.json"}});
    }
    total.manifest = {{"tool", "pilotwave"},
                      {"version", std::string(tool_version)},
                      {"selftest", runs},
                      {"pass", total.exit_code == 0},
                      {"exit_code", total.exit_code}};
    std::filesystem::create_directories(output_dir);
    io::write_file_atomic(output_dir / "selftest.json", total.manifest.dump(2) + "\n");
    return total;
}

}  // namespace pilotwave
