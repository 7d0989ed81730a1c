#include "pilotwave/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "pilotwave/errors.hpp"

namespace pilotwave {

std::string_view to_string(Scheme s) {
    return s == Scheme::split_operator ? "split_operator" : "crank_nicolson";
}

double default_dt(const Grid1D& grid, double mass, double hbar) {
    return 0.1 * mass * grid.dx() * grid.dx() / hbar;
}

struct SchrodingerStepper::Impl {
    Grid1D grid;
    Potential potential;
    double dt;
    double mass;
    double hbar;
    Scheme scheme;

    // split operator
    std::vector<cplx> half_potential_phase;
    std::vector<cplx> kinetic_phase;
    std::unique_ptr<detail::FftPlan> fft;

    // Crank-Nicolson: (1 + i tau H) psi' = (1 - i tau H) psi, H tridiagonal.
    std::vector<cplx> lhs_diag, rhs_diag;
    cplx lhs_off, rhs_off;
    std::vector<cplx> thomas_c;      // modified super-diagonal
    std::vector<cplx> thomas_denom;  // pivots
    std::vector<cplx> work;

    Impl(const Grid1D& g, Potential v, double dt_, double m, double h)
        : grid(g), potential(std::move(v)), dt(dt_), mass(m), hbar(h),
          scheme(g.periodic() ? Scheme::split_operator : Scheme::crank_nicolson) {
        const std::size_t n = grid.size();
        if (potential.values.size() != n) throw PreconditionError("potential size does not match grid");
        for (double x : potential.values)
            if (!std::isfinite(x)) throw PreconditionError("potential has non-finite values");
        if (!(dt >= 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be finite and >= 0");
        if (!(mass > 0.0) || !(hbar > 0.0)) throw PreconditionError("mass and hbar must be positive");
        if (scheme == Scheme::split_operator) {
            half_potential_phase.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                half_potential_phase[i] = std::polar(1.0, -0.5 * potential.values[i] * dt / hbar);
            const auto k = detail::fft_wavenumbers(n, grid.length());
            kinetic_phase.resize(n);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                kinetic_phase[i] = inv_n * std::polar(1.0, -hbar * k[i] * k[i] * dt / (2.0 * mass));
            fft = std::make_unique<detail::FftPlan>(n);
        } else {
            const double tau = dt / (2.0 * hbar);
            const double kin = hbar * hbar / (2.0 * mass * grid.dx() * grid.dx());
            lhs_diag.resize(n);
            rhs_diag.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                // Odd mirror ghosts put the walls exactly at x_min and x_max.
                const double diag = (i == 0 || i == n - 1 ? 3.0 : 2.0) * kin + potential.values[i];
                lhs_diag[i] = cplx(1.0, tau * diag);
                rhs_diag[i] = cplx(1.0, -tau * diag);
            }
            lhs_off = cplx(0.0, -tau * kin);
            rhs_off = cplx(0.0, tau * kin);
            thomas_c.resize(n);
            thomas_denom.resize(n);
            thomas_denom[0] = lhs_diag[0];
            thomas_c[0] = lhs_off / thomas_denom[0];
            for (std::size_t i = 1; i < n; ++i) {
                thomas_denom[i] = lhs_diag[i] - lhs_off * thomas_c[i - 1];
                thomas_c[i] = lhs_off / thomas_denom[i];
            }
            work.resize(n);
        }
    }

    void split_step(std::vector<cplx>& a) {
        const std::size_t n = a.size();
        cplx* buf = fft->data();
        for (std::size_t i = 0; i < n; ++i) buf[i] = a[i] * half_potential_phase[i];
        fft->forward();
        for (std::size_t i = 0; i < n; ++i) buf[i] *= kinetic_phase[i];
        fft->backward();
        for (std::size_t i = 0; i < n; ++i) a[i] = buf[i] * half_potential_phase[i];
    }

    void cn_step(std::vector<cplx>& a) {
        const std::size_t n = a.size();
        // right-hand side
        for (std::size_t i = 0; i < n; ++i) {
            cplx r = rhs_diag[i] * a[i];
            if (i > 0) r += rhs_off * a[i - 1];
            if (i + 1 < n) r += rhs_off * a[i + 1];
            work[i] = r;
        }
        work[0] /= thomas_denom[0];
        for (std::size_t i = 1; i < n; ++i) work[i] = (work[i] - lhs_off * work[i - 1]) / thomas_denom[i];
        a[n - 1] = work[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) a[i] = work[i] - thomas_c[i] * a[i + 1];
    }
};

SchrodingerStepper::SchrodingerStepper(const Grid1D& grid, Potential potential, double dt, double mass,
                                       double hbar)
    : impl_(std::make_unique<Impl>(grid, std::move(potential), dt, mass, hbar)) {}

SchrodingerStepper::~SchrodingerStepper() = default;
SchrodingerStepper::SchrodingerStepper(SchrodingerStepper&&) noexcept = default;
SchrodingerStepper& SchrodingerStepper::operator=(SchrodingerStepper&&) noexcept = default;

Scheme SchrodingerStepper::scheme() const noexcept { return impl_->scheme; }
double SchrodingerStepper::dt() const noexcept { return impl_->dt; }

void SchrodingerStepper::step_in_place(GridWavefunction& psi) {
    if (!(psi.grid == impl_->grid)) throw PreconditionError("wavefunction grid does not match stepper grid");
    if (psi.mass != impl_->mass || psi.hbar != impl_->hbar)
        throw PreconditionError("wavefunction mass/hbar do not match stepper");
    if (impl_->dt == 0.0) return;
    const double before = squared_norm(psi);
    if (impl_->scheme == Scheme::split_operator)
        impl_->split_step(psi.amplitudes);
    else
        impl_->cn_step(psi.amplitudes);
    psi.time += impl_->dt;
    const double after = squared_norm(psi);
    if (!std::isfinite(after)) throw NumericalError("non-finite amplitudes after step at t = " + std::to_string(psi.time));
    if (before > 0.0 && std::abs(after - before) / before > max_norm_drift)
        throw NumericalError("per-step norm drift " + std::to_string(std::abs(after - before) / before) +
                             " exceeds tolerance; reduce dt");
}

GridWavefunction SchrodingerStepper::step(const GridWavefunction& psi) {
    GridWavefunction out = psi;
    step_in_place(out);
    return out;
}

GridWavefunction step_schrodinger(const GridWavefunction& psi, const Potential& v, double dt) {
    SchrodingerStepper stepper(psi.grid, v, dt, psi.mass, psi.hbar);
    return stepper.step(psi);
}

std::vector<GridWavefunction> evolve_timeline(const GridWavefunction& psi0, const Potential& v, double dt,
                                              std::size_t n_steps, std::size_t save_every) {
    if (save_every == 0) throw PreconditionError("save_every must be >= 1");
    SchrodingerStepper stepper(psi0.grid, v, dt, psi0.mass, psi0.hbar);
    std::vector<GridWavefunction> out;
    out.reserve(n_steps / save_every + 1);
    GridWavefunction psi = psi0;
    out.push_back(psi);
    const double t0 = psi0.time;
    for (std::size_t s = 1; s <= n_steps; ++s) {
        stepper.step_in_place(psi);
        // Avoid accumulated round-off in the time stamps.
        psi.time = t0 + static_cast<double>(s) * dt;
        if (s % save_every == 0) out.push_back(psi);
    }
    return out;
}

}  // namespace pilotwave
