#include "pilotwave/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "pilotwave/errors.hpp"

namespace pilotwave {

double squared_norm(const DiracSpinor& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.psi1.size(); ++i) acc += std::norm(s.psi1[i]) + std::norm(s.psi2[i]);
    return acc * s.grid.dx();
}

std::vector<double> dirac_density(const DiracSpinor& s) {
    std::vector<double> rho(s.psi1.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(s.psi1[i]) + std::norm(s.psi2[i]);
    return rho;
}

std::vector<double> dirac_current(const DiracSpinor& s) {
    std::vector<double> j(s.psi1.size());
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = 2.0 * s.c * (std::conj(s.psi1[i]) * s.psi2[i]).real();
    return j;
}

double dirac_energy(double p, double mass, double c) { return std::sqrt(p * p * c * c + mass * mass * c * c * c * c); }

namespace {

// Normalised positive-energy eigenvector of [[m c^2, c k], [c k, -m c^2]].
std::pair<double, double> positive_spinor(double k, double mass, double c) {
    const double e = dirac_energy(k, mass, c);
    const double mc2 = mass * c * c;
    double u1 = e + mc2, u2 = c * k;
    if (u1 == 0.0 && u2 == 0.0) u1 = 1.0;  // m = 0, k = 0
    const double n = std::hypot(u1, u2);
    return {u1 / n, u2 / n};
}

void normalize(DiracSpinor& s) {
    const double scale = 1.0 / std::sqrt(squared_norm(s));
    for (auto& z : s.psi1) z *= scale;
    for (auto& z : s.psi2) z *= scale;
}

}  // namespace

DiracSpinor positive_energy_plane_wave(const Grid1D& grid, double k, double mass, double c) {
    const auto [u1, u2] = positive_spinor(k, mass, c);
    DiracSpinor s{grid, std::vector<cplx>(grid.size()), std::vector<cplx>(grid.size()), mass, c, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx e = std::polar(1.0, k * grid.x(i));
        s.psi1[i] = u1 * e;
        s.psi2[i] = u2 * e;
    }
    normalize(s);
    return s;
}

DiracSpinor positive_energy_packet(const Grid1D& grid, double x0, double sigma, double k0, double mass, double c) {
    if (!grid.periodic()) throw PreconditionError("Dirac packets need a periodic grid");
    const auto scalar = init_gaussian(grid, x0, sigma, k0);
    const std::size_t n = grid.size();
    const auto k = detail::fft_wavenumbers(n, grid.length());
    detail::FftPlan fft(n);
    std::copy(scalar.amplitudes.begin(), scalar.amplitudes.end(), fft.data());
    fft.forward();
    const std::vector<cplx> spectrum(fft.data(), fft.data() + n);
    DiracSpinor s{grid, std::vector<cplx>(n), std::vector<cplx>(n), mass, c, 0.0};
    for (int comp = 0; comp < 2; ++comp) {
        cplx* buf = fft.data();
        for (std::size_t i = 0; i < n; ++i) {
            const auto [u1, u2] = positive_spinor(k[i], mass, c);
            buf[i] = spectrum[i] * (comp == 0 ? u1 : u2);
        }
        fft.backward();
        std::copy(buf, buf + n, comp == 0 ? s.psi1.begin() : s.psi2.begin());
    }
    normalize(s);
    return s;
}

struct DiracStepper::Impl {
    Grid1D grid;
    double mass, c, dt;
    cplx half_mass_upper, half_mass_lower;
    std::vector<double> cos_k, sin_k;
    detail::FftPlan fft1, fft2;

    Impl(const Grid1D& g, double m, double c_, double dt_)
        : grid(g), mass(m), c(c_), dt(dt_), fft1(g.size()), fft2(g.size()) {
        const double mc2 = mass * c * c;
        half_mass_upper = std::polar(1.0, -0.5 * mc2 * dt);
        half_mass_lower = std::polar(1.0, 0.5 * mc2 * dt);
        const auto k = detail::fft_wavenumbers(g.size(), g.length());
        cos_k.resize(k.size());
        sin_k.resize(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
            cos_k[i] = std::cos(c * k[i] * dt);
            sin_k[i] = std::sin(c * k[i] * dt);
        }
    }

    void step(DiracSpinor& s) {
        const std::size_t n = grid.size();
        cplx* a = fft1.data();
        cplx* b = fft2.data();
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = s.psi1[i] * half_mass_upper;
            b[i] = s.psi2[i] * half_mass_lower;
        }
        fft1.forward();
        fft2.forward();
        const double inv_n = 1.0 / static_cast<double>(n);
        const cplx minus_i{0.0, -1.0};
        for (std::size_t i = 0; i < n; ++i) {
            // exp(-i theta sigma_1) = cos theta - i sin theta sigma_1
            const cplx x = a[i], y = b[i];
            a[i] = inv_n * (cos_k[i] * x + minus_i * sin_k[i] * y);
            b[i] = inv_n * (minus_i * sin_k[i] * x + cos_k[i] * y);
        }
        fft1.backward();
        fft2.backward();
        for (std::size_t i = 0; i < n; ++i) {
            s.psi1[i] = a[i] * half_mass_upper;
            s.psi2[i] = b[i] * half_mass_lower;
        }
    }
};

DiracStepper::DiracStepper(const Grid1D& grid, double mass, double c, double dt) {
    if (!grid.periodic()) throw PreconditionError("Dirac stepping needs a periodic grid");
    if (!(c > 0.0) || !(mass >= 0.0)) throw PreconditionError("Dirac stepping needs c > 0 and mass >= 0");
    if (!(dt >= 0.0)) throw PreconditionError("dt must be >= 0");
    if (c * dt > grid.dx())
        throw PreconditionError("CFL bound violated: c dt = " + std::to_string(c * dt) + " > dx = " +
                                std::to_string(grid.dx()));
    impl_ = std::make_unique<Impl>(grid, mass, c, dt);
}

DiracStepper::~DiracStepper() = default;
DiracStepper::DiracStepper(DiracStepper&&) noexcept = default;
DiracStepper& DiracStepper::operator=(DiracStepper&&) noexcept = default;

double DiracStepper::dt() const noexcept { return impl_->dt; }

void DiracStepper::step_in_place(DiracSpinor& psi) {
    if (!(psi.grid == impl_->grid) || psi.mass != impl_->mass || psi.c != impl_->c)
        throw PreconditionError("spinor does not match the stepper's grid or constants");
    if (impl_->dt == 0.0) return;
    const double before = squared_norm(psi);
    impl_->step(psi);
    psi.time += impl_->dt;
    const double after = squared_norm(psi);
    if (!std::isfinite(after)) throw NumericalError("non-finite Dirac spinor after step");
    if (std::abs(after - before) > 1e-10 * before) throw NumericalError("Dirac step norm drift above tolerance");
}

DiracSpinor dirac_step(const DiracSpinor& psi, double dt) {
    DiracStepper stepper(psi.grid, psi.mass, psi.c, dt);
    DiracSpinor out = psi;
    stepper.step_in_place(out);
    return out;
}

VelocityField dirac_velocity(const DiracSpinor& s, double node_eps) {
    const auto rho = dirac_density(s);
    if (node_eps <= 0.0) node_eps = default_node_eps(rho);
    VelocityField out{s.grid, std::vector<double>(rho.size(), 0.0), std::vector<std::uint8_t>(rho.size(), 0)};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] >= node_eps) || rho[i] == 0.0) {
            out.node_mask[i] = 1;
            continue;
        }
        const double ratio = 2.0 * (std::conj(s.psi1[i]) * s.psi2[i]).real() / rho[i];
        out.v[i] = s.c * std::clamp(ratio, -1.0, 1.0);
    }
    return out;
}

DiracTimeline evolve_dirac_timeline(const DiracSpinor& psi0, double dt, std::size_t n_steps, std::size_t save_every) {
    if (save_every == 0) throw PreconditionError("save_every must be >= 1");
    DiracStepper stepper(psi0.grid, psi0.mass, psi0.c, dt);
    DiracTimeline tl{{}, FlowTimeline{psi0.grid, {}, {}, {}}};
    DiracSpinor psi = psi0;
    auto record = [&] {
        append_snapshot(tl.flow, psi.time, dirac_density(psi), dirac_velocity(psi));
        tl.snapshots.push_back(psi);
    };
    record();
    for (std::size_t s = 1; s <= n_steps; ++s) {
        stepper.step_in_place(psi);
        psi.time = psi0.time + static_cast<double>(s) * dt;
        if (s % save_every == 0) record();
    }
    return tl;
}

}  // namespace pilotwave
