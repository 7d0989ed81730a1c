#include "pilotwave/field.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "pilotwave/errors.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

using std::numbers::pi;

LatticeModes lattice_modes(std::size_t n_sites, double dx, double mass_param) {
    if (n_sites == 0) throw PreconditionError("lattice needs at least one site");
    if (!(dx > 0.0) || !(mass_param >= 0.0)) throw PreconditionError("lattice needs dx > 0 and mass >= 0");
    LatticeModes out;
    out.n_sites = n_sites;
    out.dx = dx;
    out.mass_param = mass_param;
    out.basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_sites), static_cast<Eigen::Index>(n_sites));
    out.omega.resize(n_sites);
    out.zero_mode.assign(n_sites, 0);
    const auto n = static_cast<double>(n_sites);
    for (std::size_t j = 0; j < n_sites; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        for (std::size_t x = 0; x < n_sites; ++x) {
            const auto xx = static_cast<Eigen::Index>(x);
            const double xd = static_cast<double>(x);
            double val;
            if (j == 0) val = 1.0 / std::sqrt(n);
            else if (2 * j == n_sites) val = (x % 2 == 0 ? 1.0 : -1.0) / std::sqrt(n);
            else if (2 * j < n_sites) val = std::sqrt(2.0 / n) * std::cos(2.0 * pi * static_cast<double>(j) * xd / n);
            else val = std::sqrt(2.0 / n) * std::sin(2.0 * pi * static_cast<double>(n_sites - j) * xd / n);
            out.basis(xx, jj) = val;
        }
        const double s = std::sin(pi * static_cast<double>(j) / n);
        const double w2 = mass_param * mass_param + (2.0 / dx) * (2.0 / dx) * s * s;
        out.omega[j] = std::sqrt(w2);
        out.zero_mode[j] = out.omega[j] == 0.0 ? 1 : 0;
    }
    return out;
}

std::complex<double> GaussianMode::coherent_amplitude() const {
    const double mw = mode_mass * omega;
    return std::sqrt(0.5 * mw) * std::complex<double>(q_center, p_center / mw);
}

std::complex<double> GaussianMode::amplitude(double q) const {
    const auto a = width_coefficient();
    const double u = q - q_center;
    const double norm = std::pow(2.0 * a.real() / pi, 0.25);
    return norm * std::exp(-a * u * u + std::complex<double>(0.0, p_center * u + phase));
}

double GaussianMode::velocity(double q) const {
    if (frozen) return 0.0;
    return (p_center - 2.0 * width_coefficient().imag() * (q - q_center)) / mode_mass;
}

namespace {

GaussianWavefunctional make_state(const LatticeModes& modes) {
    GaussianWavefunctional s{modes, std::vector<GaussianMode>(modes.n_sites), 0.0};
    for (std::size_t j = 0; j < modes.n_sites; ++j) {
        auto& f = s.factors[j];
        f.omega = modes.omega[j];
        f.mode_mass = modes.dx;
        f.frozen = modes.zero_mode[j] != 0;
    }
    return s;
}

}  // namespace

GaussianWavefunctional ground_state(const LatticeModes& modes) { return make_state(modes); }

GaussianWavefunctional coherent_state(const LatticeModes& modes, const std::vector<std::complex<double>>& alpha) {
    if (alpha.size() != modes.n_sites) throw PreconditionError("need one coherent amplitude per mode");
    auto s = make_state(modes);
    for (std::size_t j = 0; j < modes.n_sites; ++j) {
        auto& f = s.factors[j];
        if (f.frozen) continue;
        const double mw = f.mode_mass * f.omega;
        f.q_center = alpha[j].real() / std::sqrt(0.5 * mw);
        f.p_center = alpha[j].imag() * mw / std::sqrt(0.5 * mw);
    }
    return s;
}

GaussianWavefunctional squeezed_state(const LatticeModes& modes, const std::vector<double>& width) {
    if (width.size() != modes.n_sites) throw PreconditionError("need one width per mode");
    auto s = make_state(modes);
    for (std::size_t j = 0; j < modes.n_sites; ++j) {
        if (!(width[j] > 0.0)) throw PreconditionError("squeeze width must be positive");
        s.factors[j].width = width[j];
    }
    return s;
}

GaussianMode evolve_mode(const GaussianMode& mode, double t) {
    if (mode.frozen || t == 0.0) return mode;
    GaussianMode out = mode;
    const double theta = mode.omega * t;
    const double c = std::cos(theta), s = std::sin(theta);
    const std::complex<double> i{0.0, 1.0};
    const auto a0 = mode.width;
    // a' = i omega (1 - a^2) has the Mobius solution below; D = cos + i a0 sin.
    const std::complex<double> d = c + i * a0 * s;
    // Conjugate form keeps a0 = 1 at exactly 1 + 0i.
    const std::complex<double> num = a0 * c + i * s;
    const double dd = d.real() * d.real() + d.imag() * d.imag();
    out.width = {(num.real() * d.real() + num.imag() * d.imag()) / dd,
                 (num.imag() * d.real() - num.real() * d.imag()) / dd};
    const double mw = mode.mode_mass * mode.omega;
    out.q_center = mode.q_center * c + mode.p_center / mw * s;
    out.p_center = mode.p_center * c - mw * mode.q_center * s;
    // phase' = -Re A / M + L; int Re A dt / M = arg(D) / 2 (continuous), int L dt = [p q] / 2.
    const double m = std::round(theta / pi);
    const std::complex<double> d_shift = d * ((static_cast<long long>(m) % 2 == 0) ? 1.0 : -1.0);
    const double arg_d = m * pi + std::arg(d_shift);
    out.phase = mode.phase - 0.5 * arg_d + 0.5 * (out.p_center * out.q_center - mode.p_center * mode.q_center);
    return out;
}

GaussianWavefunctional evolve_wavefunctional(const GaussianWavefunctional& state, double t) {
    GaussianWavefunctional out = state;
    for (auto& f : out.factors) f = evolve_mode(f, t);
    out.time = state.time + t;
    return out;
}

Eigen::VectorXd to_modes(const LatticeModes& modes, const std::vector<double>& phi) {
    if (phi.size() != modes.n_sites) throw PreconditionError("field size does not match lattice");
    const Eigen::Map<const Eigen::VectorXd> v(phi.data(), static_cast<Eigen::Index>(phi.size()));
    return modes.basis.transpose() * v;
}

std::vector<double> to_sites(const LatticeModes& modes, const Eigen::VectorXd& q) {
    const Eigen::VectorXd phi = modes.basis * q;
    return {phi.data(), phi.data() + phi.size()};
}

LatticeField field_guidance_step(const LatticeField& beable, const GaussianWavefunctional& state, double dt) {
    if (!(dt > 0.0)) throw PreconditionError("field guidance step needs dt > 0");
    const auto& modes = state.modes;
    if (beable.n_sites != modes.n_sites || beable.phi.size() != modes.n_sites)
        throw PreconditionError("beable does not match the wavefunctional's lattice");
    const Eigen::VectorXd q = to_modes(modes, beable.phi);
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(q.size());
    bool moved = false;
    for (std::size_t j = 0; j < modes.n_sites; ++j) {
        const auto& f0 = state.factors[j];
        if (f0.frozen) continue;
        const auto half = evolve_mode(f0, 0.5 * dt);
        const auto full = evolve_mode(f0, dt);
        const auto jj = static_cast<Eigen::Index>(j);
        const double x = q(jj);
        const double k1 = f0.velocity(x);
        const double k2 = half.velocity(x + 0.5 * dt * k1);
        const double k3 = half.velocity(x + 0.5 * dt * k2);
        const double k4 = full.velocity(x + dt * k3);
        dq(jj) = dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        moved = moved || dq(jj) != 0.0;
    }
    LatticeField out = beable;
    if (!moved) return out;
    const Eigen::VectorXd dphi = modes.basis * dq;
    for (std::size_t x = 0; x < out.phi.size(); ++x) out.phi[x] += dphi(static_cast<Eigen::Index>(x));
    return out;
}

std::vector<LatticeField> sample_field_beables(const GaussianWavefunctional& state, std::size_t m,
                                               std::uint64_t seed) {
    const auto& modes = state.modes;
    std::vector<LatticeField> out(m);
    for (std::size_t r = 0; r < m; ++r) {
        auto rng = stream_rng(seed, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(modes.n_sites));
        for (std::size_t j = 0; j < modes.n_sites; ++j) {
            const auto& f = state.factors[j];
            if (f.frozen) continue;
            q(static_cast<Eigen::Index>(j)) = f.q_center + std::sqrt(f.position_variance()) * normal(rng);
        }
        out[r] = LatticeField{modes.n_sites, modes.dx, modes.mass_param, to_sites(modes, q)};
    }
    return out;
}

}  // namespace pilotwave
