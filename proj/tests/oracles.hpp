#pragma once
// Independent reference computations for the tests. Nothing here calls into
// the library's numerical kernels.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule of f on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Free gaussian packet psi(x, t) with initial width sigma, centre x0, wavenumber k0.
struct FreeGaussian {
    double x0 = 0.0, sigma = 1.0, k0 = 0.0, mass = 1.0, hbar = 1.0;

    double tau(double t) const { return hbar * t / (2.0 * mass * sigma * sigma); }
    double group_velocity() const { return hbar * k0 / mass; }
    double width(double t) const { return sigma * std::sqrt(1.0 + tau(t) * tau(t)); }
    double centre(double t) const { return x0 + group_velocity() * t; }

    cplx psi(double x, double t) const {
        const cplx a(1.0, tau(t));
        const double u = x - centre(t);
        return std::pow(2.0 * pi * sigma * sigma, -0.25) / std::sqrt(a) *
               std::exp(-u * u / (4.0 * sigma * sigma * a) + cplx(0.0, k0 * (x - 0.5 * group_velocity() * t)));
    }
    double rho(double x, double t) const { return std::norm(psi(x, t)); }
    double velocity(double x, double t) const {
        const double tt = tau(t);
        return group_velocity() + (x - centre(t)) * hbar * tt / (2.0 * mass * sigma * sigma * (1.0 + tt * tt));
    }
    double trajectory(double q0, double t) const { return centre(t) + (q0 - x0) * std::sqrt(1.0 + tau(t) * tau(t)); }
    double cdf(double x, double t) const { return 0.5 * std::erfc(-(x - centre(t)) / (std::sqrt(2.0) * width(t))); }
};

/// Harmonic-oscillator coherent state: gaussian of the ground-state width whose
/// centre follows the classical orbit.
struct HoCoherent {
    double omega = 1.0, mass = 1.0, hbar = 1.0, q0 = 1.0, p0 = 0.0;

    double qc(double t) const { return q0 * std::cos(omega * t) + p0 / (mass * omega) * std::sin(omega * t); }
    double pc(double t) const { return p0 * std::cos(omega * t) - mass * omega * q0 * std::sin(omega * t); }
    cplx psi(double x, double t) const {
        const double a = mass * omega / (2.0 * hbar);
        const double u = x - qc(t);
        // Global phase: -omega t / 2 plus the classical action term.
        const double phase = pc(t) * u / hbar - 0.5 * omega * t + 0.5 * (pc(t) * qc(t) - p0 * q0) / hbar;
        return std::pow(2.0 * a / pi, 0.25) * std::exp(-a * u * u) * std::polar(1.0, phase);
    }
};

/// Positive-energy Dirac plane wave in alpha = sigma_1, beta = sigma_3, hbar = 1.
struct DiracPlaneWave {
    double k, mass, c;
    double energy() const { return std::sqrt(k * k * c * c + mass * mass * c * c * c * c); }
    double velocity() const { return c * c * k / energy(); }
    // Unnormalised spinor (E + m c^2, c k).
    std::pair<double, double> spinor() const { return {energy() + mass * c * c, c * k}; }
};

/// Brute-force Bell current from explicit projectors:
/// J_nm = 2 Re <psi| P_n (-i H) P_m |psi>.
inline Eigen::MatrixXd brute_force_current(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& h,
                                           const std::vector<int>& block_of, int n_blocks) {
    const auto d = psi.size();
    std::vector<Eigen::MatrixXcd> proj(n_blocks, Eigen::MatrixXcd::Zero(d, d));
    for (Eigen::Index a = 0; a < d; ++a) proj[block_of[a]](a, a) = 1.0;
    Eigen::MatrixXd j(n_blocks, n_blocks);
    const cplx minus_i(0.0, -1.0);
    for (int n = 0; n < n_blocks; ++n)
        for (int m = 0; m < n_blocks; ++m) {
            const cplx v = psi.adjoint() * proj[n] * (minus_i * h) * proj[m] * psi;
            j(n, m) = 2.0 * v.real();
        }
    return j;
}

inline Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) a(i, k) = cplx(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

inline Eigen::VectorXcd random_state(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(g(rng), g(rng));
    return v.normalized();
}

/// Exact propagation by the matrix exponential via a Pade-free eigen route that
/// uses a different solver than the library (complex Schur through ComplexEigenSolver).
inline Eigen::VectorXcd propagate(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi0, double t) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::MatrixXcd v = es.eigenvectors();
    Eigen::VectorXcd c = v.fullPivLu().solve(psi0);
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx(0.0, -es.eigenvalues()(k).real() * t));
    return v * c;
}

/// Kolmogorov distribution tail P(K > x), used to cross-check critical values.
inline double kolmogorov_tail(double x) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
    return s;
}

}  // namespace oracle
