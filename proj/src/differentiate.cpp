#include "pilotwave/differentiate.hpp"

#include <array>
#include <cstddef>

namespace pilotwave {
namespace {

constexpr std::array<double, 4> d1 = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
constexpr double d2_centre = -205.0 / 72.0;
constexpr std::array<double, 4> d2 = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
constexpr std::ptrdiff_t half_width = 4;

// Value at (possibly out-of-range) index i under the grid's boundary rule.
template <typename T>
T sample(const Grid1D& grid, std::span<const T> f, std::ptrdiff_t i, double mirror_sign) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    if (i >= 0 && i < n) return f[static_cast<std::size_t>(i)];
    if (grid.periodic()) {
        std::ptrdiff_t j = i % n;
        if (j < 0) j += n;
        return f[static_cast<std::size_t>(j)];
    }
    // Cell-centred mirror about the wall: index -1-k <-> k, n+k <-> n-1-k.
    const std::ptrdiff_t j = i < 0 ? -1 - i : 2 * n - 1 - i;
    if (j < 0 || j >= n) return T{};
    return mirror_sign * f[static_cast<std::size_t>(j)];
}

template <typename T>
std::vector<T> apply_first(const Grid1D& grid, std::span<const T> f, double mirror_sign) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    std::vector<T> out(f.size());
    const double inv_dx = 1.0 / grid.dx();
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        T acc{};
        if (i >= half_width && i < n - half_width) {
            for (std::ptrdiff_t k = 1; k <= half_width; ++k)
                acc += d1[static_cast<std::size_t>(k - 1)] *
                       (f[static_cast<std::size_t>(i + k)] - f[static_cast<std::size_t>(i - k)]);
        } else {
            for (std::ptrdiff_t k = 1; k <= half_width; ++k)
                acc += d1[static_cast<std::size_t>(k - 1)] *
                       (sample(grid, f, i + k, mirror_sign) - sample(grid, f, i - k, mirror_sign));
        }
        out[static_cast<std::size_t>(i)] = acc * inv_dx;
    }
    return out;
}

template <typename T>
std::vector<T> apply_second(const Grid1D& grid, std::span<const T> f, double mirror_sign) {
    const auto n = static_cast<std::ptrdiff_t>(f.size());
    std::vector<T> out(f.size());
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        T acc = d2_centre * f[static_cast<std::size_t>(i)];
        if (i >= half_width && i < n - half_width) {
            for (std::ptrdiff_t k = 1; k <= half_width; ++k)
                acc += d2[static_cast<std::size_t>(k - 1)] *
                       (f[static_cast<std::size_t>(i + k)] + f[static_cast<std::size_t>(i - k)]);
        } else {
            for (std::ptrdiff_t k = 1; k <= half_width; ++k)
                acc += d2[static_cast<std::size_t>(k - 1)] *
                       (sample(grid, f, i + k, mirror_sign) + sample(grid, f, i - k, mirror_sign));
        }
        out[static_cast<std::size_t>(i)] = acc * inv_dx2;
    }
    return out;
}

double sign_of(Parity p) { return p == Parity::odd ? -1.0 : 1.0; }

}  // namespace

std::vector<cplx> first_derivative(const Grid1D& grid, std::span<const cplx> f) {
    return apply_first(grid, f, -1.0);
}

std::vector<cplx> second_derivative(const Grid1D& grid, std::span<const cplx> f) {
    return apply_second(grid, f, -1.0);
}

std::vector<double> first_derivative(const Grid1D& grid, std::span<const double> f, Parity parity) {
    return apply_first(grid, f, sign_of(parity));
}

std::vector<double> second_derivative(const Grid1D& grid, std::span<const double> f,
                                      Parity parity) {
    return apply_second(grid, f, sign_of(parity));
}

}  // namespace pilotwave
