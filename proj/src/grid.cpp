#include "pilotwave/grid.hpp"

#include <cmath>
#include <string>

#include "pilotwave/errors.hpp"

namespace pilotwave {

std::string_view to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "reflecting";
}

Boundary boundary_from_string(std::string_view s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "reflecting") return Boundary::reflecting;
    throw PreconditionError("unknown boundary '" + std::string(s) + "'");
}

Grid1D::Grid1D(std::size_t n_points, double x_min, double x_max, Boundary boundary)
    : n_(n_points), x_min_(x_min), x_max_(x_max), boundary_(boundary) {
    if (n_points < min_points)
        throw PreconditionError("grid needs at least 8 points, got " + std::to_string(n_points));
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
        throw PreconditionError("grid requires finite x_min < x_max");
    dx_ = (x_max - x_min) / static_cast<double>(n_points);
}

std::vector<double> Grid1D::points() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
}

std::size_t Grid1D::cell_of(double x) const noexcept {
    const double u = std::floor((x - x_min_) / dx_);
    if (!(u > 0.0)) return 0;
    if (u >= static_cast<double>(n_ - 1)) return n_ - 1;
    return static_cast<std::size_t>(u);
}

double Grid1D::wrap(double x) const noexcept {
    if (!periodic()) return x;
    const double len = length();
    double r = std::fmod(x - x_min_, len);
    if (r < 0.0) r += len;
    if (r >= len) r = 0.0;
    return x_min_ + r;
}

}  // namespace pilotwave
