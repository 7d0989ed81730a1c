#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace pilotwave {

enum class Boundary { periodic, reflecting };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Uniform cell-centred 1D grid. Cell i covers [x_min + i*dx, x_min + (i+1)*dx)
/// and its sample point sits at the cell centre, so the cells tile
/// [x_min, x_max] exactly. Reflecting grids put hard walls at x_min and x_max.
class Grid1D {
public:
    static constexpr std::size_t min_points = 8;

    Grid1D(std::size_t n_points, double x_min, double x_max,
           Boundary boundary = Boundary::periodic);

    std::size_t size() const noexcept { return n_; }
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double dx() const noexcept { return dx_; }
    Boundary boundary() const noexcept { return boundary_; }
    bool periodic() const noexcept { return boundary_ == Boundary::periodic; }

    double x(std::size_t i) const noexcept { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }
    std::vector<double> points() const;

    /// Cell index containing position x, clamped to [0, n-1].
    std::size_t cell_of(double x) const noexcept;

    /// Maps x back into [x_min, x_max) for periodic grids; identity otherwise.
    double wrap(double x) const noexcept;
    bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    std::size_t n_;
    double x_min_;
    double x_max_;
    double dx_;
    Boundary boundary_;
};

}  // namespace pilotwave
