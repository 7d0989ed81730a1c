#pragma once

#include <complex>
#include <span>
#include <vector>

#include "pilotwave/grid.hpp"

namespace pilotwave {

using cplx = std::complex<double>;

// Eighth-order centred stencils. Off-grid neighbours come from periodic
// wrap-around or, for reflecting grids, from the odd (Dirichlet) mirror
// image about the wall, which is the extension the reflecting
// Schrodinger solver uses.
std::vector<cplx> first_derivative(const Grid1D& grid, std::span<const cplx> f);
std::vector<cplx> second_derivative(const Grid1D& grid, std::span<const cplx> f);

// Mirror parity of a real field at reflecting walls: psi, j and R are odd,
// rho is even. Ignored on periodic grids.
enum class Parity { odd, even };

std::vector<double> first_derivative(const Grid1D& grid, std::span<const double> f,
                                     Parity parity = Parity::odd);
std::vector<double> second_derivative(const Grid1D& grid, std::span<const double> f,
                                      Parity parity = Parity::odd);

}  // namespace pilotwave
