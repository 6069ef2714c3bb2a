// units.hpp — Unit conventions used throughout the library.
//
// Energies (and rates) are expressed in units of the free-space single-atom
// decay rate, lengths in units of the atomic transition wavelength. Times are
// therefore in units of the inverse decay rate.

#pragma once

#include <numbers>

namespace ctqw::units {

inline constexpr double gamma_free = 1.0; // single-atom decay rate in free space
inline constexpr double lambda_a = 1.0;   // atomic transition wavelength

// Transition wavenumber, 2*pi/lambda_a.
inline constexpr double k_a = 2.0 * std::numbers::pi / lambda_a;

} // namespace ctqw::units
