#pragma once

// Energies, couplings and decay strengths are in cm^-1, times in ps,
// temperatures in K. Rates come out in ps^-1 after dividing by kHbar.

namespace srswitch {

/// Reduced Planck constant in cm^-1 * ps.
inline constexpr double kHbar = 5.3088375;

/// Boltzmann constant in cm^-1 / K.
inline constexpr double kBoltzmann = 0.69503476;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace srswitch
